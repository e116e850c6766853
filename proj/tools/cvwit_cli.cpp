// cvwit: batch front end for second-moment entanglement witnesses.
//
//   cvwit fullywit --input state.json [--partition 2,2] [--tol 1e-8] [--output report.json] [--no-witness]
//   cvwit multiwit --input state.json ...
//   cvwit validate --witness z.json --partition 1,1 [--multipartite]
//   cvwit product  --witness z.json --input state.json
//   cvwit state ghz --parties 3 --r1 0.34657 --r2 0.34657 [--output ghz.json]
//
// Exit codes: 0 ran (verdict in the report), 2 input error, 3 solver failure.

#include "cvwit/io.hpp"
#include "cvwit/product.hpp"
#include "cvwit/states.hpp"
#include "cvwit/witness.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

namespace {

using cvwit::io::Json;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

struct Common {
  std::string output;
  std::string partition;
  double tol = 1e-8;
};

void emit(const Json& doc, const std::string& output) {
  const std::string text = cvwit::io::dump(doc);
  if (output.empty() || output == "-") {
    std::cout << text;
  } else {
    cvwit::io::write_atomic(output, text);
  }
}

std::vector<int> partition_override(const std::string& flag) {
  return flag.empty() ? std::vector<int>{} : cvwit::io::parse_mode_list(flag);
}

int run_witness(bool multi, const std::string& input, const Common& common, bool no_witness) {
  auto [gamma, in] = cvwit::io::parse_covariance(input, partition_override(common.partition));
  if (multi && in.partition.parties() < 2) {
    throw cvwit::io::InputError(cvwit::io::InputErrorCode::partition_mismatch, "multiwit needs at least 2 parties");
  }
  cvwit::WitnessOptions opt;
  opt.tol = common.tol;
  const cvwit::WitnessResult r = multi ? cvwit::multi_wit(gamma, in.partition, in.constraints, opt)
                                       : cvwit::fully_wit(gamma, in.partition, in.constraints, opt);
  cvwit::io::ReportOptions ro;
  ro.tol = common.tol;
  ro.include_witness = !no_witness;
  emit(cvwit::io::witness_report(multi ? "multiwit" : "fullywit", in, gamma, r, ro), common.output);
  const bool ran = r.optimal() || r.status == cvwit::sdp::Status::dual_infeasible;
  if (!ran) std::cerr << "cvwit: solver finished with status " << cvwit::sdp::to_string(r.status) << "\n";
  return ran ? kExitOk : kExitSolver;
}

int run_validate(const std::string& witness, const Common& common, bool multipartite) {
  const cvwit::io::ProblemInput in = cvwit::io::parse_problem(witness, "witness", partition_override(common.partition));
  const cvwit::Matrix z = 0.5 * (in.gamma + in.gamma.transpose());
  if (multipartite && in.partition.parties() < 2) {
    throw cvwit::io::InputError(cvwit::io::InputErrorCode::partition_mismatch,
                                "multipartite validation needs at least 2 parties");
  }
  const cvwit::ValidationReport rep = multipartite ? cvwit::validate_multipartite_witness(z, in.partition)
                                                   : cvwit::validate_witness(z, in.partition);
  Json doc;
  doc["schema"] = cvwit::io::kReportSchema;
  doc["task"] = multipartite ? "validate_multipartite" : "validate";
  doc["input_digest"] = in.digest;
  doc["partition"] = cvwit::io::partition_to_json(in.partition);
  doc["validation"] = cvwit::io::validation_to_json(rep);
  doc["version"] = cvwit::io::kVersion;
  emit(doc, common.output);
  return kExitOk;
}

int run_product(const std::string& witness, const std::string& input, const Common& common) {
  auto [gamma, in] = cvwit::io::parse_covariance(input, partition_override(common.partition));
  const cvwit::io::ProblemInput w = cvwit::io::parse_problem(witness, "witness", in.partition.sizes());
  if (w.gamma.rows() != gamma.matrix().rows()) {
    throw cvwit::io::InputError(cvwit::io::InputErrorCode::partition_mismatch,
                                "witness and covariance have different dimensions");
  }
  const cvwit::Matrix z = 0.5 * (w.gamma + w.gamma.transpose());
  const cvwit::ValidationReport rep = cvwit::validate_witness(z, in.partition);
  const cvwit::ProductWitness pw = cvwit::decompose_xp(z);
  const double linear = z.cwiseProduct(gamma.matrix()).sum();
  const double value = cvwit::product_value(pw, gamma);

  Json doc;
  doc["schema"] = cvwit::io::kReportSchema;
  doc["task"] = "product";
  doc["input_digest"] = cvwit::io::fnv1a_hex(in.digest + w.digest);
  doc["tolerance"] = common.tol;
  doc["partition"] = cvwit::io::partition_to_json(in.partition);
  doc["linear_value"] = linear;
  doc["linear_detected"] = linear < 1.0 - common.tol;
  doc["product_value"] = value;
  if (rep.is_witness()) {
    doc["product_detected"] = cvwit::detects_product(pw, gamma, in.partition, common.tol);
  } else {
    doc["product_detected"] = nullptr;
  }
  try {
    doc["balance_parameter"] = cvwit::balance_parameter(pw, gamma);
  } catch (const std::domain_error&) {
    doc["balance_parameter"] = nullptr;
  }
  doc["validation"] = cvwit::io::validation_to_json(rep);
  doc["version"] = cvwit::io::kVersion;
  emit(doc, common.output);
  return kExitOk;
}

struct StateArgs {
  std::string name;
  int parties = 3;
  double r1 = std::log(2.0) / 2.0;
  double r2 = std::log(2.0) / 2.0;
  double r = 2.0 * std::log(2.0) / 3.0;
  double alpha = 5.0;
  int modes = 2;
  double mix = 0.5;
  std::uint64_t seed = 1;
  bool xp_block = false;
  double noise = 0.0;
};

std::pair<cvwit::CovarianceMatrix, cvwit::ModePartition> make_state(const StateArgs& a) {
  if (a.name == "ghz") return {cvwit::ghz_covariance(a.parties, a.r1, a.r2), cvwit::ModePartition::singletons(a.parties)};
  if (a.name == "ww") return {cvwit::ww_state(), cvwit::ModePartition({2, 2})};
  if (a.name == "swap") return {cvwit::swap_state(a.r, a.alpha), cvwit::ModePartition::singletons(4)};
  if (a.name == "tms") return {cvwit::two_mode_squeezed(a.r), cvwit::ModePartition::singletons(2)};
  if (a.name == "random") {
    cvwit::RandomStateOptions ro;
    ro.xp_block = a.xp_block;
    return {cvwit::random_covariance(a.modes, a.mix, a.seed, ro), cvwit::ModePartition::singletons(a.modes)};
  }
  throw cvwit::io::InputError(cvwit::io::InputErrorCode::malformed, "unknown state '" + a.name + "'");
}

int run_state(const StateArgs& a, const Common& common) {
  try {
    auto [g, p] = make_state(a);
    if (a.noise > 0.0) g = cvwit::add_noise(g, a.noise);
    if (!common.partition.empty()) {
      p = cvwit::io::make_partition(cvwit::io::parse_mode_list(common.partition));
      if (p.modes() != g.modes()) {
        throw cvwit::io::InputError(cvwit::io::InputErrorCode::partition_mismatch,
                                    "partition does not match the state's mode count");
      }
    }
    emit(cvwit::io::state_document(g, p, a.name), common.output);
  } catch (const std::invalid_argument& e) {
    throw cvwit::io::InputError(cvwit::io::InputErrorCode::malformed, e.what());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal second-moment entanglement witnesses for Gaussian covariance matrices"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cvwit::io::kVersion);

  Common common;
  auto add_common = [&](CLI::App* sub, bool with_tol) {
    sub->add_option("--output,-o", common.output, "Write the JSON document here (default stdout)");
    sub->add_option("--partition", common.partition, "Modes per party, e.g. 2,2 (overrides the file)");
    if (with_tol) sub->add_option("--tol", common.tol, "Solver and verdict tolerance")->check(CLI::PositiveNumber);
  };

  std::string input;
  std::string witness;
  bool no_witness = false;
  bool multipartite = false;

  auto* fully = app.add_subcommand("fullywit", "Optimal witness against full separability");
  fully->add_option("--input,-i", input, "Covariance JSON")->required();
  fully->add_flag("--no-witness", no_witness, "Omit the witness matrix from the report");
  add_common(fully, true);

  auto* multi = app.add_subcommand("multiwit", "Optimal witness against bi-separability");
  multi->add_option("--input,-i", input, "Covariance JSON")->required();
  multi->add_flag("--no-witness", no_witness, "Omit the witness matrix from the report");
  add_common(multi, true);

  auto* validate = app.add_subcommand("validate", "Check the witness conditions for a matrix");
  validate->add_option("--witness,-w", witness, "Witness JSON (field 'witness')")->required();
  validate->add_flag("--multipartite", multipartite, "Check every bipartition");
  add_common(validate, false);

  auto* product = app.add_subcommand("product", "Evaluate the product criterion of a witness");
  product->add_option("--witness,-w", witness, "Witness JSON (field 'witness')")->required();
  product->add_option("--input,-i", input, "Covariance JSON")->required();
  add_common(product, true);

  StateArgs sa;
  auto* state = app.add_subcommand("state", "Emit a reference covariance as an input document");
  state->add_option("name", sa.name, "ghz | ww | swap | tms | random")->required();
  state->add_option("--parties", sa.parties, "ghz: number of modes");
  state->add_option("--r1", sa.r1, "ghz: squeezing of the first input");
  state->add_option("--r2", sa.r2, "ghz: squeezing of the other inputs");
  state->add_option("--r", sa.r, "swap, tms: squeezing");
  state->add_option("--alpha", sa.alpha, "swap: thermal factor");
  state->add_option("--modes", sa.modes, "random: number of modes");
  state->add_option("--mix", sa.mix, "random: mixedness scale");
  state->add_option("--seed", sa.seed, "random: seed");
  state->add_flag("--xp-block", sa.xp_block, "random: no x-p correlations");
  state->add_option("--noise", sa.noise, "add noise * identity");
  add_common(state, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*fully) return run_witness(false, input, common, no_witness);
    if (*multi) return run_witness(true, input, common, no_witness);
    if (*validate) return run_validate(witness, common, multipartite);
    if (*product) return run_product(witness, input, common);
    if (*state) return run_state(sa, common);
  } catch (const cvwit::io::InputError& e) {
    std::cerr << "cvwit: input error [" << cvwit::io::to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "cvwit: input error [malformed]: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "cvwit: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitInput;
}
