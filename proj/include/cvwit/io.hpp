#pragma once

// JSON documents for covariance inputs, witnesses and reports.
//
// Input document:
//   { "modes": [1, 1], "gamma": [[...], ...], "constraints": [ [[...]], ... ] }
// `gamma` may also be a flat row-major array of (2n)^2 numbers. A witness
// document carries the matrix under "witness" instead of "gamma".

#include "cvwit/product.hpp"
#include "cvwit/symplectic.hpp"
#include "cvwit/witness.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvwit::io {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "cvwit.report/1";
inline constexpr const char* kStateSchema = "cvwit.state/1";

using Json = nlohmann::ordered_json;

enum class InputErrorCode { unreadable, malformed, asymmetric, partition_mismatch, not_physical };

inline std::string to_string(InputErrorCode c) {
  switch (c) {
    case InputErrorCode::unreadable: return "unreadable";
    case InputErrorCode::malformed: return "malformed";
    case InputErrorCode::asymmetric: return "asymmetric";
    case InputErrorCode::partition_mismatch: return "partition_mismatch";
    case InputErrorCode::not_physical: return "not_physical";
  }
  return "unknown";
}

class InputError : public std::runtime_error {
 public:
  InputError(InputErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  [[nodiscard]] InputErrorCode code() const { return code_; }

 private:
  InputErrorCode code_;
};

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = digits[h & 0xf];
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(InputErrorCode::unreadable, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file in the same directory, then renames.
inline void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Square matrix from nested rows or a flat row-major array.
inline Matrix matrix_from_json(const Json& j, const std::string& field) {
  auto bad = [&](const std::string& why) { return InputError(InputErrorCode::malformed, field + ": " + why); };
  if (!j.is_array() || j.empty()) throw bad("expected a non-empty array");
  auto number = [&](const Json& v) {
    if (!v.is_number()) throw bad("non-numeric entry");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw bad("non-finite entry");
    return d;
  };
  if (j.front().is_array()) {
    const auto n = static_cast<Eigen::Index>(j.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Json& row = j[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw bad("matrix is not square");
      for (Eigen::Index k = 0; k < n; ++k) m(i, k) = number(row[static_cast<std::size_t>(k)]);
    }
    return m;
  }
  const auto len = static_cast<Eigen::Index>(j.size());
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(len))));
  if (n * n != len) throw bad("flat array length is not a perfect square");
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = number(j[static_cast<std::size_t>(i * n + k)]);
  return m;
}

inline std::vector<int> parse_mode_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw InputError(InputErrorCode::malformed, "bad partition entry '" + item + "'");
    }
  }
  if (out.empty()) throw InputError(InputErrorCode::malformed, "empty partition");
  return out;
}

inline ModePartition make_partition(const std::vector<int>& sizes) {
  try {
    return ModePartition(sizes);
  } catch (const std::invalid_argument& e) {
    throw InputError(InputErrorCode::malformed, std::string("partition: ") + e.what());
  }
}

inline Matrix require_symmetric_input(const Matrix& m, const std::string& field) {
  if (m.rows() % 2 != 0) {
    throw InputError(InputErrorCode::malformed, field + ": dimension " + std::to_string(m.rows()) + " is odd");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (symmetry_defect(m) > kSymmetryTol * scale) {
    throw InputError(InputErrorCode::asymmetric, field + ": matrix is not symmetric");
  }
  return m;
}

struct ProblemInput {
  Matrix gamma;
  ModePartition partition;
  std::vector<MeasurementConstraint> constraints;
  std::string digest;
};

inline Json parse_document(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(InputErrorCode::malformed, origin + ": " + e.what());
  }
}

/// Reads `field` ("gamma" or "witness") plus partition and optional
/// constraints. A non-empty `partition_override` replaces the file's "modes".
inline ProblemInput parse_problem_text(const std::string& text, const std::string& origin,
                                       const std::string& field = "gamma",
                                       const std::vector<int>& partition_override = {}) {
  const Json doc = parse_document(text, origin);
  if (!doc.is_object()) throw InputError(InputErrorCode::malformed, origin + ": top level must be an object");
  if (!doc.contains(field)) throw InputError(InputErrorCode::malformed, origin + ": missing field '" + field + "'");
  ProblemInput in;
  in.digest = fnv1a_hex(text);
  in.gamma = require_symmetric_input(matrix_from_json(doc.at(field), field), field);
  const int modes = static_cast<int>(in.gamma.rows() / 2);

  std::vector<int> sizes = partition_override;
  if (sizes.empty()) {
    if (doc.contains("modes")) {
      const Json& m = doc.at("modes");
      if (!m.is_array()) throw InputError(InputErrorCode::malformed, "modes: expected an array of integers");
      for (const auto& v : m) {
        if (!v.is_number_integer()) throw InputError(InputErrorCode::malformed, "modes: expected integers");
        sizes.push_back(v.get<int>());
      }
    } else {
      sizes.assign(static_cast<std::size_t>(modes), 1);
    }
  }
  in.partition = make_partition(sizes);
  if (in.partition.modes() != modes) {
    throw InputError(InputErrorCode::partition_mismatch,
                     "partition covers " + std::to_string(in.partition.modes()) + " modes but " + field + " has " +
                         std::to_string(modes));
  }
  if (doc.contains("constraints") && !doc.at("constraints").is_null()) {
    const Json& cs = doc.at("constraints");
    if (!cs.is_array()) throw InputError(InputErrorCode::malformed, "constraints: expected an array of matrices");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const std::string name = "constraints[" + std::to_string(i) + "]";
      Matrix a = require_symmetric_input(matrix_from_json(cs[i], name), name);
      if (a.rows() != in.gamma.rows()) {
        throw InputError(InputErrorCode::partition_mismatch, name + ": dimension does not match " + field);
      }
      in.constraints.push_back({0.5 * (a + a.transpose())});
    }
  }
  return in;
}

inline ProblemInput parse_problem(const std::string& path, const std::string& field = "gamma",
                                  const std::vector<int>& partition_override = {}) {
  return parse_problem_text(read_file(path), path, field, partition_override);
}

/// Covariance input: as parse_problem plus the Heisenberg check.
inline std::pair<CovarianceMatrix, ProblemInput> parse_covariance(const std::string& path,
                                                                  const std::vector<int>& partition_override = {}) {
  ProblemInput in = parse_problem(path, "gamma", partition_override);
  CovarianceMatrix g(in.gamma, kSymmetryTol * std::max(1.0, in.gamma.cwiseAbs().maxCoeff()));
  if (!is_valid_covariance(g)) {
    throw InputError(InputErrorCode::not_physical, path + ": gamma violates the uncertainty relation");
  }
  return {std::move(g), std::move(in)};
}

inline Json partition_to_json(const ModePartition& p) {
  Json out = Json::array();
  for (int s : p.sizes()) out.push_back(s);
  return out;
}

inline Json state_document(const CovarianceMatrix& g, const ModePartition& p, const std::string& name) {
  Json doc;
  doc["schema"] = kStateSchema;
  doc["state"] = name;
  doc["modes"] = partition_to_json(p);
  doc["gamma"] = matrix_to_json(g.matrix());
  return doc;
}

inline Json validation_to_json(const ValidationReport& r) {
  Json out;
  out["cond_i"] = r.cond_i;
  out["cond_ii"] = r.cond_ii;
  out["cond_iii"] = r.cond_iii;
  out["is_witness"] = r.is_witness();
  out["min_eigenvalue"] = r.min_eigenvalue;
  out["block_str_sum"] = r.block_str_sum;
  out["total_str"] = r.total_str;
  if (!r.split_sums.empty()) out["split_sums"] = r.split_sums;
  return out;
}

/// Verdict label for a solve; "undetectable" means the constraint set admits
/// no witness at all.
inline std::string verdict_label(const WitnessResult& r, double tol) {
  if (r.status == sdp::Status::dual_infeasible) return "undetectable";
  if (!r.optimal()) return "unknown";
  return to_string(verdict_from_margin(r.x_e, tol));
}

struct ReportOptions {
  double tol = 1e-8;
  bool include_witness = true;
};

inline Json witness_report(const std::string& task, const ProblemInput& in, const CovarianceMatrix& gamma,
                           const WitnessResult& r, const ReportOptions& opt) {
  Json rep;
  rep["schema"] = kReportSchema;
  rep["task"] = task;
  rep["input_digest"] = in.digest;
  rep["tolerance"] = opt.tol;
  rep["partition"] = partition_to_json(in.partition);
  rep["constraints"] = in.constraints.size();
  rep["verdict"] = verdict_label(r, opt.tol);
  if (r.optimal()) {
    rep["c"] = r.c;
    rep["x_e"] = r.x_e;
    rep["p_measure"] = r.x_e > -1.0 ? Json(p_measure(r.x_e)) : Json(nullptr);
    if (opt.include_witness) rep["witness"] = matrix_to_json(r.Z);
    rep["validation"] = validation_to_json(r.conditions);
    // product criterion of the same witness, which tests full separability
    const ProductWitness pw = decompose_xp(r.Z);
    Json prod;
    prod["value"] = product_value(pw, gamma);
    prod["detected"] = validate_witness(r.Z, in.partition).is_witness()
                           ? Json(detects_product(pw, gamma, in.partition, opt.tol))
                           : Json(nullptr);
    rep["product"] = prod;
  } else {
    rep["c"] = nullptr;
    rep["x_e"] = nullptr;
    rep["p_measure"] = nullptr;
  }
  Json diag;
  diag["status"] = sdp::to_string(r.status);
  diag["gap"] = r.optimal() ? Json(r.gap) : Json(nullptr);
  diag["iterations"] = r.iterations;
  rep["diagnostics"] = diag;
  rep["version"] = kVersion;
  return rep;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace cvwit::io
