#pragma once

// Machine-readable check records and CSV tables.
// Summary schema: {"check": str, "value": float, "tolerance": float, "pass": bool, "meta": object}.

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "mrlab/boundary.hpp"
#include "mrlab/linalg.hpp"
#include "mrlab/semigroup.hpp"

namespace mrlab {

struct CheckRecord {
  std::string check;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::json meta = nlohmann::json::object();
};

class Report {
 public:
  explicit Report(double tol_scale = 1.0) : tol_scale_(tol_scale) {}

  /// pass iff value <= tolerance * tol_scale.
  const CheckRecord& at_most(const std::string& check, double value, double tolerance,
                             nlohmann::json meta = nlohmann::json::object());
  /// pass iff value >= tolerance / tol_scale.
  const CheckRecord& at_least(const std::string& check, double value, double tolerance,
                              nlohmann::json meta = nlohmann::json::object());
  /// Boolean outcome recorded as value 1/0 against tolerance 1.
  const CheckRecord& flag(const std::string& check, bool ok, nlohmann::json meta = nlohmann::json::object());

  const std::vector<CheckRecord>& records() const { return records_; }
  bool all_pass() const;
  std::vector<std::string> failed() const;
  void merge(const Report& other);
  nlohmann::json to_json() const;
  void write_json(const std::string& path) const;
  double tol_scale() const { return tol_scale_; }

 private:
  double tol_scale_;
  std::vector<CheckRecord> records_;
};

/// Fixed CSV format: ',' separator, '.' decimal, header row, 17 significant digits.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_matrix_csv(const std::string& path, const CMatrix& m);

/// Scan rows (re, im, param, value, flagged) and the JSON summary.
void write_scan_csv(const ScanReport& r, const std::string& path);
nlohmann::json scan_summary(const ScanReport& r);

/// {"example": "heat", "N": 64} or {"example": "custom", "am": [[...]], "g": ...,
/// "k": ..., "z_constraints": ..., "state_index": [...], "weights": [...]}.
BoundarySystem boundary_from_json(const nlohmann::json& j);

}  // namespace mrlab
