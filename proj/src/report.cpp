#include "mrlab/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "mrlab/heat.hpp"

namespace mrlab {

namespace {

double json_number(double v) { return std::isfinite(v) ? v : (v > 0 ? 1e308 : -1e308); }

CMatrix matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw LinalgError(std::string("config: '") + what + "' must be a nonempty array of rows");
  }
  const Index rows = static_cast<Index>(j.size()), cols = static_cast<Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (j[static_cast<size_t>(i)].size() != static_cast<size_t>(cols)) {
      throw LinalgError(std::string("config: '") + what + "' has ragged rows");
    }
    for (Index k = 0; k < cols; ++k) m(i, k) = j[static_cast<size_t>(i)][static_cast<size_t>(k)].get<double>();
  }
  return m;
}

}  // namespace

const CheckRecord& Report::at_most(const std::string& check, double value, double tolerance,
                                   nlohmann::json meta) {
  records_.push_back({check, value, tolerance * tol_scale_, value <= tolerance * tol_scale_, std::move(meta)});
  return records_.back();
}

const CheckRecord& Report::at_least(const std::string& check, double value, double tolerance,
                                    nlohmann::json meta) {
  records_.push_back({check, value, tolerance / tol_scale_, value >= tolerance / tol_scale_, std::move(meta)});
  return records_.back();
}

const CheckRecord& Report::flag(const std::string& check, bool ok, nlohmann::json meta) {
  records_.push_back({check, ok ? 1.0 : 0.0, 1.0, ok, std::move(meta)});
  return records_.back();
}

bool Report::all_pass() const {
  for (const auto& r : records_) {
    if (!r.pass) return false;
  }
  return true;
}

std::vector<std::string> Report::failed() const {
  std::vector<std::string> out;
  for (const auto& r : records_) {
    if (!r.pass) out.push_back(r.check);
  }
  return out;
}

void Report::merge(const Report& other) {
  records_.insert(records_.end(), other.records_.begin(), other.records_.end());
}

nlohmann::json Report::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records_) {
    arr.push_back({{"check", r.check},
                   {"value", json_number(r.value)},
                   {"tolerance", json_number(r.tolerance)},
                   {"pass", r.pass},
                   {"meta", r.meta}});
  }
  return arr;
}

void Report::write_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw LinalgError("cannot open " + path);
  out << to_json().dump(2) << "\n";
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path);
  if (!out) throw LinalgError("cannot open " + path);
  out.imbue(std::locale::classic());
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n" << std::setprecision(17);
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void write_matrix_csv(const std::string& path, const CMatrix& m) {
  const bool complex_data = m.imag().cwiseAbs().maxCoeff() > 0.0;
  std::vector<std::string> header;
  for (Index k = 0; k < m.cols(); ++k) {
    header.push_back("c" + std::to_string(k));
    if (complex_data) header.push_back("c" + std::to_string(k) + "_im");
  }
  std::vector<std::vector<double>> rows;
  for (Index i = 0; i < m.rows(); ++i) {
    std::vector<double> row;
    for (Index k = 0; k < m.cols(); ++k) {
      row.push_back(m(i, k).real());
      if (complex_data) row.push_back(m(i, k).imag());
    }
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_scan_csv(const ScanReport& r, const std::string& path) {
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < r.grid.size(); ++i) {
    rows.push_back({r.grid[i].real(), r.grid[i].imag(), r.param[i], r.values[i], r.flagged[i] ? 1.0 : 0.0});
  }
  write_csv(path, {"re", "im", "param", "value", "flagged"}, rows);
}

nlohmann::json scan_summary(const ScanReport& r) {
  return {{"label", r.label},
          {"sup", json_number(r.sup)},
          {"argmax", {r.argmax.real(), r.argmax.imag()}},
          {"verdict", r.verdict},
          {"flagged", r.flagged_count()}};
}

BoundarySystem boundary_from_json(const nlohmann::json& j) {
  const std::string example = j.value("example", std::string("heat"));
  if (example == "heat") {
    const int order = j.value("stencil_order", 2);
    if (order != 2) throw LinalgError("config: stencil_order must be 2 (got " + std::to_string(order) + ")");
    return build_heat(j.value("N", 64));
  }
  if (example != "custom") throw LinalgError("config: example must be 'heat' or 'custom' (got '" + example + "')");
  BoundaryDescription d;
  d.label = j.value("label", std::string("custom"));
  d.am = matrix_from_json(j.at("am"), "am");
  d.g = matrix_from_json(j.at("g"), "g");
  d.k = j.contains("k") ? matrix_from_json(j.at("k"), "k") : CMatrix::Zero(d.g.rows(), d.g.cols());
  if (j.contains("z_constraints")) d.z_constraints = matrix_from_json(j.at("z_constraints"), "z_constraints");
  else d.z_constraints = CMatrix::Zero(0, d.am.cols());
  for (const auto& v : j.at("state_index")) d.state_index.push_back(v.get<Index>());
  if (j.contains("weights")) {
    for (const auto& v : j.at("weights")) d.weights.push_back(v.get<double>());
  } else {
    d.weights.assign(d.state_index.size(), 1.0);
  }
  return BoundarySystem(std::move(d));
}

}  // namespace mrlab
