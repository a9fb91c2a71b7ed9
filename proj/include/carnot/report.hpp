#pragma once

#include "json.hpp"

#include <string>
#include <vector>

namespace carnot {

/// One asserted check. `inputs` is a canonical description of everything
/// the check depends on; only its digest is written out.
struct CheckRecord {
  std::string id;
  std::string inputs;
  double metric = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
};

struct CurveRow {
  double tau = 0.0;
  double residual = 0.0;
  std::string check_id;
};

struct Report {
  std::string command;
  nlohmann::ordered_json context = nlohmann::ordered_json::object();  // group, function, seed
  std::vector<CheckRecord> records;
  std::vector<CurveRow> curves;

  void add(CheckRecord r) { records.push_back(std::move(r)); }
  void add_curve(const std::string& check_id, const std::vector<double>& tau, const std::vector<double>& residual);
  bool passed() const;
};

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string digest(const std::string& text);

nlohmann::ordered_json report_json(const Report& r);
std::string report_csv(const Report& r);
/// One line per record plus a verdict line.
std::string report_summary(const Report& r);

/// Writes the JSON report to `json_path` and, when non-empty, the curve CSV
/// to `csv_path`. Throws std::runtime_error for unwritable paths.
void emit_report(const Report& r, const std::string& json_path, const std::string& csv_path);

}  // namespace carnot
