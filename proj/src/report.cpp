#include "carnot/report.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace carnot {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace

void Report::add_curve(const std::string& check_id, const std::vector<double>& tau,
                       const std::vector<double>& residual) {
  const std::size_t n = std::min(tau.size(), residual.size());
  for (std::size_t i = 0; i < n; ++i) curves.push_back({tau[i], residual[i], check_id});
}

bool Report::passed() const {
  return std::all_of(records.begin(), records.end(), [](const CheckRecord& r) { return r.pass; });
}

std::string digest(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::ordered_json report_json(const Report& r) {
  nlohmann::ordered_json out;
  out["command"] = r.command;
  out["context"] = r.context;
  auto records = nlohmann::ordered_json::array();
  std::size_t passed = 0;
  for (const auto& rec : r.records) {
    nlohmann::ordered_json j;
    j["id"] = rec.id;
    j["inputs_digest"] = digest(rec.inputs);
    j["metric"] = rec.metric;
    j["tolerance"] = rec.tolerance;
    j["verdict"] = rec.pass ? "pass" : "fail";
    if (!rec.details.empty()) j["details"] = rec.details;
    records.push_back(std::move(j));
    passed += rec.pass;
  }
  out["records"] = std::move(records);
  out["summary"] = {{"checks", r.records.size()},
                    {"passed", passed},
                    {"failed", r.records.size() - passed},
                    {"verdict", r.passed() ? "pass" : "fail"}};
  return out;
}

std::string report_csv(const Report& r) {
  std::string out = "tau,residual,check_id\n";
  for (const auto& row : r.curves) out += fmt(row.tau) + "," + fmt(row.residual) + "," + row.check_id + "\n";
  return out;
}

std::string report_summary(const Report& r) {
  std::ostringstream out;
  std::size_t passed = 0;
  for (const auto& rec : r.records) {
    out << (rec.pass ? "[PASS] " : "[FAIL] ") << rec.id << "  metric=" << fmt(rec.metric)
        << "  tol=" << fmt(rec.tolerance) << "\n";
    passed += rec.pass;
  }
  out << r.command << ": " << passed << "/" << r.records.size() << " checks passed\n";
  return out.str();
}

void emit_report(const Report& r, const std::string& json_path, const std::string& csv_path) {
  write_file(json_path, report_json(r).dump(2) + "\n");
  if (!csv_path.empty()) write_file(csv_path, report_csv(r));
}

}  // namespace carnot
