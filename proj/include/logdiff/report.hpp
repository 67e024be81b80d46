#pragma once

// CheckReport: the audit output record. One named inequality with both sides,
// the margin, the tolerance granted, and a verdict; serialized as JSON so
// sweep drivers and CI consume the same artifact.

#include <json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace logdiff {

struct CheckReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;     // slack in the audited ordering; >= -tolerance passes
  double tolerance = 0.0;
  bool pass = false;
  std::string grid;        // description, e.g. "radial n=256"
  double dt = 0.0;
  double eps = 0.0;
  std::string notes;
};

inline nlohmann::ordered_json to_json(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["margin"] = r.margin;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["grid"] = r.grid;
  j["dt"] = r.dt;
  j["eps"] = r.eps;
  j["notes"] = r.notes;
  return j;
}

inline nlohmann::ordered_json to_json(const std::vector<CheckReport>& reports) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) arr.push_back(to_json(r));
  return arr;
}

inline void write_report_json(const std::string& path,
                              const std::vector<CheckReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file: " + path);
  out << to_json(reports).dump(2) << "\n";
}

inline bool all_pass(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return true;
}

}  // namespace logdiff
