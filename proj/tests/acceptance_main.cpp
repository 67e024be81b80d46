// Acceptance gate: runs every criterion at its pinned desk-scale settings and
// prints one pass/fail line per criterion (sub-checks indented). Exit code is
// the number of failed criteria. A JSON report lands next to the binary.

#include <cstdio>
#include <string>

#include "logdiff/audits.hpp"
#include "logdiff/report.hpp"

int main() {
  using namespace logdiff;
  audits::Options opt;
  opt.workers = 2;

  const char* names[] = {
      "",
      "exact-solution residual convergence",
      "solver fidelity vs the cigar closed form",
      "Harnack nonpositivity (H <= 0)",
      "Harnack evolution identity residual",
      "corollary sup bounds",
      "boundary sandwich on the annulus",
      "Brezis-Merle exponential integrability",
      "sharpness tables (blow-up / boundedness)",
      "delta-mass convergence",
      "empirical-C uniformity across the cigar family",
      "L^p k-inequality (50 tuples)",
      "invariance suite (rescaling + Moebius)",
      "gamma / v0 construction postconditions",
  };

  std::vector<audits::CriterionResult> results;
  try {
    results = audits::run_acceptance(opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance harness error: %s\n", e.what());
    return 99;
  }

  int failures = 0;
  std::vector<CheckReport> merged, timings;
  for (const auto& res : results) {
    if (!res.pass) ++failures;
    std::printf("[%s] criterion %02d: %s\n", res.pass ? "PASS" : "FAIL",
                res.index, names[res.index]);
    for (const auto& r : res.reports) {
      std::printf("        %-44s %-4s margin=%- .4g  %s\n", r.name.c_str(),
                  r.pass ? "ok" : "FAIL", r.margin,
                  r.notes.size() > 110 ? (r.notes.substr(0, 107) + "...").c_str()
                                       : r.notes.c_str());
      (r.name.ends_with(".runtime") ? timings : merged).push_back(r);
    }
  }
  write_report_json("acceptance_report.json", merged);
  write_report_json("acceptance_timings.json", timings);
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures;
}
