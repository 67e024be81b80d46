// logdiff: configuration, orchestration and reporting front end.
//
//   logdiff exact  ...   evaluate/tabulate the closed forms
//   logdiff solve  ...   run one flow problem, export snapshots + manifest
//   logdiff verify ...   run estimate audits (a named check or `all`)
//   logdiff sweep  ...   parameter sweeps (CSV tables, optional SVG)
//
// Exit codes: 0 ok, 1 audit failure, 2 configuration error, 3 solver abort.
// A JSON config file (--config) supplies defaults; command-line flags win.
// LOGDIFF_OUT sets the default output directory.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "logdiff/audits.hpp"
#include "logdiff/exact_solutions.hpp"
#include "logdiff/geometry.hpp"
#include "logdiff/grid.hpp"
#include "logdiff/harness.hpp"
#include "logdiff/report.hpp"
#include "logdiff/solver.hpp"
#include "logdiff/svg.hpp"

namespace {

using namespace logdiff;

struct RunConfig {
  int n = 256;
  double dt = 1e-3;
  double eps = 1.0 / 64.0;
  std::string mu = "1e-2,1e-4,1e-6";
  double delta = 0.1;
  double alpha = 1.0;
  double k = 0.0;
  double p = 2.0;
  double t = 0.0;
  double r = 1.0;
  double t_end = 0.5;
  unsigned seed = 20240501;
  int workers = 1;
  bool svg = false;
  std::string out;
  std::string initial = "cigar:0.1";
  std::string bc = "hyperbolic:1";
};

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  if (out.empty()) throw CLI::ValidationError("--mu", "empty list");
  return out;
}

void validate(const RunConfig& c) {
  const auto fail = [](const std::string& what) {
    throw CLI::ValidationError("config", what);
  };
  if (!(c.delta > 0.0 && c.delta <= 1.0)) fail("delta must lie in (0,1]");
  if (!(c.eps > 0.0 && c.eps <= 0.2)) fail("eps must lie in (0,0.2]");
  if (!(c.alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(c.k >= 0.0)) fail("k must be >= 0");
  if (!(c.p > 1.0)) fail("p must be > 1");
  if (c.n < 16) fail("n must be >= 16");
  if (!(c.dt > 0.0)) fail("dt must be > 0");
  for (double m : parse_list(c.mu))
    if (!(m > 0.0)) fail("mu values must be > 0");
}

std::string out_dir(const RunConfig& c) {
  if (!c.out.empty()) return c.out;
  if (const char* env = std::getenv("LOGDIFF_OUT")) return env;
  return ".";
}

// JSON config file: a flat object whose keys mirror the long flag names.
// Applied before flag parsing, so explicit flags override file values.
void apply_config_file(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) throw CLI::FileError("config file not found: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw CLI::FileError(std::string("config parse error: ") + e.what());
  }
  const auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get("n", c.n);
  get("dt", c.dt);
  get("eps", c.eps);
  get("mu", c.mu);
  get("delta", c.delta);
  get("alpha", c.alpha);
  get("k", c.k);
  get("p", c.p);
  get("t", c.t);
  get("r", c.r);
  get("t_end", c.t_end);
  get("seed", c.seed);
  get("workers", c.workers);
  get("svg", c.svg);
  get("out", c.out);
  get("initial", c.initial);
  get("bc", c.bc);
}

void add_common_flags(CLI::App* app, RunConfig& c) {
  app->add_option("--n", c.n, "grid resolution");
  app->add_option("--dt", c.dt, "time step");
  app->add_option("--eps", c.eps, "boundary truncation");
  app->add_option("--mu", c.mu, "mu value or comma list");
  app->add_option("--delta", c.delta, "delta parameter");
  app->add_option("--alpha", c.alpha, "alpha parameter");
  app->add_option("--k", c.k, "k parameter");
  app->add_option("--p", c.p, "Lebesgue exponent");
  app->add_option("--t", c.t, "time");
  app->add_option("--r", c.r, "radius");
  app->add_option("--t-end", c.t_end, "final time");
  app->add_option("--seed", c.seed, "family seed");
  app->add_option("--workers", c.workers, "concurrent audit jobs");
  app->add_option("--out", c.out, "output directory (or $LOGDIFF_OUT)");
  app->add_flag("--svg", c.svg, "emit SVG plots of sweep tables");
}

// parse "cigar:0.1" / "hyperbolic:1" / "bumps:7" etc.
std::pair<std::string, double> split_spec(const std::string& s, double dflt) {
  const auto pos = s.find(':');
  if (pos == std::string::npos) return {s, dflt};
  return {s.substr(0, pos), std::stod(s.substr(pos + 1))};
}

int cmd_exact(const std::string& what, const RunConfig& c) {
  const auto mus = parse_list(c.mu);
  if (what == "cigar-mass") {
    std::printf("%.17g\n", cigar_l1_mass(mus.front(), c.t, c.r));
    return 0;
  }
  if (what == "eval") {
    const auto [kind, param] = split_spec(c.initial, 0.1);
    ExactSolution sol = ExactSolution::cigar();
    if (kind == "cigar" && param > 0.0) sol = ExactSolution::cigar_scaled(param);
    if (kind == "hyperbolic") sol = ExactSolution::hyperbolic(param);
    std::printf("%.17g\n", sol(c.r, c.t));
    return 0;
  }
  if (what == "metric") {
    std::printf("h   %.17g\n", hyperbolic_h(c.r));
    if (c.r > 0.0 && c.r < 1.0)
      std::printf("h0  %.17g\n", HyperbolicMetric::punctured().factor(c.r));
    return 0;
  }
  std::cerr << "unknown exact target: " << what << "\n";
  return 2;
}

int cmd_solve(const RunConfig& c) {
  auto grid = std::make_shared<const RadialGrid>(c.n, c.eps);
  const auto [ikind, iparam] = split_spec(c.initial, 0.1);
  RadialField u0;
  if (ikind == "cigar") {
    const auto sol = ExactSolution::cigar_scaled(iparam);
    u0 = sample(grid, [&](double r) { return sol(r, 0.0); });
  } else if (ikind == "hyperbolic") {
    u0 = sample(grid, [&](double r) { return iparam * hyperbolic_h(r); });
  } else if (ikind == "bumps") {
    auto family = make_bump_family(
        grid, BumpFamilyOptions{1, static_cast<unsigned>(iparam), 0.2, 0.9});
    u0 = family.front();
  } else {
    std::cerr << "unknown initial data: " << c.initial << "\n";
    return 2;
  }

  const auto [bkind, bparam] = split_spec(c.bc, 1.0);
  BoundaryStrategy bc = HyperbolicTrace{1.0};
  if (bkind == "exact") {
    if (ikind != "cigar") {
      std::cerr << "--bc exact needs --initial cigar:MU (the trace follows "
                   "that solution)\n";
      return 2;
    }
    bc = ExactTrace{ExactSolution::cigar_scaled(iparam)};
  } else if (bkind == "hyperbolic") {
    bc = HyperbolicTrace{bparam};
  } else if (bkind == "annulus") {
    bc = AnnulusTrace{bparam};
  } else {
    std::cerr << "unknown boundary strategy: " << c.bc << "\n";
    return 2;
  }

  FlowProblem<RadialGrid> prob;
  prob.initial = u0;
  prob.bc = bc;
  prob.t_end = c.t_end;
  prob.dt = c.t_end / std::ceil(c.t_end / c.dt - 1e-12);
  const auto traj = solve(prob);
  const std::string dir = out_dir(c) + "/trajectory";
  export_trajectory(traj, bc, prob.dt, dir);
  std::cout << "wrote " << traj.steps() << " snapshots to " << dir << "\n";
  if (traj.aborted) {
    std::cerr << "solver aborted: " << traj.abort_reason << "\n";
    return 3;
  }
  return 0;
}

int cmd_sweep(const std::string& what, const RunConfig& c) {
  const auto mus = parse_list(c.mu);
  const std::string dir = out_dir(c);
  std::filesystem::create_directories(dir);
  if (what == "sharpness") {
    const auto rows = sharpness_table(mus, c.delta);
    const std::string path = dir + "/sharpness.csv";
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "mu,t,value\n");
    for (const auto& row : rows)
      std::fprintf(f, "%.17g,%.17g,%.17g\n", row.mu, row.t, row.value);
    std::fclose(f);
    if (c.svg) {
      SvgSeries pre{"pre", {}, {}, "#d62728"}, post{"post", {}, {}, "#1f77b4"};
      for (const auto& row : rows) {
        (row.t < 1.0 ? pre : post).x.push_back(row.mu);
        (row.t < 1.0 ? pre : post).y.push_back(row.value);
      }
      SvgOptions opt;
      opt.log_x = opt.log_y = true;
      opt.title = "cigar center value across mu";
      opt.x_label = "mu";
      opt.y_label = "u(0,t)";
      write_svg_plot(dir + "/sharpness.svg", {pre, post}, opt);
    }
    std::cout << "wrote " << path << "\n";
    return 0;
  }
  if (what == "delta-mass") {
    const std::string path = dir + "/delta_mass.csv";
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    std::fprintf(f, "mu,t,value\n");
    SvgSeries series{"rel_err", {}, {}, "#2ca02c"};
    for (double mu : mus) {
      const double v = delta_mass_rel_error(mu, c.t > 0.0 ? c.t : 0.5,
                                            c.r < 1.0 ? c.r : 0.5);
      std::fprintf(f, "%.17g,%.17g,%.17g\n", mu, c.t > 0.0 ? c.t : 0.5, v);
      series.x.push_back(mu);
      series.y.push_back(v);
    }
    std::fclose(f);
    if (c.svg) {
      SvgOptions opt;
      opt.log_x = opt.log_y = true;
      opt.title = "delta-mass relative error";
      opt.x_label = "mu";
      opt.y_label = "rel err";
      write_svg_plot(dir + "/delta_mass.svg", {series}, opt);
    }
    std::cout << "wrote " << path << "\n";
    return 0;
  }
  std::cerr << "unknown sweep: " << what << "\n";
  return 2;
}

int cmd_verify(const std::string& check, const RunConfig& c) {
  using namespace logdiff::audits;
  Options opt;
  opt.seed = c.seed;
  opt.workers = c.workers;

  const std::map<std::string, int> names = {
      {"residuals", 1},      {"solver", 2},     {"harnack", 3},
      {"harnack-identity", 4}, {"corollary", 5},  {"sandwich", 6},
      {"brezis-merle", 7},   {"sharpness", 8},  {"delta-mass", 9},
      {"uniformity", 10},    {"k-inequality", 11}, {"invariance", 12},
      {"v0", 13}};

  std::vector<CriterionResult> results;
  if (check == "all") {
    results = run_acceptance(opt);
  } else {
    const auto it = names.find(check);
    if (it == names.end()) {
      std::cerr << "unknown check: " << check << "\n";
      return 2;
    }
    Context ctx(opt);
    CriterionResult res;
    res.index = it->second;
    switch (it->second) {
      case 1: res.reports = c01_residuals(c.eps); break;
      case 2: res.reports = c02_solver_fidelity(c.n, c.dt); break;
      case 3: res.reports = c03_harnack_nonpositivity(ctx, c.n); break;
      case 4: res.reports = c04_harnack_identity(ctx, c.n); break;
      case 5: res.reports = c05_corollary_bounds(ctx, c.n); break;
      case 6: res.reports = c06_sandwich(c.eps); break;
      case 7: res.reports = c07_brezis_merle(ctx, c.delta, c.n); break;
      case 8: res.reports = c08_sharpness(c.delta, parse_list(c.mu)); break;
      case 9: res.reports = c09_delta_mass(parse_list(c.mu)); break;
      case 10: res.reports = c10_uniformity(parse_list(c.mu), c.delta); break;
      case 11: res.reports = c11_k_inequality(opt); break;
      case 12: res.reports = c12_invariance(); break;
      case 13: res.reports = c13_v0_construction(opt, c.delta); break;
    }
    res.pass = all_pass(res.reports);
    results.push_back(std::move(res));
  }

  // wall-clock budget entries go to a separate file so the audit report
  // itself stays byte-deterministic for identical config + seed
  std::vector<CheckReport> merged, timings;
  bool ok = true;
  for (const auto& res : results) {
    ok = ok && res.pass;
    std::printf("[%s] criterion %02d\n", res.pass ? "PASS" : "FAIL", res.index);
    for (const auto& r : res.reports) {
      std::printf("    %-42s %s  margin=%.3g\n", r.name.c_str(),
                  r.pass ? "ok" : "FAIL", r.margin);
      (r.name.ends_with(".runtime") ? timings : merged).push_back(r);
    }
  }
  const std::string dir = out_dir(c);
  std::filesystem::create_directories(dir);
  write_report_json(dir + "/verify_report.json", merged);
  if (!timings.empty())
    write_report_json(dir + "/verify_timings.json", timings);
  std::cout << (ok ? "all checks passed" : "FAILURES present") << "; report at "
            << dir << "/verify_report.json\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical audits for the logarithmic fast diffusion flow"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file (flags override)")
      ->each([&](const std::string& path) { apply_config_file(path, cfg); });

  app.fallthrough();  // let --config appear after the subcommand too

  std::string exact_what = "cigar-mass", sweep_what = "sharpness",
              verify_what = "all";
  auto* exact = app.add_subcommand("exact", "evaluate closed forms");
  exact->add_option("target", exact_what, "cigar-mass | eval | metric");
  add_common_flags(exact, cfg);
  exact->add_option("--sol", cfg.initial, "solution spec, e.g. cigar:0.1");

  auto* solve_cmd = app.add_subcommand("solve", "run a flow problem");
  add_common_flags(solve_cmd, cfg);
  solve_cmd->add_option("--initial", cfg.initial,
                        "cigar:MU | hyperbolic:ALPHA | bumps:SEED");
  solve_cmd->add_option("--bc", cfg.bc,
                        "exact | hyperbolic:ALPHA | annulus:A");

  auto* verify = app.add_subcommand("verify", "run estimate audits");
  verify->add_option("check", verify_what,
                     "all | residuals | solver | harnack | harnack-identity | "
                     "corollary | sandwich | brezis-merle | sharpness | "
                     "delta-mass | uniformity | k-inequality | invariance | v0");
  add_common_flags(verify, cfg);

  auto* sweep = app.add_subcommand("sweep", "parameter sweep tables");
  sweep->add_option("target", sweep_what, "sharpness | delta-mass");
  add_common_flags(sweep, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    validate(cfg);
    if (exact->parsed()) return cmd_exact(exact_what, cfg);
    if (solve_cmd->parsed()) return cmd_solve(cfg);
    if (verify->parsed()) return cmd_verify(verify_what, cfg);
    if (sweep->parsed()) return cmd_sweep(sweep_what, cfg);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const StepError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
