// mc_capacity: bounds, sweeps, input optimization and Monte-Carlo
// validation for the one-slot-ISI molecular ASK channel.
//
// Exit codes: 0 success, 1 validation failure, 2 usage or config error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcisi/log.hpp"
#include "mcisi/mcisi.hpp"

namespace {

using namespace mcisi;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::optional<int> restarts;
  std::optional<std::string> T, l, v, sigma2;
  std::optional<int> xmax;
  std::vector<std::string> set;
};

RunConfig resolve_config(const Overrides& o) {
  RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
  for (const auto& kv : o.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw config_error("--set expects key=value, got '" + kv + "'");
    apply_setting(c, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
  }
  // A single value sets the point; a comma list sets the sweep axis.
  auto axis = [](const std::optional<std::string>& text, const char* key, double& point, std::vector<double>& sweep) {
    if (!text) return;
    std::vector<double> vals = detail::parse_list(key, *text);
    point = vals.front();
    sweep = vals.size() > 1 ? vals : std::vector<double>{};
  };
  axis(o.T, "--T", c.T, c.sweep_T);
  axis(o.l, "--l", c.l, c.sweep_l);
  axis(o.v, "--v", c.v, c.sweep_v);
  axis(o.sigma2, "--sigma2", c.sigma2, c.sweep_sigma2);
  if (o.xmax) c.x_max = *o.xmax;
  if (o.seed) c.seed = *o.seed;
  if (o.restarts) c.restarts = *o.restarts;
  c.validate();
  return c;
}

std::string format_dist(const InputDistribution& a) {
  std::string s = "[";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? " " : "") + format_value(a[i]);
  return s + "]";
}

// Writes to --out when given, stdout otherwise.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot write output file '" + path + "'");
  fn(f);
  if (!f) throw config_error("failed writing '" + path + "'");
}

void warn_flags(const BoundsReport& r, const std::string& where) {
  for (const auto& f : r.flags) log::warn(where + ": " + f);
}

int cmd_bounds(const Overrides& o) {
  const RunConfig c = resolve_config(o);
  const ArrivalProbs ap = c.arrival();
  BoundsReport r = compute_bounds(ap, c.x_max, c.bounds_options());
  if (!c.q1) r.params = AignParams(c.l, c.v, c.sigma2);
  warn_flags(r, "bounds");

  std::printf("x_max        %d\n", c.x_max);
  if (!c.q1) std::printf("l v sigma2 T %s %s %s %s\n", format_value(c.l).c_str(), format_value(c.v).c_str(),
                         format_value(c.sigma2).c_str(), format_value(c.T).c_str());
  std::printf("q1 q2 qU     %s %s %s\n", format_value(ap.q1).c_str(), format_value(ap.q2).c_str(),
              format_value(ap.qU).c_str());
  std::printf("beyond 2T    %s\n", format_value(truncation_mass(ap)).c_str());
  std::printf("I_LB1        uniform %s  optimized %s\n", format_value(r.i_lb1_uniform).c_str(),
              format_value(r.i_lb1).c_str());
  std::printf("I_LB2        uniform %s  optimized %s\n", format_value(r.i_lb2_uniform).c_str(),
              format_value(r.i_lb2).c_str());
  std::printf("I_UB         %s\n", format_value(r.i_ub).c_str());
  std::printf("C_DMC        %s\n", format_value(r.c_dmc).c_str());
  std::printf("I_MF         %s per two slots, %s per slot\n", format_value(r.i_mf).c_str(),
              format_value(r.i_mf_per_slot).c_str());
  if (r.a_lb1) std::printf("a_lb1        %s\n", format_dist(*r.a_lb1).c_str());
  if (r.a_lb2) std::printf("a_lb2        %s\n", format_dist(*r.a_lb2).c_str());
  if (r.a_ub) std::printf("a_ub         %s\n", format_dist(*r.a_ub).c_str());
  if (r.a_dmc) std::printf("a_dmc        %s\n", format_dist(*r.a_dmc).c_str());
  std::printf("baa_flags    %s\n", format_flags(r.flags).c_str());

  if (!o.out.empty()) {
    emit(o.out, [&](std::ostream& os) {
      os << kSweepHeader << '\n' << csv_row({c.T, c.l, c.v, c.sigma2}, r) << '\n';
    });
  }
  return kExitOk;
}

int cmd_sweep(const Overrides& o) {
  const RunConfig c = resolve_config(o);
  const auto pts = sweep_grid(c);
  log::info("sweep over " + std::to_string(pts.size()) + " points with " + std::to_string(o.jobs) + " jobs");
  const auto reports = run_sweep(c, o.jobs);
  for (std::size_t i = 0; i < reports.size(); ++i) warn_flags(reports[i], "sweep row " + std::to_string(i));
  emit(o.out, [&](std::ostream& os) { write_sweep_csv(os, pts, reports); });
  return kExitOk;
}

int cmd_optimize(const Overrides& o) {
  const RunConfig c = resolve_config(o);
  const ArrivalProbs ap = c.arrival();
  const BaaResult r = modified_baa_multistart(c.optimize_bound, ap, c.x_max,
                                              make_starts(c.x_max, c.restarts, c.seed), c.baa);
  std::printf("bound       %s\n", std::string(to_string(c.optimize_bound)).c_str());
  std::printf("scheme      %s\n", std::string(to_string(c.baa.scheme)).c_str());
  std::printf("a_star      %s\n", format_dist(r.a_star).c_str());
  std::printf("rate        %s\n", format_value(r.rate).c_str());
  std::printf("iterations  %d\n", r.iterations);
  std::printf("converged   %s\n", r.converged ? "yes" : "no");
  if (r.oscillating) std::printf("oscillating yes\n");
  if (!r.converged) log::warn("optimize: no convergence within " + std::to_string(c.baa.max_iter) + " iterations");
  if (!o.out.empty()) {
    emit(o.out, [&](std::ostream& os) {
      os << "iteration,J\n";
      for (std::size_t i = 0; i < r.objective_trace.size(); ++i) {
        os << i << ',' << format_value(r.objective_trace[i]) << '\n';
      }
    });
  }
  return kExitOk;
}

int cmd_validate(const Overrides& o) {
  const RunConfig c = resolve_config(o);
  const ArrivalProbs sim = c.arrival();
  ArrivalProbs analytic = sim;
  if (c.perturb_q1 != 0.0) {
    const double q1 = std::clamp(sim.q1 + c.perturb_q1, 0.0, 1.0 - sim.q2);
    analytic = ArrivalProbs::from_probs(q1, sim.q2);
  }
  const auto a = InputDistribution::uniform(c.x_max);
  const ValidationReport rep = run_validation(sim, analytic, a, c.sim_slots, c.seed);

  std::printf("%-20s %12s %10s %8s %8s  %s\n", "law", "max_abs_dev", "max_z", "rows", "cells", "result");
  for (const auto& l : rep.laws) {
    std::printf("%-20s %12.4e %10.3f %8lld %8lld  %s\n", l.name.c_str(), l.max_abs_dev, l.max_z,
                static_cast<long long>(l.rows), static_cast<long long>(l.cells), l.pass ? "PASS" : "FAIL");
  }
  const auto& e = rep.lb2_estimate;
  std::printf("%-20s analytic %.6f raw %.6f jackknife %.6f se %.2e%s  %s\n", "lb2_mutual_info", rep.lb2_analytic,
              e.raw, e.jackknife, e.jackknife_se, e.insufficient ? " (insufficient samples)" : "",
              rep.lb2_pass ? "PASS" : "FAIL");
  const bool ok = rep.pass();
  std::printf("overall %s\n", ok ? "PASS" : "FAIL");
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Capacity bounds for molecular ASK channels with one-slot ISI"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "key = value configuration file");
  app.add_option("--out", o.out, "output CSV path");
  app.add_option("--seed", o.seed, "64-bit seed for restarts and simulation");
  app.add_option("--jobs", o.jobs, "worker threads for sweeps")->check(CLI::PositiveNumber);
  app.add_option("--restarts", o.restarts, "starts per modified-BAA optimization (first is uniform)");
  app.add_option("--T", o.T, "slot duration (comma list for a sweep axis)");
  app.add_option("--l", o.l, "distance (comma list for a sweep axis)");
  app.add_option("--v", o.v, "drift velocity (comma list for a sweep axis)");
  app.add_option("--sigma2", o.sigma2, "Wiener variance (comma list for a sweep axis)");
  app.add_option("--xmax", o.xmax, "largest number of molecules per symbol");
  app.add_option("--set", o.set, "extra key=value config override (repeatable)");

  auto* bounds = app.add_subcommand("bounds", "all bounds at one operating point");
  auto* sweep = app.add_subcommand("sweep", "bounds over a parameter grid, as CSV");
  auto* optimize = app.add_subcommand("optimize", "modified BAA for one lower bound");
  auto* validate = app.add_subcommand("validate", "Monte-Carlo check of the analytic laws");
  for (auto* s : {bounds, sweep, optimize, validate}) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*bounds) return cmd_bounds(o);
    if (*sweep) return cmd_sweep(o);
    if (*optimize) return cmd_optimize(o);
    if (*validate) return cmd_validate(o);
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const invalid_parameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
