// Acceptance gate: one PASS/FAIL line per criterion, tolerances inline.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mcisi/mcisi.hpp"
#include "oracle/enumerate.hpp"
#include "oracle/grid.hpp"

using namespace mcisi;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int g_failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = budget_s <= 0.0 || secs <= budget_s;
  const bool pass = o.pass && in_time;
  if (!pass) ++g_failures;
  std::printf("criterion %d %-28s %s  (%s; %.1fs%s)\n", id, title, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
              in_time ? "" : ", over time budget");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

RunConfig preset(const std::string& name) { return load_config(std::string(MCISI_PRESET_DIR) + "/" + name); }

BoundsOptions optimized_only(bool lb1, bool lb2, bool ub, bool dmc, bool mf) {
  BoundsOptions o;
  o.policy = InputPolicy::optimized;
  o.select = {lb1, lb2, ub, dmc, mf};
  return o;
}

// 1. I_LB1 <= I_LB2 <= I_UB at optimized inputs over 48 points, slack 1e-6.
Outcome bound_ordering() {
  const std::vector<double> Ts{1e-4, 1e-3, 1e-2, 1e-1};
  std::vector<AignParams> links;
  for (double l : {1e-2, 1e-3, 1e-4})
    for (double s2 : {1.0, 10.0, 100.0}) links.emplace_back(l, 1.0, s2);
  for (double l : {1e-2, 1e-3, 1e-4}) links.emplace_back(l, 100.0, 1.0);
  int points = 0, bad = 0;
  double worst = -1e300;
  for (double T : Ts)
    for (const auto& p : links) {
      const auto r = compute_bounds(p, T, 7, optimized_only(true, true, true, false, false));
      ++points;
      const double gap = std::max(r.i_lb1 - r.i_lb2, r.i_lb2 - r.i_ub);
      worst = std::max(worst, gap);
      if (gap > 1e-6) ++bad;
    }
  return {points == 48 && bad == 0, std::to_string(points) + " points, max violation " + fmt("%.3g", worst) +
                                        ", slack 1e-6"};
}

// 2. All of I_LB1, I_LB2, I_UB, C_DMC >= 2.95 at l = 1e-4 and the top preset T.
Outcome source_entropy_limit() {
  const auto cfg = preset("fig2.cfg");
  double T = 0.0;
  for (double t : cfg.axis_T()) T = std::max(T, t);
  const auto r = compute_bounds(AignParams(1e-4, 1.0, 1.0), T, 7, optimized_only(true, true, true, true, false));
  const double lo = std::min({r.i_lb1, r.i_lb2, r.i_ub, r.c_dmc});
  return {lo >= 2.95, "T=" + fmt("%g", T) + ", min bound " + fmt("%.6f", lo) + " >= 2.95"};
}

// 3. Optimized >= uniform everywhere; strict gain > 1e-4 at >= half the grid.
Outcome optimization_gain() {
  const auto cfg = preset("fig1.cfg");
  const auto Ts = cfg.axis_T();
  BoundsOptions o;
  o.policy = InputPolicy::both;
  o.select = {true, true, false, false, false};
  int gain1 = 0, gain2 = 0, below = 0;
  for (double T : Ts) {
    const auto r = compute_bounds(AignParams(1e-2, 1.0, 1.0), T, 7, o);
    if (r.i_lb1 < r.i_lb1_uniform - 1e-12 || r.i_lb2 < r.i_lb2_uniform - 1e-12) ++below;
    if (r.i_lb1 - r.i_lb1_uniform > 1e-4) ++gain1;
    if (r.i_lb2 - r.i_lb2_uniform > 1e-4) ++gain2;
  }
  const int n = static_cast<int>(Ts.size());
  const bool ok = below == 0 && 2 * gain1 >= n && 2 * gain2 >= n;
  return {ok, "gain>1e-4 at lb1 " + std::to_string(gain1) + "/" + std::to_string(n) + ", lb2 " +
                  std::to_string(gain2) + "/" + std::to_string(n) + ", below uniform " + std::to_string(below)};
}

// 4. q1 and I_UB nondecreasing in sigma2 and in v at l = 1e-2, T = 0.01.
Outcome monotonicity() {
  const double T = 1e-2;
  bool ok = true;
  std::string d;
  auto slice = [&](const std::vector<AignParams>& ps, const char* name) {
    double prev_q = -1.0, prev_ub = -1.0;
    for (const auto& p : ps) {
      const double q1 = arrival_probs(p, T).q1;
      const double ub = compute_bounds(p, T, 7, optimized_only(false, false, true, false, false)).i_ub;
      if (q1 < prev_q || ub < prev_ub - 1e-9) ok = false;
      d += std::string(name) + ":q1=" + fmt("%.6f", q1) + ",ub=" + fmt("%.6f", ub) + " ";
      prev_q = q1;
      prev_ub = ub;
    }
  };
  slice({{1e-2, 1, 1}, {1e-2, 1, 10}, {1e-2, 1, 100}}, "s2");
  slice({{1e-2, 1, 1}, {1e-2, 100, 1}}, "v");
  d.pop_back();
  return {ok, d};
}

// 5. Analytic laws vs per-molecule enumeration (1e-12) and rates vs
//    brute-force joint MI (1e-10), X_max <= 3.
Outcome oracle_equivalence() {
  std::mt19937_64 rng(515);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double law_err = 0.0, mi_err = 0.0;
  int cases = 0;
  auto upd = [](double& e, double a, double b) { e = std::max(e, std::abs(a - b)); };
  for (int t = 0; t < 24; ++t) {
    const int X = 1 + t % 3;
    const auto a = t % 4 == 0 ? InputDistribution::uniform(X) : random_input_distribution(X, rng);
    const double q1 = t == 1 ? 0.6 : u(rng);
    const double q2 = t == 1 ? 0.3 : (1.0 - q1) * u(rng);
    const auto ap = ArrivalProbs::from_probs(q1, q2);
    const auto& av = a.vector();
    ++cases;

    const auto M = isi_marginal_transition(a, ap, X);
    const auto Mr = oracle::isi_marginal(av, q1, q2);
    for (int x = 0; x <= X; ++x)
      for (int y = 0; y <= 2 * X; ++y) upd(law_err, M(x, y), Mr[x][y]);

    const auto R = residual_pmf(a, q2, X);
    const auto Rr = oracle::residual(av, q2);
    for (int k = 0; k <= X; ++k) upd(law_err, R[k], Rr[k]);

    for (int xp = 0; xp <= X; ++xp) {
      const auto D = detained_pmf(xp, q1);
      const auto Dr = oracle::detained(xp, q1);
      for (int k = 0; k <= xp; ++k) upd(law_err, D[k], Dr[k]);
      for (int xm = 0; xm <= X; ++xm)
        for (int yp = 0; yp <= 2 * X; ++yp)
          for (int yr = 0; yr <= std::min(yp, X); ++yr)
            for (int ym = 0; ym <= 2 * X; ++ym)
              upd(law_err, next_given_history(ym, yp, xm, xp, yr, ap),
                  oracle::next_given_history(ym, yp, xm, xp, yr, q1, q2));
    }

    const auto F = mf_joint_transition(ap, X);
    const auto Fr = oracle::mf_joint(X, q1, q2);
    const double qf = ap.in_flight();
    for (int x = 0; x <= X; ++x)
      for (int y1 = 0; y1 <= X; ++y1) {
        double py1 = 0.0;
        for (int y2 = 0; y2 <= X; ++y2) py1 += Fr[x][y1 * (X + 1) + y2];
        for (int y2 = 0; y2 <= X; ++y2) {
          upd(law_err, F(x, y1 * (X + 1) + y2), Fr[x][y1 * (X + 1) + y2]);
          if (py1 > 0.0) upd(law_err, mf_second_slot(y2, y1, x, qf), Fr[x][y1 * (X + 1) + y2] / py1);
        }
      }

    const auto J = lb2_joint_transition(a, ap, X);
    const auto Jr = oracle::lb2_joint(av, q1, q2);
    for (int x = 0; x <= X; ++x)
      for (std::size_t c = 0; c < J.cols(); ++c) upd(law_err, J(x, c), Jr[x][c]);

    upd(mi_err, lower_bound_1(a, ap, X), oracle::mutual_information(av, Mr));
    upd(mi_err, lower_bound_2(a, ap, X), oracle::mutual_information(av, Jr));
    upd(mi_err, matched_filter_rate(ap, X, a), oracle::mutual_information(av, Fr));
  }
  return {law_err <= 1e-12 && mi_err <= 1e-10, std::to_string(cases) + " cases, law err " + fmt("%.2e", law_err) +
                                                   " <= 1e-12, MI err " + fmt("%.2e", mi_err) + " <= 1e-10"};
}

// 6. Simulated p(y_m | x_m) within 4 SE per cell (1e6 slots); plug-in LB2
//    within 1e-3 bits of the analytic value (1e7 slots).
Outcome monte_carlo() {
  const auto ap = ArrivalProbs::from_probs(0.6, 0.3);
  const auto a = InputDistribution::uniform(2);
  const auto cfg = SimConfig::truncated(ap, a, 1000000, 20240601);
  Rng rng(cfg.seed);
  const CountTable t = empirical_isi_marginal(cfg, rng);
  const auto P = isi_marginal_transition(a, ap, 2);
  double max_z = 0.0;
  bool cells_ok = true;
  for (std::size_t x = 0; x < t.rows(); ++x) {
    const double n = static_cast<double>(t.row_total(x));
    for (std::size_t y = 0; y < t.cols(); ++y) {
      const double p = P(x, y);
      const double dev = std::abs(t.frequency(x, y) - p);
      if (p == 0.0) {
        if (dev != 0.0) cells_ok = false;
        continue;
      }
      const double z = dev / std::sqrt(p * (1 - p) / n);
      max_z = std::max(max_z, z);
      if (z > 4.0) cells_ok = false;
    }
  }
  auto cfg2 = SimConfig::truncated(ap, a, 10000000, 20240602);
  Rng rng2(cfg2.seed);
  const auto e = estimate_lb2(cfg2, rng2);
  const double exact = lower_bound_2(a, ap, 2);
  const double dev = std::abs(e.jackknife - exact);
  return {cells_ok && dev <= 1e-3, "max z " + fmt("%.3f", max_z) + " <= 4, |LB2 est - exact| " + fmt("%.2e", dev) +
                                       " <= 1e-3 (exact " + fmt("%.6f", exact) + ")"};
}

// 7. BSC(0.11) capacity within 1e-5 with a uniform optimizer; modified
//    BAA within 5e-3 of a 0.002-step simplex grid at X_max = 2.
Outcome baa_correctness() {
  const double p = 0.11;
  const double target = 1.0 + p * std::log2(p) + (1 - p) * std::log2(1 - p);
  const auto r = standard_baa(TransitionMatrix(2, 2, {1 - p, p, p, 1 - p}));
  const bool bsc_ok = std::abs(r.rate - target) <= 1e-5 && std::abs(r.a_star[0] - 0.5) <= 1e-6;
  double worst = 0.0;
  const ArrivalProbs chans[] = {ArrivalProbs::from_probs(0.6, 0.3),
                                arrival_probs(AignParams(1e-2, 1, 1), 1e-4),
                                arrival_probs(AignParams(1e-2, 1, 1), 1e-3),
                                arrival_probs(AignParams(1e-2, 1, 1), 1e-2)};
  for (const auto& ap : chans)
    for (LowerBound b : {LowerBound::lb1, LowerBound::lb2}) {
      const auto g = oracle::simplex_grid_max(0.002, [&](const std::vector<double>& v) {
        const auto a = InputDistribution::normalized(v);
        return mutual_information(a, lower_bound_matrix(b, a, ap, 2));
      });
      const auto m = modified_baa(b, ap, 2, InputDistribution::uniform(2));
      worst = std::max(worst, std::abs(m.rate - g.value));
    }
  return {bsc_ok && worst <= 5e-3, "BSC " + fmt("%.6f", r.rate) + " vs " + fmt("%.6f", target) +
                                       " +-1e-5, max |BAA - grid| " + fmt("%.2e", worst) + " <= 5e-3"};
}

// 8. F_W finite and in [0, 1] for lambda/mu up to 1e6; all laws row
//    stochastic within 1e-9 over 100 random cases.
Outcome numerical_stability() {
  int evals = 0, cdf_bad = 0;
  for (double ratio = 1e-3; ratio <= 1e6 * (1 + 1e-9); ratio *= std::sqrt(10.0)) {
    for (double mu : {1e-4, 1e-2, 1.0, 1e2}) {
      // lambda = ratio * mu = l^2 / sigma2 with l = mu (v = 1).
      const AignParams p(mu, 1.0, mu / ratio);
      for (int i = -60; i <= 60; ++i) {
        const double F = transit_time_cdf(p, mu * std::pow(10.0, i / 20.0));
        ++evals;
        if (!std::isfinite(F) || F < 0.0 || F > 1.0) ++cdf_bad;
      }
    }
  }
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int X = 1 + t % 7;
    const auto a = random_input_distribution(X, rng);
    const double q1 = u(rng);
    const auto ap = ArrivalProbs::from_probs(q1, (1.0 - q1) * u(rng));
    for (const auto& P : {dmc_transition(ap.q1, X), dmc_transition(ap.qU, X), isi_marginal_transition(a, ap, X),
                          lb2_joint_transition(a, ap, X), mf_first_transition(ap.q1, X), mf_joint_transition(ap, X)})
      worst = std::max(worst, P.max_row_defect());
  }
  return {cdf_bad == 0 && worst <= 1e-9, std::to_string(evals) + " CDF evals, " + std::to_string(cdf_bad) +
                                             " bad; max row defect " + fmt("%.2e", worst) + " <= 1e-9"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// 9. Two sweep runs of a preset with a fixed seed give identical bytes.
Outcome reproducibility() {
  const auto dir = std::filesystem::temp_directory_path();
  const std::string tag = std::to_string(::getpid());
  const auto a = dir / ("mcisi_acc_a_" + tag + ".csv");
  const auto b = dir / ("mcisi_acc_b_" + tag + ".csv");
  const std::string base = std::string(MC_CAPACITY_BIN) + " sweep --config " + MCISI_PRESET_DIR +
                           "/fig1.cfg --seed 4242 --restarts 3 --jobs 4 --out ";
  const int ra = std::system((base + a.string()).c_str());
  const int rb = std::system((base + b.string()).c_str());
  const std::string ca = slurp(a), cb = slurp(b);
  std::filesystem::remove(a);
  std::filesystem::remove(b);
  const bool ok = ra == 0 && rb == 0 && !ca.empty() && ca == cb;
  return {ok, "fig1.cfg, " + std::to_string(ca.size()) + " bytes, " + (ca == cb ? "identical" : "differ")};
}

}  // namespace

int main() {
  criterion(1, "bound ordering", 120, bound_ordering);
  criterion(2, "source-entropy limit", 0, source_entropy_limit);
  criterion(3, "optimization gain", 0, optimization_gain);
  criterion(4, "monotonicity trends", 0, monotonicity);
  criterion(5, "oracle equivalence", 30, oracle_equivalence);
  criterion(6, "monte-carlo agreement", 180, monte_carlo);
  criterion(7, "BAA correctness", 0, baa_correctness);
  criterion(8, "numerical stability", 0, numerical_stability);
  criterion(9, "reproducibility", 0, reproducibility);
  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
