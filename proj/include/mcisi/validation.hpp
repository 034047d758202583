#pragma once

// Empirical-vs-analytic checks of every channel law, driven by the
// truncated-mode simulator.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "mcisi/bounds.hpp"
#include "mcisi/channel.hpp"
#include "mcisi/mcsim.hpp"

namespace mcisi {

struct LawCheck {
  std::string name;
  double max_abs_dev = 0.0;  ///< max |empirical - analytic| over checked cells
  double max_z = 0.0;        ///< max deviation in standard errors
  std::int64_t cells = 0;
  std::int64_t rows = 0;
  bool pass = true;
};

struct ValidationOptions {
  double z_limit = 4.0;               ///< band half-width in standard errors
  bool continuity_correction = true;  ///< adds 0.5 / n to the band
  std::int64_t min_row_count = 100;   ///< conditioning events seen fewer times are skipped
};

/// Compares one conditioning row of counts with analytic probabilities.
inline void check_row(LawCheck& chk, std::span<const std::int64_t> counts, std::span<const double> probs,
                      const ValidationOptions& opt) {
  std::int64_t n = 0;
  for (auto c : counts) n += c;
  if (n < opt.min_row_count) return;
  ++chk.rows;
  const double dn = static_cast<double>(n);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    const double p = c < probs.size() ? probs[c] : 0.0;
    const double emp = static_cast<double>(counts[c]) / dn;
    const double dev = std::abs(emp - p);
    const double se = std::sqrt(std::max(0.0, p * (1.0 - p)) / dn);
    const double band = opt.z_limit * se + (opt.continuity_correction ? 0.5 / dn : 0.0);
    ++chk.cells;
    chk.max_abs_dev = std::max(chk.max_abs_dev, dev);
    if (se > 0.0) chk.max_z = std::max(chk.max_z, dev / se);
    else if (dev > 0.0) chk.max_z = std::numeric_limits<double>::infinity();
    if (dev > band) chk.pass = false;
  }
}

inline LawCheck check_table(std::string name, const CountTable& t,
                            const std::function<std::vector<double>(std::size_t)>& analytic_row,
                            const ValidationOptions& opt) {
  LawCheck chk;
  chk.name = std::move(name);
  std::vector<std::int64_t> row(t.cols());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    for (std::size_t c = 0; c < t.cols(); ++c) row[c] = t.count(r, c);
    check_row(chk, row, analytic_row(r), opt);
  }
  return chk;
}

struct ValidationReport {
  std::vector<LawCheck> laws;
  Lb2Estimate lb2_estimate;
  double lb2_analytic = 0.0;
  bool lb2_pass = true;

  bool pass() const {
    for (const auto& l : laws)
      if (!l.pass) return false;
    return lb2_pass;
  }
};

/// Simulates with `sim` (true probabilities) and compares against laws
/// evaluated at `analytic` (normally the same probabilities).
inline ValidationReport run_validation(const ArrivalProbs& sim, const ArrivalProbs& analytic,
                                       const InputDistribution& a, std::int64_t n_slots,
                                       std::uint64_t seed, const ValidationOptions& opt = {}) {
  if (n_slots < 2) throw invalid_parameter("validation needs at least two slots");
  const int xm = a.x_max();
  const auto n = static_cast<std::size_t>(xm) + 1;
  const std::size_t ny = 2 * n - 1;
  ValidationReport rep;

  Rng rng(seed);
  SimConfig cfg = SimConfig::truncated(sim, a, n_slots, seed);

  // One pass over the ISI stream fills every table.
  CountTable detained(n, n), marginal(n, ny), resid(1, n), joint(n, ny * ny);
  // history key: (y_prev, x_m, x_prev, y_resid) -> counts over y_m
  std::map<std::tuple<int, int, int, int>, std::vector<std::int64_t>> history;
  {
    SlotStreamer<Rng> gen(cfg, rng);
    for (int i = 0; i < cfg.burn_in; ++i) (void)gen.next();
    SlotRecord prev = gen.next();
    for (std::int64_t i = 1; i < n_slots; ++i) {
      const SlotRecord cur = gen.next();
      detained.add(cur.x, cur.same_slot);
      marginal.add(cur.x, cur.y);
      resid.add(0, cur.carried_in);
      joint.add(prev.x, static_cast<std::size_t>(prev.y) * ny + cur.y);
      auto& h = history[{prev.y, cur.x, prev.x, prev.carried_in}];
      if (h.empty()) h.assign(ny, 0);
      ++h[cur.y];
      prev = cur;
    }
  }

  // ISI-free channel for the plain binomial law.
  CountTable dmc(n, n);
  {
    SimConfig c0 = SimConfig::truncated(ArrivalProbs::from_probs(sim.q1, 0.0), a, n_slots, seed);
    SlotStreamer<Rng> gen(c0, rng);
    for (std::int64_t i = 0; i < n_slots; ++i) {
      const SlotRecord r = gen.next();
      dmc.add(r.x, r.same_slot);
    }
  }

  // Matched filter: one symbol per two slots, split by slot of arrival.
  std::map<std::pair<int, int>, std::vector<std::int64_t>> mf;
  {
    std::discrete_distribution<int> sym(a.vector().begin(), a.vector().end());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::int64_t i = 0; i < n_slots; ++i) {
      const int x = sym(rng);
      int y1 = 0, y2 = 0;
      for (int k = 0; k < x; ++k) {
        const double v = u(rng);
        if (v < sim.q1) ++y1;
        else if (v < sim.q1 + sim.q2) ++y2;
      }
      auto& h = mf[{x, y1}];
      if (h.empty()) h.assign(n, 0);
      ++h[y2];
    }
  }

  const TransitionMatrix P_dmc = dmc_transition(analytic.q1, xm);
  const TransitionMatrix P_marg = isi_marginal_transition(a, analytic, xm);
  const TransitionMatrix P_joint = lb2_joint_transition(a, analytic, xm);
  const std::vector<double> r_pmf = residual_pmf(a, analytic.q2, xm);

  auto row_of = [](const TransitionMatrix& P) {
    return [&P](std::size_t r) { return std::vector<double>(P.row(r).begin(), P.row(r).end()); };
  };
  rep.laws.push_back(check_table("dmc_binomial", dmc, row_of(P_dmc), opt));
  rep.laws.push_back(check_table("isi_marginal", marginal, row_of(P_marg), opt));
  rep.laws.push_back(check_table("residual", resid, [&](std::size_t) { return r_pmf; }, opt));
  rep.laws.push_back(check_table(
      "detained", detained, [&](std::size_t x) { return detained_pmf(static_cast<int>(x), analytic.q1); }, opt));

  LawCheck hist{"next_given_history"};
  for (const auto& [key, counts] : history) {
    const auto [yp, x, xp, yr] = key;
    std::vector<double> p(ny);
    for (std::size_t ym = 0; ym < ny; ++ym) p[ym] = next_given_history(static_cast<int>(ym), yp, x, xp, yr, analytic);
    check_row(hist, counts, p, opt);
  }
  rep.laws.push_back(hist);

  rep.laws.push_back(check_table("lb2_joint", joint, row_of(P_joint), opt));

  LawCheck mfc{"mf_second_slot"};
  const double qf = analytic.in_flight();
  for (const auto& [key, counts] : mf) {
    const auto [x, y1] = key;
    std::vector<double> p(n);
    for (std::size_t y2 = 0; y2 < n; ++y2) p[y2] = mf_second_slot(static_cast<int>(y2), y1, x, qf);
    check_row(mfc, counts, p, opt);
  }
  rep.laws.push_back(mfc);

  rep.lb2_analytic = lower_bound_2(a, analytic, xm);
  rep.lb2_estimate = estimate_lb2(cfg, rng);
  const double band = opt.z_limit * rep.lb2_estimate.jackknife_se + 1e-3;
  rep.lb2_pass = std::abs(rep.lb2_estimate.jackknife - rep.lb2_analytic) <= band;
  return rep;
}

}  // namespace mcisi
