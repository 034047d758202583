#pragma once

// Achievable-rate bounds for the one-slot-ISI channel:
//   I_LB1  symbol-by-symbol I(X_m; Y_m), interference treated as noise
//   I_LB2  I(X_{m-1}; Y_{m-1}, Y_m), the next slot used as side information
//   I_UB   capacity of the interference-free binomial channel with qU
//   C_DMC  capacity of the binomial channel with q1
//   I_MF   two-slot matched-filter rate, evaluated at the C_DMC optimizer
// For optimized inputs I_LB1 <= I_LB2 <= I_UB.

#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mcisi/aign.hpp"
#include "mcisi/baa.hpp"
#include "mcisi/channel.hpp"
#include "mcisi/information.hpp"

namespace mcisi {

inline double lower_bound_1(const InputDistribution& a, const ArrivalProbs& ap, int x_max) {
  return mutual_information(a, isi_marginal_transition(a, ap, x_max));
}

inline double lower_bound_2(const InputDistribution& a, const ArrivalProbs& ap, int x_max) {
  return mutual_information(a, lb2_joint_transition(a, ap, x_max));
}

/// Four-entropy form H(Y1) + H(Y2|Y1) - H(Y1|X) - H(Y2|X,Y1) of lower_bound_2.
/// The first-slot terms come from the marginal law directly, the
/// conditional terms from the joint law.
inline double lower_bound_2_decomposed(const InputDistribution& a, const ArrivalProbs& ap, int x_max) {
  const TransitionMatrix first = isi_marginal_transition(a, ap, x_max);
  const TransitionMatrix joint = lb2_joint_transition(a, ap, x_max);
  const std::size_t ny = first.cols();
  const std::vector<double> p1 = output_marginal(a, first);
  const std::vector<double> p12 = output_marginal(a, joint);

  double h_y1 = entropy(p1);
  double h_y1_given_x = 0.0;
  for (int x = 0; x <= x_max; ++x) h_y1_given_x += a[x] * entropy(first.row(x));

  double h_y2_given_y1 = 0.0;
  std::vector<double> cond(ny);
  for (std::size_t y1 = 0; y1 < ny; ++y1) {
    if (p1[y1] <= 0.0) continue;
    double h = 0.0;
    for (std::size_t y2 = 0; y2 < ny; ++y2) h -= numeric::xlog2x(p12[y1 * ny + y2] / p1[y1]);
    h_y2_given_y1 += p1[y1] * h;
  }

  double h_y2_given_x_y1 = 0.0;
  for (int x = 0; x <= x_max; ++x) {
    if (a[x] == 0.0) continue;
    for (std::size_t y1 = 0; y1 < ny; ++y1) {
      const double py1 = first(x, y1);
      if (py1 <= 0.0) continue;
      double h = 0.0;
      for (std::size_t y2 = 0; y2 < ny; ++y2) h -= numeric::xlog2x(joint(x, y1 * ny + y2) / py1);
      h_y2_given_x_y1 += a[x] * py1 * h;
    }
  }
  return h_y1 + h_y2_given_y1 - h_y1_given_x - h_y2_given_x_y1;
}

/// Capacity of the binomial channel with qU, by standard BAA.
inline BaaResult upper_bound(const ArrivalProbs& ap, int x_max, const BaaOptions& opts = {}) {
  return standard_baa(dmc_transition(ap.qU, x_max), opts);
}

/// Capacity of the interference-free binomial channel with q1.
inline BaaResult dmc_capacity(double q1, int x_max, const BaaOptions& opts = {}) {
  return standard_baa(dmc_transition(q1, x_max), opts);
}

/// I(X_{m-1}; Y_{m-1}, Y_m) when a symbol is sent only every other slot.
/// Bits per two-slot use.
inline double matched_filter_rate(const ArrivalProbs& ap, int x_max, const InputDistribution& a_dmc) {
  detail::check_dims(a_dmc, x_max);
  return mutual_information(a_dmc, mf_joint_transition(ap, x_max));
}

enum class InputPolicy { uniform, optimized, both };

struct BoundSelection {
  bool lb1 = true;
  bool lb2 = true;
  bool ub = true;
  bool dmc = true;
  bool mf = true;
  friend bool operator==(const BoundSelection&, const BoundSelection&) = default;
};

struct BoundsOptions {
  BaaOptions baa;
  int restarts = 1;            ///< total starts per lower bound; the first is uniform
  std::uint64_t seed = 1;      ///< seeds the random restarts
  InputPolicy policy = InputPolicy::both;
  BoundSelection select;
};

struct BoundsReport {
  std::optional<AignParams> params;
  int x_max = 0;
  ArrivalProbs q;

  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  double i_lb1_uniform = kNaN;
  double i_lb1 = kNaN;  ///< optimized
  double i_lb2_uniform = kNaN;
  double i_lb2 = kNaN;  ///< optimized
  double i_ub = kNaN;
  double c_dmc = kNaN;
  double i_mf = kNaN;           ///< bits per two-slot use
  double i_mf_per_slot = kNaN;  ///< i_mf / 2

  std::optional<InputDistribution> a_lb1, a_lb2, a_ub, a_dmc;
  std::vector<std::string> flags;  ///< e.g. "lb2:nonconv", "lb1:osc"
};

namespace detail {

inline void note_flags(std::vector<std::string>& flags, std::string_view what, const BaaResult& r) {
  if (r.oscillating) flags.push_back(std::string(what) + ":osc");
  else if (!r.converged) flags.push_back(std::string(what) + ":nonconv");
}

}  // namespace detail

/// All rates for one operating point given its arrival probabilities.
inline BoundsReport compute_bounds(const ArrivalProbs& ap, int x_max, const BoundsOptions& opts = {}) {
  InputDistribution::check_x_max(x_max);
  if (opts.restarts < 1) throw invalid_parameter("restarts must be >= 1");
  opts.baa.validate();

  BoundsReport rep;
  rep.x_max = x_max;
  rep.q = ap;
  const auto uniform = InputDistribution::uniform(x_max);
  const bool want_uniform = opts.policy != InputPolicy::optimized;
  const bool want_opt = opts.policy != InputPolicy::uniform;

  auto starts = [&] { return make_starts(x_max, opts.restarts, opts.seed); };

  if (opts.select.lb1 || opts.select.lb2) {
    if (want_uniform && opts.select.lb1) rep.i_lb1_uniform = lower_bound_1(uniform, ap, x_max);
    if (want_uniform && opts.select.lb2) rep.i_lb2_uniform = lower_bound_2(uniform, ap, x_max);
    if (want_opt) {
      // LB1 is always optimized when LB2 is, so LB2 can warm-start from it.
      BaaResult r1 = modified_baa_multistart(LowerBound::lb1, ap, x_max, starts(), opts.baa);
      if (opts.select.lb1) {
        rep.i_lb1 = r1.rate;
        rep.a_lb1 = r1.a_star;
        detail::note_flags(rep.flags, "lb1", r1);
      }
      if (opts.select.lb2) {
        std::vector<InputDistribution> s2 = starts();
        s2.push_back(r1.a_star);
        BaaResult r2 = modified_baa_multistart(LowerBound::lb2, ap, x_max, s2, opts.baa);
        rep.i_lb2 = r2.rate;
        rep.a_lb2 = r2.a_star;
        detail::note_flags(rep.flags, "lb2", r2);
      }
    }
  }
  if (opts.select.ub) {
    BaaResult r = upper_bound(ap, x_max, opts.baa);
    rep.i_ub = r.rate;
    rep.a_ub = r.a_star;
    detail::note_flags(rep.flags, "ub", r);
  }
  if (opts.select.dmc || opts.select.mf) {
    BaaResult r = dmc_capacity(ap.q1, x_max, opts.baa);
    rep.a_dmc = r.a_star;
    if (opts.select.dmc) {
      rep.c_dmc = r.rate;
      detail::note_flags(rep.flags, "dmc", r);
    }
    if (opts.select.mf) {
      rep.i_mf = matched_filter_rate(ap, x_max, r.a_star);
      rep.i_mf_per_slot = 0.5 * rep.i_mf;
    }
  }
  return rep;
}

inline BoundsReport compute_bounds(const AignParams& p, double T, int x_max, const BoundsOptions& opts = {}) {
  BoundsReport rep = compute_bounds(arrival_probs(p, T), x_max, opts);
  rep.params = p;
  return rep;
}

}  // namespace mcisi
