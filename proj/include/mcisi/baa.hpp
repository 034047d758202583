#pragma once

// Blahut-Arimoto iterations. The standard form maximizes I(a; P) for a
// fixed channel. The modified form serves the ISI lower bounds, whose
// channel matrix itself depends on a: each outer step rebuilds P(a) before
// the backward (Q) and forward (a) updates, so it only seeks a local
// maximum and the objective is not monotone.

#include <cmath>
#include <limits>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "mcisi/channel.hpp"
#include "mcisi/information.hpp"

namespace mcisi {

/// How the modified iteration forms its a-update.
///  frozen_channel      a_j ~ exp(Sum_i P_ji log Q_ij) with P held at the
///                      current a, then P rebuilt. Its fixed points need
///                      not be stationary points of the bound.
///  gradient_corrected  the same exponent plus
///                      C_j = Sum_x a_x Sum_y dP_xy/da_j log(Q_yx / a_x),
///                      the part of dJ/da_j that comes from P moving with a,
///                      with step halving until the bound does not drop.
///                      Reduces to the classical update when P is fixed.
enum class ModifiedScheme { gradient_corrected, frozen_channel };

inline std::string_view to_string(ModifiedScheme s) {
  return s == ModifiedScheme::gradient_corrected ? "corrected" : "frozen";
}

struct BaaOptions {
  double tol = 1e-9;      ///< sup-norm change of a that counts as converged
  int max_iter = 10000;   ///< outer-iteration cap
  double damping = 1.0;   ///< a <- damping * a_new + (1 - damping) * a_old
  double floor = 0.0;     ///< minimum mass per symbol after each update
  ModifiedScheme scheme = ModifiedScheme::gradient_corrected;  ///< modified BAA only

  friend bool operator==(const BaaOptions&, const BaaOptions&) = default;

  void validate() const {
    if (!(tol > 0.0)) throw invalid_parameter("BaaOptions.tol must be > 0");
    if (max_iter < 1) throw invalid_parameter("BaaOptions.max_iter must be >= 1");
    if (!(damping > 0.0 && damping <= 1.0)) throw invalid_parameter("BaaOptions.damping must be in (0, 1]");
    if (!(floor >= 0.0 && floor < 1.0)) throw invalid_parameter("BaaOptions.floor must be in [0, 1)");
  }
};

struct BaaResult {
  InputDistribution a_star;     ///< best iterate found
  InputDistribution a_final;    ///< last iterate, the fixed-point candidate
  double rate = 0.0;            ///< objective at a_star, bits
  int iterations = 0;
  bool converged = false;
  bool oscillating = false;     ///< a 2-cycle stopped the iteration
  std::vector<double> objective_trace;  ///< J at the start of each iteration
};

/// Backward channel, rows indexed by output i and columns by input j:
/// Q(i, j) = a_j P(j, i) / Sum_j a_j P(j, i). Row-stochastic in j.
using BackwardMatrix = TransitionMatrix;

inline BackwardMatrix q_update(const InputDistribution& a, const TransitionMatrix& P) {
  if (P.rows() != a.size()) throw invalid_parameter("q_update: dimension mismatch");
  BackwardMatrix Q(P.cols(), P.rows());
  const std::vector<double> py = output_marginal(a, P);
  const double uniform = 1.0 / static_cast<double>(P.rows());
  for (std::size_t i = 0; i < P.cols(); ++i) {
    if (py[i] > 0.0) {
      for (std::size_t j = 0; j < P.rows(); ++j) Q(i, j) = a[j] * P(j, i) / py[i];
    } else {
      // Output never occurs; any column leaves J unchanged.
      for (std::size_t j = 0; j < P.rows(); ++j) Q(i, j) = uniform;
    }
  }
  return Q;
}

/// a_j proportional to exp(Sum_i P(j, i) log Q(i, j)), via log-sum-exp.
inline InputDistribution a_update(const TransitionMatrix& P, const BackwardMatrix& Q) {
  if (Q.rows() != P.cols() || Q.cols() != P.rows()) throw invalid_parameter("a_update: shape mismatch");
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> s(P.rows(), 0.0);
  double best = kNegInf;
  for (std::size_t j = 0; j < P.rows(); ++j) {
    const auto row = P.row(j);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] == 0.0) continue;
      const double q = Q(i, j);
      if (q <= 0.0) {
        s[j] = kNegInf;
        break;
      }
      s[j] += row[i] * std::log(q);
    }
    best = std::max(best, s[j]);
  }
  if (best == kNegInf) throw invalid_parameter("a_update: every input has -inf exponent");
  std::vector<double> w(P.rows());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = s[j] == kNegInf ? 0.0 : std::exp(s[j] - best);
  return InputDistribution::normalized(std::move(w));
}

/// J(a, P, Q) = Sum_j Sum_i a_j P(j, i) log2(Q(i, j) / a_j).
inline double objective_J(const InputDistribution& a, const TransitionMatrix& P, const BackwardMatrix& Q) {
  double J = 0.0;
  for (std::size_t j = 0; j < P.rows(); ++j) {
    if (a[j] == 0.0) continue;
    const auto row = P.row(j);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i] == 0.0) continue;
      J += a[j] * row[i] * std::log2(Q(i, j) / a[j]);
    }
  }
  return J;
}

enum class LowerBound { lb1, lb2 };

inline std::string_view to_string(LowerBound b) { return b == LowerBound::lb1 ? "lb1" : "lb2"; }

/// Channel matrix of the named lower bound at input distribution a.
inline TransitionMatrix lower_bound_matrix(LowerBound bound, const InputDistribution& a,
                                           const ArrivalProbs& ap, int x_max) {
  return bound == LowerBound::lb1 ? isi_marginal_transition(a, ap, x_max)
                                  : lb2_joint_transition(a, ap, x_max);
}

/// Dirichlet(1, ..., 1) draw: a uniformly random point of the simplex.
template <class Urbg>
InputDistribution random_input_distribution(int x_max, Urbg& rng) {
  InputDistribution::check_x_max(x_max);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(static_cast<std::size_t>(x_max) + 1);
  for (double& v : w) v = expo(rng);
  return InputDistribution::normalized(std::move(w));
}

namespace detail {

inline InputDistribution blend(const InputDistribution& next, const InputDistribution& prev,
                               const BaaOptions& opts) {
  if (opts.damping == 1.0 && opts.floor == 0.0) return next;
  std::vector<double> w(next.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    w[j] = std::max(opts.floor, opts.damping * next[j] + (1.0 - opts.damping) * prev[j]);
  }
  return InputDistribution::normalized(std::move(w));
}

// Shared outer loop. channel_of(a) returns the matrix to use at a.
template <class ChannelOf>
BaaResult run_baa(ChannelOf&& channel_of, InputDistribution a, const BaaOptions& opts, bool detect_cycles) {
  opts.validate();
  BaaResult res{a, a, 0.0, 0, false, false, {}};
  std::optional<InputDistribution> before_prev;
  double best_J = -std::numeric_limits<double>::infinity();

  for (int t = 0; t < opts.max_iter; ++t) {
    const TransitionMatrix P = channel_of(a);
    const BackwardMatrix Q = q_update(a, P);
    const double J = mutual_information(a, P);
    res.objective_trace.push_back(J);
    if (J > best_J) {
      best_J = J;
      res.a_star = a;
    }
    InputDistribution next = blend(a_update(P, Q), a, opts);
    const double change = numeric::sup_norm_diff(next.probs(), a.probs());
    res.iterations = t + 1;
    if (change < opts.tol) {
      res.converged = true;
      a = std::move(next);
      break;
    }
    if (detect_cycles && before_prev &&
        numeric::sup_norm_diff(next.probs(), before_prev->probs()) < opts.tol) {
      res.oscillating = true;
      a = std::move(next);
      break;
    }
    before_prev = std::move(a);
    a = std::move(next);
  }

  res.a_final = a;
  const double final_J = mutual_information(a, channel_of(a));
  if (final_J >= best_J) res.a_star = a;
  res.rate = mutual_information(res.a_star, channel_of(res.a_star));
  return res;
}

}  // namespace detail

/// Classical BAA for a fixed channel. The trace is nondecreasing.
inline BaaResult standard_baa(const TransitionMatrix& P, const BaaOptions& opts = {},
                              std::optional<InputDistribution> a0 = std::nullopt) {
  InputDistribution start = a0 ? *a0 : InputDistribution::uniform(static_cast<int>(P.rows()) - 1);
  if (start.size() != P.rows()) throw invalid_parameter("standard_baa: a0 dimension mismatch");
  return detail::run_baa([&P](const InputDistribution&) -> const TransitionMatrix& { return P; },
                         std::move(start), opts, false);
}

namespace detail {

// d/da_j of I(a; P(a)) in nats, up to a j-independent constant, for the
// supported symbols (a_j > 0). Unsupported symbols get 0; multiplicative
// updates keep them at zero anyway.
inline std::vector<double> lower_bound_gradient(LowerBound bound, const InputDistribution& a,
                                                const ArrivalProbs& ap, int x_max,
                                                const TransitionMatrix& P) {
  const std::vector<double> py = output_marginal(a, P);
  const std::size_t n = a.size();

  // log(P_xy / p_y) wherever it is weighted by a positive a_x.
  std::vector<double> log_ratio(P.rows() * P.cols(), 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (a[x] == 0.0) continue;
    for (std::size_t y = 0; y < P.cols(); ++y) {
      const double v = P(x, y);
      if (v > 0.0) log_ratio[x * P.cols() + y] = std::log(v / py[y]);
    }
  }
  auto weighted = [&](const TransitionMatrix& dP) {
    double c = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      if (a[x] == 0.0) continue;
      const auto row = dP.row(x);
      double s = 0.0;
      for (std::size_t y = 0; y < row.size(); ++y) {
        if (row[y] != 0.0) s += row[y] * log_ratio[x * P.cols() + y];
      }
      c += a[x] * s;
    }
    return c;
  };

  const std::vector<double> resid = thinned_mixture(a, ap.q2);
  const std::vector<double> fresh = thinned_mixture(a, ap.q1);
  std::vector<double> g(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (a[j] == 0.0) continue;
    double d = 0.0;
    const auto row = P.row(j);
    for (std::size_t y = 0; y < row.size(); ++y) {
      if (row[y] > 0.0) d += row[y] * std::log(row[y] / py[y]);
    }
    std::vector<double> rj(n, 0.0), fj(n, 0.0);
    for (int y = 0; y <= static_cast<int>(j); ++y) {
      rj[y] = numeric::binomial_pmf(static_cast<int>(j), y, ap.q2);
      fj[y] = numeric::binomial_pmf(static_cast<int>(j), y, ap.q1);
    }
    double c = 0.0;
    if (bound == LowerBound::lb1) {
      c = weighted(isi_marginal_from(rj, ap.q1, x_max));
    } else {
      const double qf = ap.in_flight();
      c = weighted(lb2_joint_from(rj, fresh, ap.q1, qf, x_max)) +
          weighted(lb2_joint_from(resid, fj, ap.q1, qf, x_max));
    }
    g[j] = d + c;
  }
  return g;
}

// a_j proportional to a_j exp(step * g_j) over the support of a.
inline InputDistribution exponentiated_step(const InputDistribution& a, const std::vector<double>& g,
                                            double step) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> lw(a.size(), kNegInf);
  double top = kNegInf;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == 0.0) continue;
    lw[j] = std::log(a[j]) + step * g[j];
    top = std::max(top, lw[j]);
  }
  std::vector<double> w(a.size(), 0.0);
  for (std::size_t j = 0; j < a.size(); ++j) w[j] = lw[j] == kNegInf ? 0.0 : std::exp(lw[j] - top);
  return InputDistribution::normalized(std::move(w));
}

inline BaaResult run_corrected(LowerBound bound, const ArrivalProbs& ap, int x_max,
                               InputDistribution a, const BaaOptions& opts) {
  opts.validate();
  constexpr double kMinStep = 1.0 / 1048576.0;
  BaaResult res{a, a, 0.0, 0, false, false, {}};
  TransitionMatrix P = lower_bound_matrix(bound, a, ap, x_max);
  double F = mutual_information(a, P);
  double step = 1.0;

  for (int t = 0; t < opts.max_iter; ++t) {
    res.objective_trace.push_back(F);
    res.iterations = t + 1;
    const std::vector<double> g = lower_bound_gradient(bound, a, ap, x_max, P);

    // Displacement of the unit step measures stationarity.
    InputDistribution unit = blend(exponentiated_step(a, g, 1.0), a, opts);
    if (numeric::sup_norm_diff(unit.probs(), a.probs()) < opts.tol) {
      res.converged = true;
      a = std::move(unit);
      P = lower_bound_matrix(bound, a, ap, x_max);
      F = mutual_information(a, P);
      break;
    }

    step = std::min(1.0, 2.0 * step);
    bool moved = false;
    for (; step >= kMinStep; step *= 0.5) {
      InputDistribution cand = step == 1.0 ? unit : blend(exponentiated_step(a, g, step), a, opts);
      TransitionMatrix Pc = lower_bound_matrix(bound, cand, ap, x_max);
      const double Fc = mutual_information(cand, Pc);
      if (Fc >= F) {
        a = std::move(cand);
        P = std::move(Pc);
        F = Fc;
        moved = true;
        break;
      }
    }
    // No ascent even for tiny steps: at a stationary point to within rounding.
    if (!moved) {
      res.converged = true;
      break;
    }
  }
  res.a_final = a;
  res.a_star = a;
  res.rate = F;
  return res;
}

}  // namespace detail

/// BAA with the lower-bound channel rebuilt from the current a each step.
/// The frozen-channel scheme returns the best iterate seen, which need not
/// be the last; the corrected scheme ascends monotonically.
inline BaaResult modified_baa(LowerBound bound, const ArrivalProbs& ap, int x_max,
                              const InputDistribution& a0, const BaaOptions& opts = {}) {
  detail::check_dims(a0, x_max);
  if (opts.scheme == ModifiedScheme::gradient_corrected) {
    return detail::run_corrected(bound, ap, x_max, a0, opts);
  }
  return detail::run_baa(
      [&](const InputDistribution& a) { return lower_bound_matrix(bound, a, ap, x_max); }, a0, opts,
      true);
}

/// Best-of-several modified BAA runs. Starts are tried in order and the
/// first strictly better rate wins, so ties keep the earliest start.
inline BaaResult modified_baa_multistart(LowerBound bound, const ArrivalProbs& ap, int x_max,
                                         const std::vector<InputDistribution>& starts,
                                         const BaaOptions& opts = {}) {
  if (starts.empty()) throw invalid_parameter("modified_baa_multistart needs at least one start");
  std::optional<BaaResult> best;
  for (const auto& a0 : starts) {
    BaaResult r = modified_baa(bound, ap, x_max, a0, opts);
    if (!best || r.rate > best->rate) best = std::move(r);
  }
  return std::move(*best);
}

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Uniform start followed by restarts - 1 random simplex points drawn from
/// a generator seeded with `seed`.
inline std::vector<InputDistribution> make_starts(int x_max, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw invalid_parameter("restarts must be >= 1");
  std::mt19937_64 rng(detail::splitmix64(seed));
  std::vector<InputDistribution> s{InputDistribution::uniform(x_max)};
  for (int r = 1; r < restarts; ++r) s.push_back(random_input_distribution(x_max, rng));
  return s;
}

}  // namespace mcisi
