#pragma once

// Transition laws of the slotted ASK channel, all as dense row-stochastic
// matrices. Molecules either arrive in their release slot (q1), in the next
// slot (q2), or are lost; see interference_recursion for deeper memory.

#include <cstddef>
#include <span>
#include <sstream>
#include <string_view>
#include <vector>

#include "mcisi/aign.hpp"
#include "mcisi/numeric.hpp"

namespace mcisi {

/// Probability vector over 0..x_max molecules released.
class InputDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit InputDistribution(std::vector<double> a) : a_(std::move(a)) {
    if (a_.size() < 2) throw invalid_parameter("InputDistribution needs x_max >= 1");
    double s = 0.0;
    for (double v : a_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw invalid_parameter("InputDistribution entries must be finite and >= 0");
      }
      s += v;
    }
    if (std::abs(s - 1.0) > kSumTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "InputDistribution must sum to 1 (got " << s << ")";
      throw invalid_parameter(os.str());
    }
  }

  static InputDistribution uniform(int x_max) {
    check_x_max(x_max);
    return InputDistribution(std::vector<double>(x_max + 1, 1.0 / (x_max + 1)));
  }

  static InputDistribution point_mass(int x_max, int x) {
    check_x_max(x_max);
    if (x < 0 || x > x_max) throw invalid_parameter("point_mass symbol out of range");
    std::vector<double> a(x_max + 1, 0.0);
    a[x] = 1.0;
    return InputDistribution(std::move(a));
  }

  /// Rescales nonnegative weights to sum to one.
  static InputDistribution normalized(std::vector<double> w) {
    const double s = numeric::sum(w);
    if (!(s > 0.0)) throw invalid_parameter("cannot normalize zero weights");
    for (double& v : w) v /= s;
    // One more pass pulls the sum back inside kSumTolerance for long vectors.
    const double s2 = numeric::sum(w);
    for (double& v : w) v /= s2;
    return InputDistribution(std::move(w));
  }

  int x_max() const { return static_cast<int>(a_.size()) - 1; }
  std::size_t size() const { return a_.size(); }
  double operator[](std::size_t i) const { return a_[i]; }
  std::span<const double> probs() const { return a_; }
  const std::vector<double>& vector() const { return a_; }

  static void check_x_max(int x_max) {
    if (x_max < 1) throw invalid_parameter("x_max must be >= 1");
  }

 private:
  std::vector<double> a_;
};

enum class MatrixKind { generic, dmc, isi_marginal, isi_joint, mf_first, mf_joint };

inline std::string_view to_string(MatrixKind k) {
  switch (k) {
    case MatrixKind::generic: return "generic";
    case MatrixKind::dmc: return "dmc";
    case MatrixKind::isi_marginal: return "isi_marginal";
    case MatrixKind::isi_joint: return "isi_joint";
    case MatrixKind::mf_first: return "mf_first";
    case MatrixKind::mf_joint: return "mf_joint";
  }
  return "unknown";
}

/// Dense row-major conditional law P(y | x).
class TransitionMatrix {
 public:
  static constexpr double kRowTolerance = 1e-9;

  TransitionMatrix(std::size_t rows, std::size_t cols, MatrixKind kind = MatrixKind::generic)
      : rows_(rows), cols_(cols), kind_(kind), data_(rows * cols, 0.0) {}

  TransitionMatrix(std::size_t rows, std::size_t cols, std::vector<double> data,
                   MatrixKind kind = MatrixKind::generic)
      : rows_(rows), cols_(cols), kind_(kind), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw invalid_parameter("TransitionMatrix data size mismatch");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  MatrixKind kind() const { return kind_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(data_).subspan(r * cols_, cols_);
  }
  std::span<double> row(std::size_t r) { return std::span<double>(data_).subspan(r * cols_, cols_); }

  /// Largest |row sum - 1| and whether any entry is negative.
  double max_row_defect() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      for (double v : row(r)) {
        if (v < 0.0 || !std::isfinite(v)) return std::numeric_limits<double>::infinity();
        s += v;
      }
      worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
  }

  bool is_row_stochastic(double tol = kRowTolerance) const { return max_row_defect() <= tol; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  MatrixKind kind_;
  std::vector<double> data_;
};

/// P_k(n): number of molecules arriving from the k-1 previous slots.
struct InterferencePmf {
  int k = 1;
  std::vector<double> probs{1.0};
};

namespace detail {

inline void check_prob(double q, const char* what) {
  if (!(q >= 0.0 && q <= 1.0)) {
    std::ostringstream os;
    os << what << " must lie in [0, 1] (got " << q << ")";
    throw invalid_parameter(os.str());
  }
}

inline void check_dims(const InputDistribution& a, int x_max) {
  InputDistribution::check_x_max(x_max);
  if (a.x_max() != x_max) {
    std::ostringstream os;
    os << "input distribution has x_max " << a.x_max() << " but channel expects " << x_max;
    throw invalid_parameter(os.str());
  }
}

// Sum_x a_x Binomial(x, q): count of a random symbol's molecules that make
// one particular arrival with probability q.
inline std::vector<double> thinned_mixture(const InputDistribution& a, double q) {
  std::vector<double> out(a.size(), 0.0);
  for (int x = 0; x <= a.x_max(); ++x) {
    if (a[x] == 0.0) continue;
    for (int y = 0; y <= x; ++y) out[y] += a[x] * numeric::binomial_pmf(x, y, q);
  }
  return out;
}

// Marginal law from an explicit interference pmf; linear in resid.
inline TransitionMatrix isi_marginal_from(std::span<const double> resid, double q1, int x_max) {
  const auto rows = static_cast<std::size_t>(x_max) + 1;
  TransitionMatrix P(rows, 2 * rows - 1, MatrixKind::isi_marginal);
  for (int x = 0; x <= x_max; ++x) {
    for (int i = 0; i <= x; ++i) {
      const double own = numeric::binomial_pmf(x, i, q1);
      if (own == 0.0) continue;
      for (std::size_t r = 0; r < resid.size(); ++r) P(x, i + r) += own * resid[r];
    }
  }
  return P;
}

// Joint law Sum_{y'} p(x' = y_prev - y' | x_prev) resid(y') next(y_m | x''),
// with next = fresh convolved with Binomial(x'', q_flight). Bilinear in
// (resid, fresh); no Bayes division.
inline TransitionMatrix lb2_joint_from(std::span<const double> resid, std::span<const double> fresh,
                                       double q1, double q_flight, int x_max) {
  const std::size_t ny = 2 * static_cast<std::size_t>(x_max) + 1;
  TransitionMatrix P(static_cast<std::size_t>(x_max) + 1, ny * ny, MatrixKind::isi_joint);
  std::vector<std::vector<double>> next(static_cast<std::size_t>(x_max) + 1);
  for (int xf = 0; xf <= x_max; ++xf) next[xf] = numeric::convolve(fresh, numeric::binomial_row(xf, q_flight));
  for (int xp = 0; xp <= x_max; ++xp) {
    for (int xd = 0; xd <= xp; ++xd) {
      const double pd = numeric::binomial_pmf(xp, xd, q1);
      if (pd == 0.0) continue;
      const auto& nx = next[xp - xd];
      for (std::size_t yr = 0; yr < resid.size(); ++yr) {
        const double w = pd * resid[yr];
        if (w == 0.0) continue;
        auto row = P.row(xp).subspan((xd + yr) * ny, ny);
        for (std::size_t ym = 0; ym < nx.size(); ++ym) row[ym] += w * nx[ym];
      }
    }
  }
  return P;
}

}  // namespace detail

/// Binomial DMC: entry (x, y) = C(x, y) q^y (1 - q)^(x - y).
inline TransitionMatrix dmc_transition(double q, int x_max) {
  detail::check_prob(q, "dmc_transition q");
  InputDistribution::check_x_max(x_max);
  const auto n = static_cast<std::size_t>(x_max) + 1;
  TransitionMatrix P(n, n, MatrixKind::dmc);
  for (int x = 0; x <= x_max; ++x)
    for (int y = 0; y <= x; ++y) P(x, y) = numeric::binomial_pmf(x, y, q);
  return P;
}

/// p(y') = Sum_x a_x C(x, y') q2^y' (1 - q2)^(x - y'): molecules of the
/// previous symbol that arrive one slot late.
inline std::vector<double> residual_pmf(const InputDistribution& a, double q2, int x_max) {
  detail::check_dims(a, x_max);
  detail::check_prob(q2, "residual_pmf q2");
  return detail::thinned_mixture(a, q2);
}

/// Binomial(x_prev, q1): molecules of a symbol absorbed in their own slot.
inline std::vector<double> detained_pmf(int x_prev, double q1) {
  if (x_prev < 0) throw invalid_parameter("detained_pmf requires x_prev >= 0");
  detail::check_prob(q1, "detained_pmf q1");
  return numeric::binomial_row(x_prev, q1);
}

/// Steady-state marginal law p(y_m | x_m) with one slot of interference.
/// Depends on a because the interfering symbol is marginalized out.
inline TransitionMatrix isi_marginal_transition(const InputDistribution& a, const ArrivalProbs& ap,
                                                int x_max) {
  detail::check_dims(a, x_max);
  detail::check_prob(ap.q1, "q1");
  detail::check_prob(ap.q2, "q2");
  return detail::isi_marginal_from(detail::thinned_mixture(a, ap.q2), ap.q1, x_max);
}

/// p(y) = Sum_x a_x P(x, y).
inline std::vector<double> output_marginal(const InputDistribution& a, const TransitionMatrix& P) {
  if (P.rows() != a.size()) throw invalid_parameter("output_marginal: dimension mismatch");
  std::vector<double> py(P.cols(), 0.0);
  for (std::size_t x = 0; x < P.rows(); ++x) {
    if (a[x] == 0.0) continue;
    const auto row = P.row(x);
    for (std::size_t y = 0; y < P.cols(); ++y) py[y] += a[x] * row[y];
  }
  return py;
}

/// p(y_m | x_m, x'') where x'' molecules of the previous symbol are still in
/// flight. Fresh molecules arrive with q1, in-flight ones with q_in_flight.
inline double next_given_in_flight(int y_m, int x_m, int x_in_flight, double q1, double q_in_flight) {
  if (y_m < 0 || x_m < 0 || x_in_flight < 0 || y_m > x_m + x_in_flight) return 0.0;
  double p = 0.0;
  for (int i = std::max(0, y_m - x_in_flight); i <= std::min(x_m, y_m); ++i) {
    p += numeric::binomial_pmf(x_m, i, q1) * numeric::binomial_pmf(x_in_flight, y_m - i, q_in_flight);
  }
  return p;
}

/// p(y_m | y_prev, x_m, x_prev, y_resid): y_resid of the y_prev arrivals
/// came from two slots back, so x_prev - (y_prev - y_resid) are in flight.
/// Impossible conditioning events give 0.
inline double next_given_history(int y_m, int y_prev, int x_m, int x_prev, int y_resid, double q1,
                                 double q_in_flight) {
  if (y_resid < 0 || y_resid > y_prev) return 0.0;
  const int detained = y_prev - y_resid;
  if (detained > x_prev) return 0.0;
  return next_given_in_flight(y_m, x_m, x_prev - detained, q1, q_in_flight);
}

inline double next_given_history(int y_m, int y_prev, int x_m, int x_prev, int y_resid,
                                 const ArrivalProbs& ap) {
  return next_given_history(y_m, y_prev, x_m, x_prev, y_resid, ap.q1, ap.in_flight());
}

/// Joint law p(y_prev, y_m | x_prev), column y_prev * (2 x_max + 1) + y_m.
/// Built as p(y_prev | x_prev) p(y_m | y_prev, x_prev) with the second
/// factor from the Bayes mixture over the late arrivals y_resid.
inline TransitionMatrix lb2_joint_transition(const InputDistribution& a, const ArrivalProbs& ap,
                                             int x_max) {
  detail::check_dims(a, x_max);
  const std::vector<double> resid = detail::thinned_mixture(a, ap.q2);
  const std::vector<double> fresh = detail::thinned_mixture(a, ap.q1);
  const double q_flight = ap.in_flight();

  // next[x''][y_m] = Sum_{x_m} a_{x_m} p(y_m | x_m, x'').
  std::vector<std::vector<double>> next(static_cast<std::size_t>(x_max) + 1);
  for (int xf = 0; xf <= x_max; ++xf) {
    next[xf] = numeric::convolve(fresh, numeric::binomial_row(xf, q_flight));
  }

  const TransitionMatrix first = isi_marginal_transition(a, ap, x_max);
  const std::size_t ny = 2 * static_cast<std::size_t>(x_max) + 1;
  TransitionMatrix P(static_cast<std::size_t>(x_max) + 1, ny * ny, MatrixKind::isi_joint);
  std::vector<double> cond(ny);

  for (int xp = 0; xp <= x_max; ++xp) {
    const std::vector<double> detained = detained_pmf(xp, ap.q1);
    for (int yp = 0; yp <= xp + x_max; ++yp) {
      const double p_prev = first(xp, yp);
      if (p_prev == 0.0) continue;
      std::fill(cond.begin(), cond.end(), 0.0);
      for (int yr = std::max(0, yp - xp); yr <= std::min(yp, x_max); ++yr) {
        const double w = detained[yp - yr] * resid[yr] / p_prev;
        if (w == 0.0) continue;
        const auto& nx = next[xp - (yp - yr)];
        for (std::size_t ym = 0; ym < nx.size(); ++ym) cond[ym] += w * nx[ym];
      }
      for (std::size_t ym = 0; ym < ny; ++ym) P(xp, yp * ny + ym) = p_prev * cond[ym];
    }
  }
  return P;
}

/// p(y_m | y_prev, x_prev) for the matched-filter scheme: nothing new is
/// sent in slot m, the x_prev - y_prev in-flight molecules each arrive with
/// q_in_flight.
inline double mf_second_slot(int y_m, int y_prev, int x_prev, double q_in_flight) {
  if (y_prev < 0 || y_prev > x_prev) return 0.0;
  return numeric::binomial_pmf(x_prev - y_prev, y_m, q_in_flight);
}

/// Matched-filter first-slot law: binomial with q1.
inline TransitionMatrix mf_first_transition(double q1, int x_max) {
  detail::check_prob(q1, "mf_first_transition q1");
  InputDistribution::check_x_max(x_max);
  const auto n = static_cast<std::size_t>(x_max) + 1;
  TransitionMatrix P(n, n, MatrixKind::mf_first);
  for (int x = 0; x <= x_max; ++x)
    for (int y = 0; y <= x; ++y) P(x, y) = numeric::binomial_pmf(x, y, q1);
  return P;
}

/// Matched-filter joint law p(y_prev, y_m | x_prev), column y_prev * (x_max + 1) + y_m.
inline TransitionMatrix mf_joint_transition(const ArrivalProbs& ap, int x_max) {
  InputDistribution::check_x_max(x_max);
  const auto n = static_cast<std::size_t>(x_max) + 1;
  const double q_flight = ap.in_flight();
  TransitionMatrix P(n, n * n, MatrixKind::mf_joint);
  for (int x = 0; x <= x_max; ++x)
    for (int y1 = 0; y1 <= x; ++y1) {
      const double p1 = numeric::binomial_pmf(x, y1, ap.q1);
      for (int y2 = 0; y2 <= x - y1; ++y2) P(x, y1 * n + y2) = p1 * mf_second_slot(y2, y1, x, q_flight);
    }
  return P;
}

/// P_k from P_{k-1} by convolving with Sum_x a_x Binomial(x, q_k).
/// slot_probs[j] holds q_{j+1}; entries up to index k-1 are required.
inline InterferencePmf interference_recursion(const InputDistribution& a,
                                              std::span<const double> slot_probs, int k, int x_max) {
  detail::check_dims(a, x_max);
  if (k < 1) throw invalid_parameter("interference_recursion requires k >= 1");
  if (slot_probs.size() < static_cast<std::size_t>(k)) {
    std::ostringstream os;
    os << "interference_recursion at k=" << k << " needs q_1..q_" << k << ", got "
       << slot_probs.size() << " values";
    throw invalid_parameter(os.str());
  }
  InterferencePmf pmf;
  for (int depth = 2; depth <= k; ++depth) {
    const double qk = slot_probs[static_cast<std::size_t>(depth) - 1];
    detail::check_prob(qk, "q_k");
    pmf.probs = numeric::convolve(pmf.probs, detail::thinned_mixture(a, qk));
    pmf.k = depth;
  }
  return pmf;
}

/// Mass beyond the two-slot window: 1 - q1 - q2.
inline double truncation_mass(const ArrivalProbs& ap) { return std::max(0.0, 1.0 - ap.qU); }

}  // namespace mcisi
