#pragma once

// Inverse-Gaussian first-passage time of a drifted Wiener process and the
// per-slot arrival probabilities it induces.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "mcisi/numeric.hpp"

namespace mcisi {

/// Physical link: distance l, drift velocity v > 0, Wiener variance
/// sigma2 = d/2 (d is the diffusion coefficient). mu and lambda are
/// always derived from these three, never stored independently.
class AignParams {
 public:
  AignParams(double l, double v, double sigma2) : l_(l), v_(v), sigma2_(sigma2) {
    if (!(l > 0.0) || !(v > 0.0) || !(sigma2 > 0.0) || !std::isfinite(l) ||
        !std::isfinite(v) || !std::isfinite(sigma2)) {
      std::ostringstream os;
      os << "AignParams requires finite l, v, sigma2 > 0 (got l=" << l << ", v=" << v
         << ", sigma2=" << sigma2 << ")";
      throw invalid_parameter(os.str());
    }
    if (!std::isfinite(mu()) || !std::isfinite(lambda()) || !(mu() > 0.0) || !(lambda() > 0.0)) {
      throw invalid_parameter("AignParams: derived mu/lambda not finite and positive");
    }
  }

  double l() const { return l_; }
  double v() const { return v_; }
  double sigma2() const { return sigma2_; }
  /// Mean transit time.
  double mu() const { return l_ / v_; }
  /// Shape parameter.
  double lambda() const { return l_ * l_ / sigma2_; }

  friend bool operator==(const AignParams&, const AignParams&) = default;

 private:
  double l_;
  double v_;
  double sigma2_;
};

/// q1 = F(T), q2 = F(2T) - F(T), qU = F(2T).
struct ArrivalProbs {
  double q1 = 0.0;
  double q2 = 0.0;
  double qU = 0.0;
  /// Slot duration; empty when the probabilities were given directly.
  std::optional<double> slot_T;

  /// Builds from explicit probabilities, e.g. for synthetic channels.
  static ArrivalProbs from_probs(double q1, double q2) {
    if (!(q1 >= 0.0 && q1 <= 1.0) || !(q2 >= 0.0 && q2 <= 1.0) || q1 + q2 > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "ArrivalProbs requires q1, q2 >= 0 and q1 + q2 <= 1 (got q1=" << q1 << ", q2=" << q2
         << ")";
      throw invalid_parameter(os.str());
    }
    ArrivalProbs ap;
    ap.q1 = q1;
    ap.q2 = q2;
    ap.qU = std::min(1.0, q1 + q2);
    return ap;
  }

  /// Probability that a molecule which missed its own slot arrives in the
  /// next one: q2 / (1 - q1). Zero when nothing can still be in flight.
  double in_flight() const {
    const double miss = 1.0 - q1;
    if (!(miss > 0.0)) return 0.0;
    return std::clamp(q2 / miss, 0.0, 1.0);
  }
};

/// Standard normal CDF via erfc; exact 0/1 at -inf/+inf.
inline double std_normal_cdf(double z) {
  if (std::isnan(z)) return z;
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

/// log Phi(z), finite for all finite z.
inline double log_std_normal_cdf(double z) {
  if (std::isnan(z)) return z;
  if (z == -std::numeric_limits<double>::infinity()) return -std::numeric_limits<double>::infinity();
  if (z >= 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  return std::log(0.5) + numeric::log_erfc(-z / std::numbers::sqrt2);
}

/// CDF of the transit time, F_W(w). Returns exactly 0 for w <= 0.
///
/// The second term exp(2 lambda/mu) Phi(-b) overflows as written once
/// 2 lambda/mu exceeds ~700. Writing Phi(-b) = erfcx(b/sqrt2) exp(-b^2/2) / 2
/// the exponents combine to -a^2/2 with a the first-term argument, so the
/// product is evaluated as erfcx(b/sqrt2) exp(-a^2/2) / 2.
inline double transit_time_cdf(const AignParams& p, double w) {
  if (std::isnan(w)) return w;
  if (w <= 0.0) return 0.0;
  if (std::isinf(w)) return 1.0;
  const double mu = p.mu();
  const double lambda = p.lambda();
  const double s = std::sqrt(lambda / w);
  const double a = s * (w / mu - 1.0);
  const double b = s * (w / mu + 1.0);
  const double first = std_normal_cdf(a);
  const double second = 0.5 * numeric::erfcx(b / std::numbers::sqrt2) * std::exp(-0.5 * a * a);
  return std::clamp(first + second, 0.0, 1.0);
}

inline ArrivalProbs arrival_probs(const AignParams& p, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) {
    throw invalid_parameter("arrival_probs requires a finite slot duration T > 0");
  }
  ArrivalProbs ap;
  ap.q1 = transit_time_cdf(p, T);
  ap.qU = std::max(ap.q1, transit_time_cdf(p, 2.0 * T));
  ap.q2 = ap.qU - ap.q1;
  ap.slot_T = T;
  return ap;
}

/// q_k = F(kT) - F((k-1)T), the probability of arriving in the k-th slot
/// after release (k = 1 is the release slot).
inline double slot_prob(const AignParams& p, double T, int k) {
  if (k < 1) throw invalid_parameter("slot_prob requires k >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw invalid_parameter("slot_prob requires T > 0");
  const double hi = transit_time_cdf(p, k * T);
  const double lo = transit_time_cdf(p, (k - 1) * T);
  return std::max(0.0, hi - lo);
}

}  // namespace mcisi
