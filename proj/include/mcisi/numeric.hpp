#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcisi {

// Thrown for any argument that violates a documented precondition.
class invalid_parameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace numeric {

inline constexpr double kLn2 = std::numbers::ln2;

// Scaled complementary error function erfcx(x) = exp(x^2) erfc(x), x >= 0.
// Below the switch point erfc is still representable with full relative
// accuracy; above it a continued fraction converges in a handful of terms.
inline double erfcx(double x) {
  if (std::isnan(x)) return x;
  if (x < 0.0) return 2.0 * std::exp(x * x) - erfcx(-x);
  if (x < 25.0) return std::exp(x * x) * std::erfc(x);
  if (std::isinf(x)) return 0.0;
  // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
  double tail = x;
  for (int n = 40; n >= 1; --n) tail = x + (0.5 * n) / tail;
  return 1.0 / (std::sqrt(std::numbers::pi) * tail);
}

// log(erfc(x)) without underflow for large positive x.
inline double log_erfc(double x) {
  if (x < 25.0) return std::log(std::erfc(x));
  return std::log(erfcx(x)) - x * x;
}

// Exact for n up to a few dozen, lgamma beyond.
inline double log_choose(int n, int k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (n > 60) return std::exp(log_choose(n, k));
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return std::round(c);
}

// Binomial(n, p) probability mass at k; zero outside 0..n.
inline double binomial_pmf(int n, int k, double p) {
  if (k < 0 || k > n) return 0.0;
  if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
  if (p >= 1.0) return k == n ? 1.0 : 0.0;
  if (n <= 30) {
    return choose(n, k) * std::pow(p, k) * std::pow(1.0 - p, n - k);
  }
  return std::exp(log_choose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p));
}

inline std::vector<double> binomial_row(int n, double p) {
  std::vector<double> row(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) row[static_cast<std::size_t>(k)] = binomial_pmf(n, k, p);
  return row;
}

inline std::vector<double> convolve(std::span<const double> f, std::span<const double> g) {
  if (f.empty() || g.empty()) return {};
  std::vector<double> out(f.size() + g.size() - 1, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    for (std::size_t j = 0; j < g.size(); ++j) out[i + j] += f[i] * g[j];
  }
  return out;
}

// x log2 x with the 0 log 0 = 0 convention.
inline double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

inline double sup_norm_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

inline double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace numeric
}  // namespace mcisi
