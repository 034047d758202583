#pragma once

// Shannon entropy and mutual information of finite-alphabet laws, in bits.

#include <cmath>
#include <span>
#include <sstream>

#include "mcisi/channel.hpp"
#include "mcisi/numeric.hpp"

namespace mcisi {

inline constexpr double kDistributionTolerance = 1e-9;

/// -Sum p_i log2 p_i, 0 log 0 = 0.
inline double entropy(std::span<const double> p) {
  double s = 0.0;
  double h = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw invalid_parameter("entropy: negative or non-finite mass");
    s += v;
    h -= numeric::xlog2x(v);
  }
  if (std::abs(s - 1.0) > kDistributionTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "entropy: distribution sums to " << s;
    throw invalid_parameter(os.str());
  }
  return std::max(0.0, h);
}

/// I(X; Y) = H(Y) - H(Y | X) with X ~ a, Y | X ~ P.
inline double mutual_information(const InputDistribution& a, const TransitionMatrix& P) {
  if (P.rows() != a.size()) throw invalid_parameter("mutual_information: dimension mismatch");
  const std::vector<double> py = output_marginal(a, P);
  double h_cond = 0.0;
  for (std::size_t x = 0; x < P.rows(); ++x) {
    if (a[x] == 0.0) continue;
    h_cond += a[x] * entropy(P.row(x));
  }
  return std::max(0.0, entropy(py) - h_cond);
}

/// Same quantity as Sum_x a_x D(P_x || p_Y); used as an independent route.
inline double mutual_information_kl(const InputDistribution& a, const TransitionMatrix& P) {
  if (P.rows() != a.size()) throw invalid_parameter("mutual_information_kl: dimension mismatch");
  const std::vector<double> py = output_marginal(a, P);
  double mi = 0.0;
  for (std::size_t x = 0; x < P.rows(); ++x) {
    if (a[x] == 0.0) continue;
    const auto row = P.row(x);
    double d = 0.0;
    for (std::size_t y = 0; y < row.size(); ++y) {
      if (row[y] > 0.0) d += row[y] * std::log2(row[y] / py[y]);
    }
    mi += a[x] * d;
  }
  return mi;
}

}  // namespace mcisi
