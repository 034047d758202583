#pragma once

// Parameter sweeps over (T, l, v, sigma2) and their CSV rendering.

#include <atomic>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "mcisi/bounds.hpp"
#include "mcisi/config.hpp"

namespace mcisi {

inline constexpr std::string_view kSweepHeader =
    "T,l,v,sigma2,x_max,q1,q2,qU,i_lb1_uniform,i_lb1_opt,i_lb2_uniform,i_lb2_opt,c_dmc,i_ub,"
    "i_mf_2slot,i_mf_per_slot,baa_flags";

struct SweepPoint {
  double T, l, v, sigma2;
};

/// Grid in row order: T outermost, then l, v, sigma2.
inline std::vector<SweepPoint> sweep_grid(const RunConfig& c) {
  std::vector<SweepPoint> pts;
  for (double T : c.axis_T())
    for (double l : c.axis_l())
      for (double v : c.axis_v())
        for (double s : c.axis_sigma2()) pts.push_back({T, l, v, s});
  return pts;
}

inline std::string format_value(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

inline std::string format_flags(const std::vector<std::string>& flags) {
  if (flags.empty()) return "ok";
  std::string s;
  for (std::size_t i = 0; i < flags.size(); ++i) s += (i ? ";" : "") + flags[i];
  return s;
}

inline std::string csv_row(const SweepPoint& p, const BoundsReport& r) {
  const double cols[] = {p.T,          p.l,     p.v,           p.sigma2,       static_cast<double>(r.x_max),
                         r.q.q1,       r.q.q2,  r.q.qU,        r.i_lb1_uniform, r.i_lb1,
                         r.i_lb2_uniform, r.i_lb2, r.c_dmc,    r.i_ub,          r.i_mf,
                         r.i_mf_per_slot};
  std::string row;
  for (double c : cols) row += format_value(c) + ",";
  return row + format_flags(r.flags);
}

/// Evaluates every grid point on `jobs` worker threads. Results are in
/// grid order whatever the completion order; point i seeds its restarts
/// with seed + i.
inline std::vector<BoundsReport> run_sweep(const RunConfig& c, int jobs = 1) {
  c.validate();
  if (c.q1) throw config_error("sweeps run over physical parameters; remove channel.q1/q2");
  const std::vector<SweepPoint> pts = sweep_grid(c);
  std::vector<BoundsReport> out(pts.size());
  std::vector<std::exception_ptr> errors(pts.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < pts.size(); i = next++) {
      try {
        BoundsOptions o = c.bounds_options();
        o.seed = c.seed + i;
        out[i] = compute_bounds(AignParams(pts[i].l, pts[i].v, pts[i].sigma2), pts[i].T, c.x_max, o);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(pts.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepPoint>& pts,
                            const std::vector<BoundsReport>& reports) {
  os << kSweepHeader << '\n';
  for (std::size_t i = 0; i < pts.size(); ++i) os << csv_row(pts[i], reports[i]) << '\n';
}

}  // namespace mcisi
