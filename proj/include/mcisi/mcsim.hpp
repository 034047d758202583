#pragma once

// Per-molecule Monte-Carlo simulation of the slotted channel.
//
// truncated mode: each molecule lands in its release slot (q1), the next
//                 slot (q2) or vanishes, matching the analytic laws.
// full mode:      each molecule draws an inverse-Gaussian transit time and
//                 arrives in slot ceil(w / T) - 1 after release, however late.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "mcisi/aign.hpp"
#include "mcisi/channel.hpp"
#include "mcisi/information.hpp"

namespace mcisi {

using Rng = std::mt19937_64;

enum class SimMode { truncated, full };

struct SimConfig {
  std::optional<AignParams> aign;  ///< required in full mode
  ArrivalProbs probs;              ///< used in truncated mode
  double T = 0.0;                  ///< slot duration, full mode
  InputDistribution a = InputDistribution::uniform(1);
  std::int64_t n_slots = 1;        ///< slots kept after burn-in
  std::uint64_t seed = 1;
  SimMode mode = SimMode::truncated;
  int burn_in = 10;                ///< leading slots discarded before histogramming

  int x_max() const { return a.x_max(); }

  void validate() const {
    if (n_slots < 1) throw invalid_parameter("SimConfig.n_slots must be >= 1");
    if (burn_in < 0) throw invalid_parameter("SimConfig.burn_in must be >= 0");
    if (mode == SimMode::full) {
      if (!aign) throw invalid_parameter("full-mode simulation needs AIGN parameters");
      if (!(T > 0.0)) throw invalid_parameter("full-mode simulation needs T > 0");
    } else {
      (void)ArrivalProbs::from_probs(probs.q1, probs.q2);
    }
  }

  static SimConfig truncated(const ArrivalProbs& ap, InputDistribution a, std::int64_t n_slots,
                             std::uint64_t seed) {
    SimConfig c;
    c.probs = ap;
    c.a = std::move(a);
    c.n_slots = n_slots;
    c.seed = seed;
    c.mode = SimMode::truncated;
    if (ap.slot_T) c.T = *ap.slot_T;
    return c;
  }

  static SimConfig physical(const AignParams& p, double T, InputDistribution a, std::int64_t n_slots,
                            std::uint64_t seed, SimMode mode) {
    SimConfig c;
    c.aign = p;
    c.T = T;
    c.probs = arrival_probs(p, T);
    c.a = std::move(a);
    c.n_slots = n_slots;
    c.seed = seed;
    c.mode = mode;
    return c;
  }
};

/// Inverse-Gaussian draw by the transformation-with-multiple-roots method:
/// one normal and one uniform per draw.
template <class Urbg>
double sample_transit(const AignParams& p, Urbg& rng) {
  const double mu = p.mu();
  const double lambda = p.lambda();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double nu = normal(rng);
  const double r = mu * nu * nu / (2.0 * lambda);
  // Smaller root mu (1 + r - sqrt(r^2 + 2r)), written without cancellation.
  const double x = mu / (1.0 + r + std::sqrt(r * (r + 2.0)));
  return unif(rng) <= mu / (mu + x) ? x : mu * mu / x;
}

/// One slot of the stream. Y = X - Z + N with Z = X - same_slot the
/// molecules not received in their own slot and N = carried_in.
struct SlotRecord {
  int x = 0;
  int y = 0;
  int same_slot = 0;   ///< own molecules received in this slot
  int carried_in = 0;  ///< arrivals released in earlier slots
  int next_slot = 0;   ///< own molecules that arrive one slot later
  int lost = 0;        ///< own molecules that vanish (truncated) or arrive later than next slot (full)
};

/// Sequential slot generator; keeps only the in-flight molecules.
template <class Urbg = Rng>
class SlotStreamer {
 public:
  SlotStreamer(const SimConfig& cfg, Urbg& rng)
      : cfg_(cfg), rng_(rng), symbol_(cfg.a.vector().begin(), cfg.a.vector().end()) {
    cfg_.validate();
  }

  SlotRecord next() {
    SlotRecord rec;
    rec.x = symbol_(rng_);
    rec.carried_in = pending_next_;
    pending_next_ = 0;
    if (auto it = late_.find(slot_); it != late_.end()) {
      rec.carried_in += it->second;
      late_.erase(it);
    }
    for (int k = 0; k < rec.x; ++k) {
      const std::int64_t offset = draw_offset();
      if (offset == 0) ++rec.same_slot;
      else if (offset == 1) ++rec.next_slot;
      else {
        ++rec.lost;
        if (offset > 1) ++late_[slot_ + offset];
      }
    }
    pending_next_ = rec.next_slot;
    rec.y = rec.same_slot + rec.carried_in;
    ++slot_;
    return rec;
  }

 private:
  // Slot offset of one molecule; -1 means it vanished.
  std::int64_t draw_offset() {
    if (cfg_.mode == SimMode::truncated) {
      const double u = unif_(rng_);
      if (u < cfg_.probs.q1) return 0;
      if (u < cfg_.probs.q1 + cfg_.probs.q2) return 1;
      return -1;
    }
    const double w = sample_transit(*cfg_.aign, rng_);
    const double k = std::ceil(w / cfg_.T) - 1.0;
    if (k > 4.0e18) return -1;
    return std::max<std::int64_t>(0, static_cast<std::int64_t>(k));
  }

  SimConfig cfg_;
  Urbg& rng_;
  std::discrete_distribution<int> symbol_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::int64_t slot_ = 0;
  int pending_next_ = 0;
  std::map<std::int64_t, int> late_;
};

struct Stream {
  std::vector<SlotRecord> slots;  ///< burn-in already removed

  std::vector<int> x() const {
    std::vector<int> v;
    v.reserve(slots.size());
    for (const auto& s : slots) v.push_back(s.x);
    return v;
  }
  std::vector<int> y() const {
    std::vector<int> v;
    v.reserve(slots.size());
    for (const auto& s : slots) v.push_back(s.y);
    return v;
  }
};

/// Materializes cfg.n_slots slots after discarding cfg.burn_in.
template <class Urbg>
Stream simulate_stream(const SimConfig& cfg, Urbg& rng) {
  SlotStreamer<Urbg> gen(cfg, rng);
  for (int i = 0; i < cfg.burn_in; ++i) (void)gen.next();
  Stream s;
  s.slots.reserve(static_cast<std::size_t>(cfg.n_slots));
  for (std::int64_t i = 0; i < cfg.n_slots; ++i) s.slots.push_back(gen.next());
  return s;
}

/// Row-conditioned count table.
class CountTable {
 public:
  CountTable(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), counts_(rows * cols, 0) {}

  void add(std::size_t r, std::size_t c, std::int64_t n = 1) { counts_[r * cols_ + c] += n; }
  std::int64_t count(std::size_t r, std::size_t c) const { return counts_[r * cols_ + c]; }
  std::int64_t row_total(std::size_t r) const {
    std::int64_t t = 0;
    for (std::size_t c = 0; c < cols_; ++c) t += count(r, c);
    return t;
  }
  std::int64_t total() const {
    std::int64_t t = 0;
    for (auto v : counts_) t += v;
    return t;
  }
  double frequency(std::size_t r, std::size_t c) const {
    const auto t = row_total(r);
    return t == 0 ? 0.0 : static_cast<double>(count(r, c)) / static_cast<double>(t);
  }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  CountTable& operator+=(const CountTable& o) {
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    return *this;
  }
  CountTable& operator-=(const CountTable& o) {
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] -= o.counts_[i];
    return *this;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::int64_t> counts_;
};

/// Plug-in I(row; col) in bits from a joint count table.
inline double plugin_mutual_information(const CountTable& t) {
  const double n = static_cast<double>(t.total());
  if (n <= 0.0) return 0.0;
  std::vector<double> col(t.cols(), 0.0);
  std::vector<double> row(t.rows(), 0.0);
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) {
      row[r] += static_cast<double>(t.count(r, c));
      col[c] += static_cast<double>(t.count(r, c));
    }
  double mi = 0.0;
  for (std::size_t r = 0; r < t.rows(); ++r)
    for (std::size_t c = 0; c < t.cols(); ++c) {
      const double k = static_cast<double>(t.count(r, c));
      if (k > 0.0) mi += k / n * std::log2(k * n / (row[r] * col[c]));
    }
  return std::max(0.0, mi);
}

/// Empirical p(y_m | x_m) over a truncated-mode stream.
template <class Urbg>
CountTable empirical_isi_marginal(const SimConfig& cfg, Urbg& rng) {
  const auto n = static_cast<std::size_t>(cfg.x_max()) + 1;
  CountTable t(n, 2 * n - 1);
  SlotStreamer<Urbg> gen(cfg, rng);
  for (int i = 0; i < cfg.burn_in; ++i) (void)gen.next();
  for (std::int64_t i = 0; i < cfg.n_slots; ++i) {
    const SlotRecord r = gen.next();
    t.add(static_cast<std::size_t>(r.x), static_cast<std::size_t>(std::min<int>(r.y, 2 * cfg.x_max())));
  }
  return t;
}

struct Lb2Estimate {
  double raw = 0.0;            ///< plug-in MI, upward biased
  double jackknife = 0.0;      ///< block-jackknife bias-corrected value
  double jackknife_se = 0.0;   ///< block-jackknife standard error
  std::int64_t samples = 0;
  bool insufficient = false;   ///< fewer than 100 samples per input symbol on average
};

/// Plug-in I(X_{m-1}; Y_{m-1}, Y_m) from a truncated-mode stream.
template <class Urbg>
Lb2Estimate estimate_lb2(const SimConfig& cfg, Urbg& rng, int blocks = 20) {
  if (cfg.mode != SimMode::truncated) throw invalid_parameter("estimate_lb2 needs a truncated-mode stream");
  if (blocks < 2) throw invalid_parameter("estimate_lb2 needs at least two jackknife blocks");
  const int xm = cfg.x_max();
  const auto ny = static_cast<std::size_t>(2 * xm + 1);
  std::vector<CountTable> per_block(static_cast<std::size_t>(blocks),
                                    CountTable(static_cast<std::size_t>(xm) + 1, ny * ny));
  SlotStreamer<Urbg> gen(cfg, rng);
  for (int i = 0; i < cfg.burn_in; ++i) (void)gen.next();
  SlotRecord prev = gen.next();
  const std::int64_t pairs = cfg.n_slots - 1;
  for (std::int64_t i = 0; i < pairs; ++i) {
    const SlotRecord cur = gen.next();
    const auto b = static_cast<std::size_t>(i * blocks / std::max<std::int64_t>(pairs, 1));
    per_block[b].add(static_cast<std::size_t>(prev.x), static_cast<std::size_t>(prev.y) * ny + cur.y);
    prev = cur;
  }
  CountTable all(static_cast<std::size_t>(xm) + 1, ny * ny);
  for (const auto& t : per_block) all += t;

  Lb2Estimate e;
  e.samples = all.total();
  e.raw = plugin_mutual_information(all);
  double mean_loo = 0.0;
  std::vector<double> loo(per_block.size());
  for (std::size_t b = 0; b < per_block.size(); ++b) {
    CountTable rest = all;
    rest -= per_block[b];
    loo[b] = plugin_mutual_information(rest);
    mean_loo += loo[b];
  }
  mean_loo /= static_cast<double>(blocks);
  e.jackknife = blocks * e.raw - (blocks - 1) * mean_loo;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean_loo) * (v - mean_loo);
  e.jackknife_se = std::sqrt((blocks - 1.0) / blocks * ss);
  e.insufficient = static_cast<double>(e.samples) / (xm + 1) < 100.0;
  return e;
}

struct TruncationReport {
  double late_fraction = 0.0;      ///< molecules arriving after the next slot
  double analytic_late = 0.0;      ///< 1 - F_W(2T)
  std::int64_t molecules = 0;
  std::vector<double> row_tv;      ///< TV distance of full vs truncated p(y | x), per x
  double max_tv = 0.0;
};

/// Compares a full-mode stream against its two-slot truncation.
template <class Urbg>
TruncationReport truncation_error(const SimConfig& cfg, Urbg& rng) {
  if (cfg.mode != SimMode::full) throw invalid_parameter("truncation_error needs a full-mode config");
  cfg.validate();
  const int xm = cfg.x_max();
  const auto n = static_cast<std::size_t>(xm) + 1;
  // Full mode can pile up more than 2 x_max arrivals; widen the table.
  const std::size_t ncol = 4 * n;

  TruncationReport rep;
  rep.analytic_late = truncation_mass(cfg.probs);
  CountTable full(n, ncol), trunc(n, ncol);
  std::int64_t late = 0;
  {
    SlotStreamer<Urbg> gen(cfg, rng);
    for (int i = 0; i < cfg.burn_in; ++i) (void)gen.next();
    for (std::int64_t i = 0; i < cfg.n_slots; ++i) {
      const SlotRecord r = gen.next();
      rep.molecules += r.x;
      late += r.lost;
      full.add(static_cast<std::size_t>(r.x), std::min<std::size_t>(static_cast<std::size_t>(r.y), ncol - 1));
    }
  }
  {
    SimConfig tc = cfg;
    tc.mode = SimMode::truncated;
    SlotStreamer<Urbg> gen(tc, rng);
    for (int i = 0; i < tc.burn_in; ++i) (void)gen.next();
    for (std::int64_t i = 0; i < tc.n_slots; ++i) {
      const SlotRecord r = gen.next();
      trunc.add(static_cast<std::size_t>(r.x), std::min<std::size_t>(static_cast<std::size_t>(r.y), ncol - 1));
    }
  }
  rep.late_fraction = rep.molecules == 0 ? 0.0 : static_cast<double>(late) / static_cast<double>(rep.molecules);
  rep.row_tv.assign(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    double tv = 0.0;
    for (std::size_t c = 0; c < ncol; ++c) tv += std::abs(full.frequency(x, c) - trunc.frequency(x, c));
    rep.row_tv[x] = 0.5 * tv;
    rep.max_tv = std::max(rep.max_tv, rep.row_tv[x]);
  }
  return rep;
}

}  // namespace mcisi
