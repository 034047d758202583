#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "mcisi/bounds.hpp"
#include "mcisi/mcsim.hpp"
#include "mcisi/validation.hpp"

using namespace mcisi;

TEST(SampleTransit, EmpiricalCdfMatchesClosedForm) {
  for (const AignParams& p : {AignParams(1e-2, 1, 1), AignParams(1e-2, 100, 1), AignParams(1, 1, 1e-3)}) {
    Rng rng(99);
    const int n = 200000;
    std::vector<double> w(n);
    for (double& x : w) x = sample_transit(p, rng);
    std::sort(w.begin(), w.end());
    ASSERT_GT(w.front(), 0.0);
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const double t = f * p.mu();
      const double F = transit_time_cdf(p, t);
      const double emp = static_cast<double>(std::upper_bound(w.begin(), w.end(), t) - w.begin()) / n;
      EXPECT_NEAR(emp, F, 4.0 * std::sqrt(F * (1 - F) / n) + 1.0 / n) << "mu=" << p.mu() << " t=" << t;
    }
  }
}

TEST(SampleTransit, StableForSharpLaws) {
  // lambda / mu = 1e10: the draws hug mu without NaN or zero.
  const AignParams p(1.0, 1.0, 1e-10);
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double w = sample_transit(p, rng);
    ASSERT_TRUE(std::isfinite(w));
    ASSERT_GT(w, 0.0);
    ASSERT_NEAR(w, 1.0, 1e-3);
  }
}

TEST(SimConfig, Validation) {
  auto c = SimConfig::truncated(ArrivalProbs::from_probs(0.6, 0.3), InputDistribution::uniform(2), 0, 1);
  EXPECT_THROW(c.validate(), invalid_parameter);
  c.n_slots = 10;
  EXPECT_NO_THROW(c.validate());
  c.mode = SimMode::full;
  EXPECT_THROW(c.validate(), invalid_parameter);
}

TEST(SlotStream, ConservesMolecules) {
  const auto cfg = SimConfig::truncated(ArrivalProbs::from_probs(0.6, 0.3), InputDistribution::uniform(3), 5000, 4);
  Rng rng(cfg.seed);
  const Stream s = simulate_stream(cfg, rng);
  ASSERT_EQ(s.slots.size(), 5000u);
  for (std::size_t i = 0; i < s.slots.size(); ++i) {
    const auto& r = s.slots[i];
    ASSERT_EQ(r.same_slot + r.next_slot + r.lost, r.x);
    ASSERT_EQ(r.y, r.same_slot + r.carried_in);
    if (i > 0) {
      ASSERT_EQ(r.carried_in, s.slots[i - 1].next_slot);
    }
  }
}

TEST(SlotStream, SeedReproducible) {
  const auto cfg = SimConfig::truncated(ArrivalProbs::from_probs(0.5, 0.25), InputDistribution::uniform(4), 2000, 7);
  Rng r1(7), r2(7), r3(8);
  EXPECT_EQ(simulate_stream(cfg, r1).y(), simulate_stream(cfg, r2).y());
  Rng r4(7);
  EXPECT_NE(simulate_stream(cfg, r4).y(), simulate_stream(cfg, r3).y());
}

TEST(SlotStream, FullModeOffsetsFollowSlotProbabilities) {
  const AignParams p(1e-2, 1.0, 1.0);
  const double T = 3e-3;
  auto cfg = SimConfig::physical(p, T, InputDistribution::point_mass(1, 1), 200000, 3, SimMode::full);
  Rng rng(3);
  const Stream s = simulate_stream(cfg, rng);
  double same = 0, next = 0;
  for (const auto& r : s.slots) {
    same += r.same_slot;
    next += r.next_slot;
  }
  const double n = static_cast<double>(s.slots.size());
  const auto ap = arrival_probs(p, T);
  EXPECT_NEAR(same / n, ap.q1, 4 * std::sqrt(ap.q1 * (1 - ap.q1) / n));
  EXPECT_NEAR(next / n, ap.q2, 4 * std::sqrt(ap.q2 * (1 - ap.q2) / n));
}

TEST(EmpiricalIsiMarginal, WithinFourStandardErrors) {
  const auto ap = ArrivalProbs::from_probs(0.6, 0.3);
  const auto a = InputDistribution::uniform(2);
  const auto cfg = SimConfig::truncated(ap, a, 300000, 21);
  Rng rng(cfg.seed);
  const CountTable t = empirical_isi_marginal(cfg, rng);
  const auto P = isi_marginal_transition(a, ap, 2);
  for (std::size_t x = 0; x < t.rows(); ++x) {
    const double n = static_cast<double>(t.row_total(x));
    for (std::size_t y = 0; y < t.cols(); ++y) {
      const double p = P(x, y);
      EXPECT_NEAR(t.frequency(x, y), p, 4 * std::sqrt(p * (1 - p) / n) + 0.5 / n);
    }
  }
}

TEST(PluginMutualInformation, IndependentAndDeterministic) {
  CountTable indep(2, 2);
  indep.add(0, 0, 100);
  indep.add(0, 1, 100);
  indep.add(1, 0, 100);
  indep.add(1, 1, 100);
  EXPECT_NEAR(plugin_mutual_information(indep), 0.0, 1e-15);
  CountTable copy(2, 2);
  copy.add(0, 0, 50);
  copy.add(1, 1, 50);
  EXPECT_NEAR(plugin_mutual_information(copy), 1.0, 1e-15);
  EXPECT_EQ(plugin_mutual_information(CountTable(2, 2)), 0.0);
}

TEST(EstimateLb2, CloseToAnalytic) {
  const auto ap = ArrivalProbs::from_probs(0.6, 0.3);
  const auto a = InputDistribution::uniform(2);
  const auto cfg = SimConfig::truncated(ap, a, 1000000, 5);
  Rng rng(cfg.seed);
  const Lb2Estimate e = estimate_lb2(cfg, rng);
  const double exact = lower_bound_2(a, ap, 2);
  EXPECT_FALSE(e.insufficient);
  EXPECT_GT(e.jackknife_se, 0.0);
  EXPECT_NEAR(e.jackknife, exact, 4 * e.jackknife_se + 1e-3);
  EXPECT_LT(std::abs(e.jackknife - exact), std::abs(e.raw - exact) + 4 * e.jackknife_se);
}

TEST(EstimateLb2, FlagsTinySamples) {
  const auto cfg = SimConfig::truncated(ArrivalProbs::from_probs(0.6, 0.3), InputDistribution::uniform(2), 50, 1);
  Rng rng(1);
  EXPECT_TRUE(estimate_lb2(cfg, rng).insufficient);
}

TEST(TruncationError, LateFractionMatchesTail) {
  const AignParams p(1e-2, 1.0, 1.0);
  const double T = 1e-3;
  const auto cfg = SimConfig::physical(p, T, InputDistribution::uniform(3), 100000, 12, SimMode::full);
  Rng rng(12);
  const auto rep = truncation_error(cfg, rng);
  const double n = static_cast<double>(rep.molecules);
  EXPECT_NEAR(rep.late_fraction, rep.analytic_late, 4 * std::sqrt(rep.analytic_late * (1 - rep.analytic_late) / n));
  EXPECT_GT(rep.max_tv, 0.0);
  EXPECT_LE(rep.max_tv, 1.0);
}

TEST(Validation, PassesOnMatchedLawsAndFailsOnPerturbedOnes) {
  const auto ap = ArrivalProbs::from_probs(0.6, 0.3);
  const auto a = InputDistribution::uniform(2);
  const auto good = run_validation(ap, ap, a, 1000000, 1);
  EXPECT_TRUE(good.pass());
  EXPECT_EQ(good.laws.size(), 7u);
  for (const auto& l : good.laws) EXPECT_GT(l.rows, 0) << l.name;
  const auto bad = run_validation(ap, ArrivalProbs::from_probs(0.65, 0.3), a, 1000000, 1);
  EXPECT_FALSE(bad.pass());
}

TEST(SampleTransit, MomentsAndKolmogorovSmirnov) {
  const AignParams p(1e-2, 1.0, 1.0);
  const double mu = p.mu(), lam = p.lambda();
  Rng rng(2718);
  const int n = 1000000;
  std::vector<double> w(n);
  double s = 0.0;
  for (double& x : w) {
    x = sample_transit(p, rng);
    s += x;
  }
  const double mean = s / n;
  double ss = 0.0;
  for (double x : w) ss += (x - mean) * (x - mean);
  const double var = ss / (n - 1);
  const double true_var = mu * mu * mu / lam;
  EXPECT_NEAR(mean, mu, 3.0 * std::sqrt(true_var / n));
  // Fourth central moment of the inverse Gaussian.
  const double m4 = 15.0 * std::pow(mu, 7) / std::pow(lam, 3) + 3.0 * std::pow(mu, 6) / (lam * lam);
  EXPECT_NEAR(var, true_var, 3.0 * std::sqrt((m4 - true_var * true_var) / n));
  std::sort(w.begin(), w.end());
  double ks = 0.0;
  for (int i = 0; i < n; i += 97) {
    const double F = transit_time_cdf(p, w[i]);
    ks = std::max({ks, std::abs(F - static_cast<double>(i) / n), std::abs(F - static_cast<double>(i + 1) / n)});
  }
  EXPECT_LT(ks, 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST(SlotStream, DegenerateInputs) {
  Rng rng(1);
  const auto zero = SimConfig::truncated(ArrivalProbs::from_probs(0.6, 0.3), InputDistribution::point_mass(3, 0), 500, 1);
  for (int y : simulate_stream(zero, rng).y()) ASSERT_EQ(y, 0);
  const auto perfect = SimConfig::truncated(ArrivalProbs::from_probs(1.0, 0.0), InputDistribution::uniform(3), 500, 1);
  const Stream s = simulate_stream(perfect, rng);
  EXPECT_EQ(s.x(), s.y());
}

TEST(EstimateLb2, DegenerateChannels) {
  const auto a = InputDistribution({0.1, 0.2, 0.3, 0.4});
  Rng rng(6);
  const auto perfect =
      estimate_lb2(SimConfig::truncated(ArrivalProbs::from_probs(1.0, 0.0), a, 200000, 6), rng);
  EXPECT_NEAR(perfect.raw, entropy(a.probs()), 5e-3);
  const auto dead = estimate_lb2(SimConfig::truncated(ArrivalProbs::from_probs(0.0, 0.0), a, 200000, 6), rng);
  EXPECT_NEAR(dead.raw, 0.0, 1e-12);
}

TEST(TruncationError, LongSlotsLoseNothing) {
  const AignParams p(1e-2, 1.0, 1.0);
  auto cfg = SimConfig::physical(p, 10.0, InputDistribution::uniform(2), 20000, 2, SimMode::full);
  Rng rng(2);
  const auto rep = truncation_error(cfg, rng);
  EXPECT_LT(rep.late_fraction, 1e-3);
  EXPECT_LT(rep.analytic_late, 1e-3);
}

TEST(TruncationError, ModerateSlotReport) {
  const AignParams p(1e-2, 1.0, 1.0);
  const double T = 5e-3;
  auto cfg = SimConfig::physical(p, T, InputDistribution::uniform(3), 200000, 31, SimMode::full);
  Rng rng(31);
  const auto rep = truncation_error(cfg, rng);
  const double tail = 1.0 - transit_time_cdf(p, 2 * T);
  EXPECT_NEAR(rep.analytic_late, tail, 1e-15);
  EXPECT_NEAR(rep.late_fraction, tail, 4 * std::sqrt(tail * (1 - tail) / static_cast<double>(rep.molecules)));
  EXPECT_EQ(rep.row_tv.size(), 4u);
}
