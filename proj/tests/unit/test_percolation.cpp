#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "microdim/errors.hpp"
#include "microdim/percolation.hpp"
#include "oracles.hpp"

using namespace microdim;

TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (Philox4x32{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (Philox4x32{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (Philox4x32{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Field, VariatesAreKeyedAndInRange) {
  const PercField f(7);
  const CubeIdx c{3, {5, 2}};
  EXPECT_EQ(f.variate(1, c), f.variate(1, c));
  EXPECT_NE(f.variate(1, c), f.variate(2, c));
  EXPECT_NE(f.variate(1, c), PercField(8).variate(1, c));
  EXPECT_EQ(cube_from_path(cube_path(c), 3, 2), c);
  double sum = 0;
  for (std::uint64_t p = 0; p < 20000; ++p) {
    const double v = f.variate_at(0, 14, p);
    ASSERT_GE(v, 0.0);
    ASSERT_LT(v, 1.0);
    sum += v;
  }
  EXPECT_NEAR(sum / 20000, 0.5, 0.01);
}

TEST(Schedule, LookupAndValidation) {
  const RetentionSchedule s({Rational(1, 2), Rational(1)}, Rational(1, 4));
  EXPECT_EQ(s.alpha(1), Rational(1, 2));
  EXPECT_EQ(s.alpha(2), Rational(1));
  EXPECT_EQ(s.alpha(9), Rational(1, 4));
  EXPECT_DOUBLE_EQ(s.retention(2), 0.5);
  EXPECT_EQ(RetentionSchedule({Rational(1, 3), Rational(2, 3)}).alpha(5), Rational(2, 3));
  EXPECT_THROW(s.alpha(0), InvalidArgument);
  EXPECT_THROW(RetentionSchedule::constant(Rational(3)).validate(2), InvalidArgument);
  EXPECT_THROW(RetentionSchedule::constant(Rational(-1)).validate(2), InvalidArgument);
  EXPECT_NO_THROW(RetentionSchedule::constant(Rational(2)).validate(2));
}

TEST(Sample, ZeroAlphaKeepsEverything) {
  const PercField f(1);
  const auto s = sample(RetentionSchedule::constant(Rational(0)), f, 0, 6, 2);
  EXPECT_EQ(s.survivors, DyadicSet::full(2, 6));
  for (int n = 0; n <= 6; ++n) EXPECT_EQ(s.level_counts[static_cast<std::size_t>(n)], std::uint64_t{1} << (2 * n));
  EXPECT_THROW(sample(RetentionSchedule::constant(Rational(0)), f, 0, 33, 2), InvalidArgument);
}

TEST(Sample, DeterministicAndRooted) {
  const PercField f(2);
  const auto sched = RetentionSchedule::constant(Rational(1, 2));
  const auto a = sample(sched, f, 5, 12, 1);
  const auto b = sample(sched, f, 5, 12, 1);
  EXPECT_EQ(a.survivors, b.survivors);
  EXPECT_EQ(a.level_counts, b.level_counts);
  const CubeIdx root{2, {1}};
  const auto r = sample(sched, f, 5, 6, 1, root);
  EXPECT_EQ(r.survivors.depth(), 8);
  for (const auto& c : r.survivors.leaves()) EXPECT_EQ(c.coords[0] >> 6, 1u);
}

TEST(Sample, MeanCountsFollowRetention) {
  const PercField f(3);
  const auto sched = RetentionSchedule::constant(Rational(1, 2));
  const int depth = 10;
  const int trials = 4000;
  std::vector<double> sum(depth + 1), sq(depth + 1);
  for (int t = 0; t < trials; ++t) {
    const auto s = sample(sched, f, static_cast<std::uint32_t>(t), depth, 1);
    for (int n = 0; n <= depth; ++n) {
      const auto v = static_cast<double>(s.level_counts[static_cast<std::size_t>(n)]);
      sum[static_cast<std::size_t>(n)] += v;
      sq[static_cast<std::size_t>(n)] += v * v;
    }
  }
  for (int n = 1; n <= depth; ++n) {
    const double mean = sum[static_cast<std::size_t>(n)] / trials;
    const double var = sq[static_cast<std::size_t>(n)] / trials - mean * mean;
    const double se = std::sqrt(var / trials);
    EXPECT_NEAR(mean, std::exp2(n / 2.0), 4 * se) << "n=" << n;
  }
}

TEST(Coupling, LowerAlphasKeepSupersets) {
  const PercField f(4);
  std::mt19937_64 rng(41);
  for (int t = 0; t < 100; ++t) {
    std::vector<Rational> lo, hi;
    for (int n = 0; n < 10; ++n) {
      const Rational a(static_cast<long long>(rng() % 9), 4);
      lo.push_back(a);
      hi.push_back(std::min(Rational(2), a + Rational(static_cast<long long>(rng() % 3), 4)));
    }
    const auto [big, small] = coupled_pair(RetentionSchedule(lo), RetentionSchedule(hi), f, static_cast<std::uint32_t>(t), 10, 2);
    EXPECT_TRUE(is_subset(small.survivors, big.survivors));
    for (int n = 0; n <= 10; ++n) EXPECT_LE(small.level_counts[static_cast<std::size_t>(n)], big.level_counts[static_cast<std::size_t>(n)]);
  }
}

TEST(Extinction, ClosedFormsAndIteration) {
  EXPECT_DOUBLE_EQ(gw_extinction(1.0, 2), 0.0);
  EXPECT_DOUBLE_EQ(gw_extinction(0.5, 2), 1.0);
  EXPECT_DOUBLE_EQ(gw_extinction(0.2, 4), 1.0);
  const double p = std::sqrt(0.5);
  EXPECT_NEAR(gw_extinction(p, 2), std::pow((1 - p) / p, 2), 1e-12);
  EXPECT_NEAR(gw_extinction(p, 2), 0.1716, 1e-4);
  for (auto [q, c] : std::vector<std::pair<double, int>>{{0.4, 4}, {0.3, 8}, {0.9, 3}, {0.6, 2}}) {
    EXPECT_NEAR(gw_extinction(q, c), oracle::extinction_by_iteration(q, c), 1e-9) << q << " " << c;
  }
}

TEST(Wilson, Bounds) {
  EXPECT_DOUBLE_EQ(wilson_low(0, 100), 0.0);
  EXPECT_DOUBLE_EQ(wilson_high(100, 100), 1.0);
  EXPECT_NEAR(wilson_low(30, 100) + wilson_high(70, 100), 1.0, 1e-12);
  EXPECT_LT(wilson_low(50, 100), 0.5);
  EXPECT_GT(wilson_high(50, 100), 0.5);
}

TEST(SampleIn, RestrictsToKAndCompletesDeadEnds) {
  const PercField f(5);
  const DyadicSet k = kx_set(Word::parse("1101101111"));
  const auto all = sample_in(k, RetentionSchedule::constant(Rational(0)), f, 0, 10);
  EXPECT_EQ(all.survivors, k);
  EXPECT_TRUE(all.completions.empty());
  for (std::uint32_t copy = 0; copy < 50; ++copy) {
    const auto s = sample_in(k, RetentionSchedule::constant(Rational(3, 4)), f, copy, 10);
    EXPECT_TRUE(is_subset(s.survivors, k) || s.survivors.is_empty());
    for (const auto& c : s.completions) {
      EXPECT_EQ(c.cube.level, 10);
      EXPECT_TRUE(k.contains(c.cube));
      EXPECT_GE(c.died_level, 0);
      EXPECT_FALSE(s.survivors.contains(c.cube));
    }
    const auto w = s.with_completions();
    EXPECT_TRUE(is_subset(w, k));
  }
}

TEST(Hawkes, SurvivalDecreasesAndThreadsAgree) {
  const PercField f(6);
  const DyadicSet k = DyadicSet::full(1, 12);
  const auto r1 = hawkes_experiment(k, Rational(1, 2), {4, 8, 12}, 2000, f, 0, 1);
  const auto r4 = hawkes_experiment(k, Rational(1, 2), {4, 8, 12}, 2000, f, 0, 4);
  EXPECT_TRUE(r1.survival_nonincreasing);
  ASSERT_EQ(r1.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r1.rows[i].surviving, r4.rows[i].surviving);
    EXPECT_DOUBLE_EQ(r1.rows[i].mean_count, r4.rows[i].mean_count);
    EXPECT_LE(r1.rows[i].ci_low, r1.rows[i].survival);
    EXPECT_GE(r1.rows[i].ci_high, r1.rows[i].survival);
  }
  // Survival to depth 12 sits a little above the limit 1 - 0.1716.
  EXPECT_GT(r1.rows[2].survival, 0.79);
  EXPECT_LT(r1.rows[2].survival, 0.90);
  EXPECT_EQ(r1.csv().substr(0, r1.csv().find('\n')), "depth,survival_frac,ci_low,ci_high,cond_slope");
  EXPECT_THROW(hawkes_experiment(k, Rational(1), {4}, 10, f), InvalidArgument);
  EXPECT_THROW(hawkes_experiment(k, Rational(0), {4}, 10, f), InvalidArgument);
}

TEST(Hawkes, ShallowKIsFullBelowItsDepth) {
  const PercField f(6);
  const auto deep = hawkes_experiment(DyadicSet::full(1, 12), Rational(1, 2), {4, 12}, 300, f);
  for (int depth : {0, 3}) {
    const auto shallow = hawkes_experiment(DyadicSet::full(1, depth), Rational(1, 2), {4, 12}, 300, f);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(shallow.rows[i].surviving, deep.rows[i].surviving) << depth;
  }
  const auto a = sample(RetentionSchedule::constant(Rational(1, 2)), f, 3, 10, 1);
  const auto b = sample_in(DyadicSet::full(1, 0), RetentionSchedule::constant(Rational(1, 2)), f, 3, 10);
  EXPECT_EQ(a.survivors, b.survivors);
}

TEST(GammaStar, ConfigIsNestedAndValid) {
  const PercField f(7);
  const DyadicSet k = kx_set(beatty_balanced(Rational(1, 2)).prefix(16));
  const auto cfg = make_gamma_star_config(k, Rational(1, 2), 4, f);
  EXPECT_NO_THROW(cfg.validate());
  ASSERT_EQ(cfg.k_max(), 4);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(cfg.cubes[static_cast<std::size_t>(i)].level, i + 1);
    EXPECT_TRUE(k.contains(cfg.cubes[static_cast<std::size_t>(i)]));
    EXPECT_GE(cfg.copies[static_cast<std::size_t>(i)], 1);
    if (i > 0) EXPECT_EQ(cfg.cubes[static_cast<std::size_t>(i)].parent(), cfg.cubes[static_cast<std::size_t>(i) - 1]);
  }
  EXPECT_EQ(cfg.anchor.level, 16);
  EXPECT_TRUE(k.contains(cfg.anchor));
  EXPECT_EQ(cfg.to_json().at("levels").size(), 4u);
}

TEST(GammaStar, TargetAtGammaKeepsFirstCube) {
  const PercField f(8);
  const DyadicSet k = DyadicSet::full(1, 10);
  const VarphiMap phi(TargetSpec::parse("set:1/2"));
  const auto cfg = make_gamma_star_config(k, Rational(1, 2), 3, f);
  const auto s = gamma_star(cfg, k, Word::zeros(10), phi, f, 10);
  // alpha = 0 keeps all of K inside Q_1 = [0, 1/2].
  EXPECT_EQ(s.survivors.leaf_count(), 512);
  for (const auto& c : s.survivors.leaves()) EXPECT_LT(c.coords[0], 512u);
  EXPECT_EQ(s.with_completions(), s.survivors);
  EXPECT_THROW(gamma_star(cfg, k, Word::zeros(10), phi, f, 3), InvalidArgument);
}

TEST(GammaStar, ContinuousInTheCode) {
  const PercField f(9);
  const DyadicSet k = DyadicSet::full(1, 14);
  const VarphiMap phi(TargetSpec::parse("interval:0,1/2"));
  const auto cfg = make_gamma_star_config(k, Rational(1, 2), 3, f);
  std::mt19937_64 rng(42);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::uint8_t> a(14), b(14);
    for (auto& v : a) v = static_cast<std::uint8_t>(rng() & 1U);
    const int agree = 2 + static_cast<int>(rng() % 8);
    for (int i = 0; i < 14; ++i) b[static_cast<std::size_t>(i)] = i < agree ? a[static_cast<std::size_t>(i)] : static_cast<std::uint8_t>(rng() & 1U);
    const auto sa = gamma_star(cfg, k, Word(a), phi, f, 14).with_completions();
    const auto sb = gamma_star(cfg, k, Word(b), phi, f, 14).with_completions();
    EXPECT_LE(hausdorff_sup_exact(sa, sb), Rational(1) / Rational(BigInt(1) << (agree + 1))) << "agree=" << agree;
  }
}
