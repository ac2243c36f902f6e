#include <gtest/gtest.h>

#include <random>

#include "microdim/dims.hpp"
#include "microdim/errors.hpp"
#include "oracles.hpp"

using namespace microdim;

namespace {

FiniteMetricSpace random_points(std::mt19937_64& rng, std::size_t n, int d, PointMetric metric) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<double>> pts(n, std::vector<double>(static_cast<std::size_t>(d)));
  for (auto& p : pts)
    for (auto& v : p) v = u(rng);
  return FiniteMetricSpace::from_points(std::move(pts), metric);
}

std::vector<int> iota_levels(int lo, int hi) {
  std::vector<int> v;
  for (int i = lo; i <= hi; ++i) v.push_back(i);
  return v;
}

}  // namespace

TEST(CoveringCounts, FullCubeAndDigitSets) {
  const auto full = covering_counts(DyadicSet::full(2, 6));
  for (const auto& e : full.entries) EXPECT_EQ(e.count, BigInt(1) << (2 * e.level));
  const Word x = Word::parse("1101001110");
  const auto s = covering_counts(kx_set(x));
  for (const auto& e : s.entries)
    EXPECT_EQ(e.count, BigInt(1) << x.prefix(static_cast<std::size_t>(e.level)).ones_count());
  for (const auto& e : covering_counts(kx_set(Word::zeros(12))).entries) EXPECT_EQ(e.count, 1);
  const std::vector<int> too_deep{13};
  EXPECT_THROW(covering_counts(kx_set(Word::zeros(12)), too_deep), InvalidArgument);
  EXPECT_EQ(s.csv().substr(0, 27), "level,count,log2count_over_");
}

TEST(BoxDim, FullSquare) {
  const auto est = box_dim_estimate(covering_counts(DyadicSet::full(2, 9)));
  EXPECT_DOUBLE_EQ(est.lower, 2.0);
  EXPECT_DOUBLE_EQ(est.upper, 2.0);
}

TEST(BoxDim, ExactForDigitSets) {
  const Word x = beatty_balanced(Rational(1, 3)).prefix(600);
  const auto series = covering_counts(kx_set(x));
  for (const auto& e : series.entries) {
    if (e.level == 0) continue;
    EXPECT_NEAR(log2_big(e.count) / e.level,
                to_double(Rational(x.prefix(static_cast<std::size_t>(e.level)).ones_count(), e.level)), 1e-12);
  }
  const auto est = box_dim_estimate(series);
  EXPECT_NEAR(est.lower, 1.0 / 3, 1.0 / 400);
  EXPECT_NEAR(est.upper, 1.0 / 3, 1.0 / 400);
}

TEST(BoxDim, AlternatingBlocksSwingBetweenEnds) {
  // Blocks 4, 64, 1088, 18496: each later block is 16 times the prefix before it.
  const auto prog = SeqProgram::blocks(alternating_blocks(Rational(1, 4), Rational(3, 4), 4, 16));
  const Word x = prog.prefix(4 + 64 + 1088 + 18496);
  const auto series = covering_counts(kx_set(x));
  const int window = static_cast<int>(x.length()) - 15;
  const auto est = box_dim_estimate(series, window);
  // Mixing with the previous block costs at most (3/4 - 1/4)/17 plus boundary terms.
  EXPECT_NEAR(est.lower, 0.25, 0.04);
  EXPECT_NEAR(est.upper, 0.75, 0.04);
  EXPECT_THROW(box_dim_estimate(CountSeries{}), InvalidArgument);
}

TEST(Packing, GreedyIsMaximalAndBelowExact) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 60; ++t) {
    const auto sp = random_points(rng, 8 + rng() % 25, 2, t % 2 ? PointMetric::sup : PointMetric::euclidean);
    const double delta = std::ldexp(1.0, -static_cast<int>(1 + rng() % 4));
    const auto g = greedy_packing(sp, delta);
    EXPECT_TRUE(is_maximal_packing(sp, g, delta));
    EXPECT_LE(g.size(), exact_max_packing(sp, delta).size());
  }
}

TEST(Packing, GreedyExamples) {
  auto close = FiniteMetricSpace::from_points({{0.0}, {0.1}, {0.2}}, PointMetric::euclidean);
  EXPECT_EQ(greedy_packing(close, 0.5).size(), 1u);
  std::vector<std::vector<double>> grid;
  for (int i = 0; i <= 16; ++i) grid.push_back({i / 16.0});
  auto g = FiniteMetricSpace::from_points(grid, PointMetric::euclidean);
  EXPECT_EQ(greedy_packing(g, 0.9 / 16).size(), 17u);
  EXPECT_THROW(greedy_packing(g, 0.0), InvalidArgument);
}

TEST(Packing, ExactSearchesMatchExhaustiveOracle) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 80; ++t) {
    const std::size_t n = 4 + rng() % 12;
    const auto sp = random_points(rng, n, 1 + static_cast<int>(rng() % 2), PointMetric::euclidean);
    const double r = std::ldexp(1.0, -static_cast<int>(1 + rng() % 4));
    auto dist = [&](std::size_t i, std::size_t j) { return sp.distance(i, j); };
    const auto pk = exact_max_packing(sp, r);
    EXPECT_EQ(pk.size(), oracle::max_packing_exhaustive(n, r, dist));
    for (std::size_t a = 0; a < pk.size(); ++a)
      for (std::size_t b = a + 1; b < pk.size(); ++b) EXPECT_GT(sp.distance(pk[a], pk[b]), r);
    EXPECT_EQ(exact_min_cover(sp, r), oracle::min_cover_exhaustive(n, r, dist));
  }
}

TEST(Chain, Examples) {
  const auto single = FiniteMetricSpace::from_points({{0.5, 0.5}}, PointMetric::euclidean);
  const auto lv = iota_levels(0, 6);
  const auto p = packing_counts(single, lv);
  for (const auto& e : p.entries) EXPECT_EQ(e.count, 1);
  EXPECT_TRUE(chain_check(covering_counts(single, iota_levels(0, 7)), p));

  std::vector<std::vector<double>> grid;
  for (int i = 0; i <= 32; ++i) grid.push_back({i / 32.0});
  const auto g = FiniteMetricSpace::from_points(grid, PointMetric::euclidean);
  EXPECT_TRUE(chain_check(covering_counts(g, iota_levels(0, 7)), packing_counts(g, iota_levels(0, 6))));
  EXPECT_EQ(covering_counts(DyadicSet::full(1, 6)).entries.back().count, 64);

  // Endpoints of the level-2 intervals of K(10).
  const auto k = FiniteMetricSpace::from_points({{0.0}, {0.25}, {0.5}, {0.75}}, PointMetric::euclidean);
  EXPECT_TRUE(chain_check(covering_counts(k, iota_levels(1, 3)), packing_counts(k, iota_levels(1, 2))));
}

TEST(Chain, HoldsOnRandomSmallSets) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 30; ++t) {
    const auto sp = random_points(rng, 5 + rng() % 20, 2, t % 2 ? PointMetric::sup : PointMetric::euclidean);
    EXPECT_TRUE(chain_check(covering_counts(sp, iota_levels(0, 7)), packing_counts(sp, iota_levels(0, 6))));
  }
}

TEST(Chain, RejectsMisalignedOrInexactSeries) {
  const auto sp = FiniteMetricSpace::from_points({{0.0}, {1.0}}, PointMetric::euclidean);
  EXPECT_THROW(chain_check(covering_counts(sp, iota_levels(0, 3)), packing_counts(sp, iota_levels(0, 3))),
               InvalidArgument);
  auto n = covering_counts(sp, iota_levels(0, 4));
  n.exact = false;
  EXPECT_THROW(chain_check(n, packing_counts(sp, iota_levels(0, 3))), InvalidArgument);
}

TEST(ProductCounts, Multiply) {
  std::mt19937_64 rng(24);
  const auto levels = iota_levels(0, 10);
  for (int t = 0; t < 10; ++t) {
    std::vector<std::uint8_t> bx(10), by(10);
    for (auto& b : bx) b = static_cast<std::uint8_t>(rng() & 1U);
    for (auto& b : by) b = static_cast<std::uint8_t>(rng() & 1U);
    EXPECT_TRUE(product_inequality_check(kx_set(Word(bx)), kx_set(Word(by)), levels));
    EXPECT_TRUE(product_inequality_check(kx_set(Word(bx)), DyadicSet::full(1, 10), levels));
  }
}

TEST(Metric, MatrixValidationAndAxioms) {
  EXPECT_THROW(FiniteMetricSpace::from_matrix({{0, 1}, {2, 0}}), InvalidArgument);
  EXPECT_THROW(FiniteMetricSpace::from_matrix({{0, 1}}), InvalidArgument);
  const auto m = FiniteMetricSpace::from_matrix({{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
  EXPECT_TRUE(m.check_axioms(100, 1));
  const auto bad = FiniteMetricSpace::from_matrix({{0, 1, 5}, {1, 0, 1}, {5, 1, 0}});
  EXPECT_FALSE(bad.check_axioms(100, 1));
  std::mt19937_64 rng(25);
  const auto sp = random_points(rng, 200, 3, PointMetric::euclidean);
  EXPECT_TRUE(sp.check_axioms(2000, 7));
  for (std::size_t c = 0; c < 20; ++c) {
    for (auto i : sp.ball(c, 0.3)) EXPECT_LE(sp.distance(c, i), 0.3);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < sp.size(); ++i) inside += sp.distance(c, i) <= 0.3;
    EXPECT_EQ(sp.ball(c, 0.3).size(), inside);
  }
}
