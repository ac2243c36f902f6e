#include <gtest/gtest.h>

#include <random>

#include "microdim/dyadic.hpp"
#include "microdim/errors.hpp"
#include "oracles.hpp"

using namespace microdim;

namespace {

Word random_word(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
  return Word(bits);
}

std::vector<std::uint64_t> leaf_coords(const DyadicSet& a) {
  std::vector<std::uint64_t> out;
  for (const auto& c : a.leaves()) out.push_back(c.coords[0]);
  return out;
}

std::vector<oracle::Interval> intervals_of(const DyadicSet& a) {
  return oracle::merge_cells(leaf_coords(a), a.depth());
}

Rational pow2(int e) { return e >= 0 ? Rational(BigInt(1) << e) : Rational(1) / Rational(BigInt(1) << -e); }

}  // namespace

TEST(KxSet, Examples) {
  EXPECT_EQ(kx_set(Word::ones(8)), DyadicSet::full(1, 8));
  const auto z = kx_set(Word::zeros(8));
  EXPECT_EQ(z.leaf_count(), 1);
  EXPECT_TRUE(z.contains(CubeIdx{8, {0}}));
  EXPECT_EQ(kx_set(Word::parse("101101")).leaf_count(), 16);
}

TEST(KxSet, LeavesMatchDigitEnumeration) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 60; ++t) {
    const Word x = random_word(rng, 1 + rng() % 14);
    EXPECT_EQ(leaf_coords(kx_set(x)), oracle::kx_left_endpoints(x)) << x.str();
  }
}

TEST(KxSet, LevelCountsArePowersOfPrefixWeights) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 30; ++t) {
    const Word x = random_word(rng, 40);
    const auto counts = kx_set(x).level_counts();
    for (std::size_t m = 0; m <= 40; ++m) {
      EXPECT_EQ(counts[m], BigInt(1) << static_cast<unsigned>(x.prefix(m).ones_count()));
    }
  }
}

TEST(KxSet, DeepBeattyStaysSmall) {
  const Word x = beatty_balanced(Rational(1, 3)).prefix(2048);
  const auto k = kx_set(x);
  EXPECT_EQ(k.depth(), 2048);
  EXPECT_EQ(k.leaf_count(), BigInt(1) << static_cast<unsigned>(x.ones_count()));
}

TEST(Product, SquaresOfSmallSets) {
  const auto a = kx_set(Word::parse("10"));
  const auto sq = product(a, a);
  EXPECT_EQ(sq.dim(), 2);
  std::vector<CubeIdx> expect{{2, {0, 0}}, {2, {0, 2}}, {2, {2, 0}}, {2, {2, 2}}};
  EXPECT_EQ(sq.leaves(), expect);
  EXPECT_EQ(product(DyadicSet::full(1, 5), DyadicSet::full(1, 5)), DyadicSet::full(2, 5));
  EXPECT_THROW(product(DyadicSet::full(1, 3), DyadicSet::full(1, 4)), InvalidArgument);
}

TEST(Product, LeafCountsMultiply) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto a = kx_set(random_word(rng, 10));
    const auto b = kx_set(random_word(rng, 10));
    EXPECT_EQ(product(a, b).leaf_count(), a.leaf_count() * b.leaf_count());
  }
}

TEST(SetOps, UnionIntersectionSubset) {
  const auto a = kx_set(Word::parse("110"));
  const auto b = kx_set(Word::parse("011"));
  const auto u = set_union(a, b);
  const auto i = set_intersection(a, b);
  EXPECT_TRUE(is_subset(a, u));
  EXPECT_TRUE(is_subset(i, a));
  EXPECT_TRUE(is_subset(i, b));
  EXPECT_EQ(u.leaf_count() + i.leaf_count(), a.leaf_count() + b.leaf_count());
  for (int m = 0; m <= 3; ++m) EXPECT_LE(a.count(m), u.count(m));
}

TEST(Cubes, ContainsAndTruncate) {
  const auto a = kx_set(Word::parse("1011"));
  EXPECT_TRUE(a.contains(CubeIdx{1, {1}}));
  EXPECT_FALSE(a.contains(CubeIdx{2, {1}}));
  EXPECT_FALSE(a.contains(CubeIdx{2, {9}}));
  EXPECT_EQ(a.truncate(2), kx_set(Word::parse("10")));
  // Every leaf's ancestors are alive.
  for (const auto& c : a.leaves()) {
    CubeIdx p = c;
    while (p.level > 0) {
      p = p.parent();
      EXPECT_TRUE(a.contains(p));
    }
  }
}

TEST(Hausdorff, Examples) {
  const auto full = DyadicSet::full(1, 3);
  EXPECT_EQ(hausdorff_sup_exact(full, full), 0);
  const auto half = DyadicSet::from_leaves(1, 3, std::vector<CubeIdx>{{3, {0}}, {3, {1}}, {3, {2}}, {3, {3}}});
  EXPECT_EQ(hausdorff_sup_exact(full, half), Rational(1, 2));
  EXPECT_DOUBLE_EQ(hausdorff_distance(full, half, Metric::euclidean), 0.5);
  EXPECT_THROW(hausdorff_sup_exact(full, DyadicSet::empty(1, 3)), InvalidArgument);
}

TEST(Hausdorff, MatchesIntervalOracleInOneDimension) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 300; ++t) {
    const int n = 1 + static_cast<int>(rng() % 9);
    std::vector<CubeIdx> la, lb;
    for (std::uint64_t c = 0; c < (1U << n); ++c) {
      if (rng() % 3 == 0) la.push_back({n, {c}});
      if (rng() % 3 == 0) lb.push_back({n, {c}});
    }
    if (la.empty() || lb.empty()) continue;
    const auto a = DyadicSet::from_leaves(1, n, la);
    const auto b = DyadicSet::from_leaves(1, n, lb);
    EXPECT_EQ(hausdorff_sup_exact(a, b), oracle::hausdorff_intervals(intervals_of(a), intervals_of(b)));
  }
}

TEST(Hausdorff, ContractionUnderFirstDisagreement) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 300; ++t) {
    const Word x = random_word(rng, 16);
    Word y = random_word(rng, 16);
    std::size_t first = 16;
    for (std::size_t i = 0; i < 16; ++i)
      if (x[i] != y[i]) {
        first = i;
        break;
      }
    const Rational d = hausdorff_sup_exact(kx_set(x), kx_set(y));
    if (first == 16) {
      EXPECT_EQ(d, 0);
    } else {
      EXPECT_LE(d, pow2(-static_cast<int>(first)));
    }
  }
}

TEST(Hausdorff, MetricAxiomsOnTriples) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 100; ++t) {
    const auto a = kx_set(random_word(rng, 8));
    const auto b = kx_set(random_word(rng, 8));
    const auto c = kx_set(random_word(rng, 8));
    const Rational ab = hausdorff_sup_exact(a, b);
    EXPECT_EQ(ab, hausdorff_sup_exact(b, a));
    EXPECT_LE(hausdorff_sup_exact(a, c), ab + hausdorff_sup_exact(b, c));
    EXPECT_EQ(ab == 0, a == b);
  }
}

TEST(Hausdorff, EuclideanBetweenSupAndScaledSup) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 40; ++t) {
    const auto a = product(kx_set(random_word(rng, 6)), kx_set(random_word(rng, 6)));
    const auto b = product(kx_set(random_word(rng, 6)), kx_set(random_word(rng, 6)));
    const double s = to_double(hausdorff_sup_exact(a, b));
    // The search returns a lower bound within the tolerance of the true distance.
    const double e = hausdorff_distance(a, b, Metric::euclidean, 1e-5);
    EXPECT_GE(e + 1e-5, s);
    EXPECT_LE(e, std::sqrt(2.0) * s + 1e-12);
    EXPECT_NEAR(e, hausdorff_distance(b, a, Metric::euclidean, 1e-5), 2e-5);
  }
}

TEST(Zoom, IdentityAndShift) {
  std::mt19937_64 rng(8);
  const std::vector<Rational> zero{Rational(0)};
  for (int t = 0; t < 30; ++t) {
    const Word x = random_word(rng, 12);
    const auto k = kx_set(x);
    EXPECT_EQ(zoom(k, 0, zero).set, k);
    EXPECT_EQ(zoom(k, 1, zero).set, kx_set(x.suffix_from(1))) << x.str();
  }
}

TEST(Zoom, ComposesAffinely) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 40; ++t) {
    const auto k = product(kx_set(random_word(rng, 10)), DyadicSet::full(1, 10));
    const int m1 = 1 + static_cast<int>(rng() % 3);
    const int m2 = 1 + static_cast<int>(rng() % 3);
    const std::vector<Rational> u1{Rational(-static_cast<int>(rng() % 4), 4), Rational(-static_cast<int>(rng() % 2), 2)};
    const std::vector<Rational> u2{Rational(-static_cast<int>(rng() % 2), 2), Rational(0)};
    ZoomResult first;
    try {
      first = zoom(k, m1, u1);
    } catch (const InvalidArgument&) {
      continue;
    }
    std::vector<Rational> u{pow2(m2) * u1[0] + u2[0], pow2(m2) * u1[1] + u2[1]};
    std::optional<DyadicSet> twice, once;
    try {
      twice = zoom(first.set, m2, u2).set;
    } catch (const InvalidArgument&) {
    }
    try {
      once = zoom(k, m1 + m2, u).set;
    } catch (const InvalidArgument&) {
    }
    EXPECT_EQ(twice.has_value(), once.has_value());
    if (twice && once) EXPECT_EQ(*twice, *once);
  }
}

TEST(Zoom, Errors) {
  const auto k = kx_set(Word::parse("1000"));
  const std::vector<Rational> zero{Rational(0)};
  EXPECT_THROW(zoom(k, 5, zero), InvalidArgument);
  const std::vector<Rational> far{Rational(-2)};
  EXPECT_THROW(zoom(k, 1, far), InvalidArgument);
  const std::vector<Rational> offgrid{Rational(1, 3)};
  EXPECT_THROW(zoom(k, 1, offgrid), InvalidArgument);
}

TEST(Zoom, OpenCubeFlag) {
  const std::vector<Rational> zero{Rational(0)};
  EXPECT_TRUE(zoom(DyadicSet::full(1, 6), 0, zero).meets_open_cube);
  // K(0^n) shrinks to the corner 0, which sits on the boundary.
  EXPECT_FALSE(zoom(kx_set(Word::zeros(8)), 0, zero).meets_open_cube);
}

TEST(Decompose, PiecesTileTheSet) {
  const Word x = Word::parse("11");
  const auto pieces = decompose(x, 1);
  ASSERT_EQ(pieces.size(), 2u);
  EXPECT_EQ(pieces[0].u, 0);
  EXPECT_EQ(pieces[1].u, Rational(1, 2));
  EXPECT_EQ(decompose(x, 0).size(), 1u);

  std::mt19937_64 rng(10);
  for (int t = 0; t < 20; ++t) {
    const Word w = random_word(rng, 12);
    const int n = static_cast<int>(rng() % 8);
    const auto ps = decompose(w, n);
    EXPECT_EQ(ps.size(), std::size_t{1} << w.prefix(static_cast<std::size_t>(n)).ones_count());
    DyadicSet all = DyadicSet::empty(1, 12);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      all = set_union(all, ps[i].set);
      if (i > 0) EXPECT_TRUE(set_intersection(ps[i - 1].set, ps[i].set).is_empty());
    }
    EXPECT_EQ(all, kx_set(w));
  }
}

TEST(Sandwich, ExamplesAndSquarePieces) {
  const auto c = kx_set(Word::parse("1101"));
  const std::vector<std::vector<Rational>> origin{{Rational(0)}};
  EXPECT_TRUE(verify_sandwich(c, c, origin));
  EXPECT_FALSE(verify_sandwich(DyadicSet::full(1, 4), c, origin));

  const Word x = Word::parse("1011011010");
  const int n = 3;
  const auto k = kx_set(x);
  const auto pieces = decompose(x, n);
  const auto c2 = product(pieces[0].set, pieces[0].set);
  std::vector<std::vector<Rational>> translates;
  for (const auto& p : pieces)
    for (const auto& q : pieces) translates.push_back({p.u, q.u});
  EXPECT_TRUE(verify_sandwich(product(k, k), c2, translates));
}

TEST(Serialization, JsonAndBinaryRoundTrip) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto a = product(kx_set(random_word(rng, 7)), kx_set(random_word(rng, 7)));
    EXPECT_EQ(dyadic_from_json(to_json(a)), a);
    const auto bytes = to_binary(a);
    ASSERT_GE(bytes.size(), 4u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "DYS1");
    EXPECT_EQ(dyadic_from_binary(bytes), a);
  }
  const auto e = DyadicSet::empty(2, 5);
  EXPECT_EQ(dyadic_from_binary(to_binary(e)), e);
  std::vector<std::uint8_t> junk{'D', 'Y', 'S', '1', 1};
  EXPECT_THROW(dyadic_from_binary(junk), InvalidArgument);
}
