#include <gtest/gtest.h>

#include <random>

#include "microdim/errors.hpp"
#include "microdim/realize.hpp"
#include "oracles.hpp"

using namespace microdim;

namespace {

Word random_word(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
  return Word(bits);
}

Rational random_rational(std::mt19937_64& rng, long long den) {
  return Rational(static_cast<long long>(rng() % static_cast<std::uint64_t>(den + 1)), den);
}

}  // namespace

TEST(Varphi, FiniteSetAndFirstBit) {
  const VarphiMap fs(TargetSpec::parse("set:1/3,1/2"));
  EXPECT_EQ(fs(Word()), Rational(1, 3));
  EXPECT_EQ(fs(Word::parse("0")), Rational(1, 3));
  EXPECT_EQ(fs(Word::parse("1")), Rational(1, 2));
  EXPECT_EQ(fs(Word::parse("10110")), Rational(1, 2));
  EXPECT_FALSE(fs.m_index(Word::parse("1")).has_value());

  const VarphiMap fb(TargetSpec::parse("effective:first_bit:1/4,3/4"));
  EXPECT_EQ(fb(Word::parse("0")), Rational(1, 4));
  EXPECT_EQ(fb(Word::parse("1")), Rational(3, 4));
  EXPECT_EQ(fb(Word::parse("1000")), Rational(3, 4));
}

TEST(Varphi, Reciprocals) {
  const VarphiMap r(TargetSpec::parse("effective:reciprocals"));
  EXPECT_EQ(r(Word::parse("0001")), Rational(1, 4));
  EXPECT_EQ(r(Word::parse("000")), Rational(0));
  EXPECT_EQ(r(Word::parse("1")), Rational(1));

  VarphiOptions opt;
  opt.positive_floor = Rational(1, 2);
  const VarphiMap floored(TargetSpec::parse("effective:reciprocals"), opt);
  const auto v = floored.along(Word::parse("0001"), 4);
  EXPECT_EQ(v[0], Rational(1, 2));
  EXPECT_EQ(v[3], Rational(1, 16));
  EXPECT_EQ(v[4], Rational(1, 4));
  opt.positive_floor = Rational(0);
  EXPECT_THROW(VarphiMap(TargetSpec::parse("effective:reciprocals"), opt), InvalidArgument);
}

TEST(Varphi, RefreshesOnlyWhenClosedIndexGrows) {
  const VarphiMap co(TargetSpec::parse("effective:cofinite_ones"));
  EXPECT_EQ(co.m_index(Word()), 1);
  EXPECT_EQ(co.m_index(Word::parse("0101")), 4);
  // m stays 1 on "1", so the empty word's value 1/4 is inherited.
  EXPECT_EQ(co(Word::parse("1")), Rational(1, 4));
  EXPECT_EQ(co(Word::parse("11")), Rational(3, 4));
  EXPECT_EQ(co(Word::parse("110")), Rational(3, 4));
  EXPECT_EQ(co(Word::parse("01")), Rational(1, 4));
}

TEST(Varphi, ValuesStayInRangeAndMemoIsConsistent) {
  std::mt19937_64 rng(31);
  const VarphiMap m(TargetSpec::parse("interval:0.3,0.7"));
  for (int t = 0; t < 50; ++t) {
    const Word x = random_word(rng, 30);
    const auto v = m.along(x, 30);
    for (std::size_t i = 0; i <= 30; ++i) {
      EXPECT_GE(v[i], m.lower());
      EXPECT_LE(v[i], m.upper());
      EXPECT_EQ(v[i], m(x.prefix(i)));
    }
  }
  EXPECT_THROW(m.along(Word::parse("01"), 3), InvalidArgument);
}

TEST(ChooseK, HandExample) {
  EXPECT_EQ(choose_k(16, Rational(0), Rational(1), Rational(1, 2)), 4u);
  EXPECT_EQ(choose_k(16, Rational(0), Rational(1), Rational(1, 2), KRule::nearest), 16u);
  EXPECT_EQ(oracle::valid_ks(16, Rational(0), Rational(1), Rational(1, 2)).front(), 4u);
  EXPECT_EQ(choose_k(10, Rational(1, 3), Rational(1, 3), Rational(1, 3)), 4u);
  EXPECT_THROW(choose_k(0, Rational(0), Rational(1), Rational(1, 2)), InvalidArgument);
  EXPECT_THROW(choose_k(5, Rational(0), Rational(1, 2), Rational(3, 4)), InvalidArgument);
}

TEST(ChooseK, MatchesExhaustiveScan) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 400; ++t) {
    const std::uint64_t n = 1 + rng() % 60;
    Rational a = random_rational(rng, 12);
    Rational b = random_rational(rng, 12);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    const Rational target = a + (b - a) * random_rational(rng, 7);
    const auto valid = oracle::valid_ks(n, a, b, target);
    ASSERT_FALSE(valid.empty());
    EXPECT_EQ(choose_k(n, a, b, target), valid.front());
    const auto k = choose_k(n, a, b, target, KRule::nearest);
    EXPECT_TRUE(std::find(valid.begin(), valid.end(), k) != valid.end());
    auto err = [&](std::uint64_t kk) {
      Rational e = (Rational(n) * a + Rational(kk) * b) / Rational(n + kk) - target;
      return e < 0 ? Rational(-e) : e;
    };
    for (auto v : valid) {
      EXPECT_TRUE(err(k) < err(v) || (err(k) == err(v) && k <= v)) << "n=" << n << " k=" << k << " v=" << v;
    }
    EXPECT_TRUE(k_is_valid(n, k, BlockTarget(a, b, target)));
  }
}

TEST(Psi, BlocksAreAlphaThenBeta) {
  std::mt19937_64 rng(33);
  const auto spec = TargetSpec::parse("interval:0.3,0.7");
  const Word x = random_word(rng, 40);
  const auto p = build_psi_prefix(x, spec, 30);
  ASSERT_EQ(p.blocks.size(), 30u);
  ASSERT_EQ(p.boundaries.size(), 31u);
  EXPECT_EQ(p.boundaries.back(), p.word.length());
  const Word alpha = beatty_balanced(Rational(3, 10)).prefix(40);
  const Word beta = beatty_balanced(Rational(7, 10)).prefix(40 * 40);
  const VarphiMap phi(spec);
  for (std::size_t i = 1; i < 30; ++i) {
    const auto& b = p.blocks[i];
    EXPECT_EQ(b.n, i);
    EXPECT_EQ(b.phi, phi(x.prefix(i)));
    const Word block = p.word.prefix(p.boundaries[i + 1]).suffix_from(p.boundaries[i]);
    EXPECT_EQ(block, concat(alpha.prefix(i), beta.prefix(b.k))) << i;
  }
  const auto report = realized_density_check(p, phi(x.prefix(29)));
  EXPECT_EQ(report.blocks_checked, 29u);
  EXPECT_LE(report.worst_slack, 0.0);
  EXPECT_LE(report.last_block_fraction, report.fraction_bound);
  EXPECT_THROW(build_psi_prefix(x, spec, 42), InvalidArgument);
}

TEST(Psi, FiniteTargetDensityConverges) {
  const auto spec = TargetSpec::parse("set:1/3,1/2");
  const Word x = Word::ones(200);
  const auto p = build_psi_prefix(x, spec, 200);
  const auto r = realized_density_check(p, Rational(1, 2));
  EXPECT_LT(r.cumulative_error, 0.02);
}

TEST(Gallery, CopiesAccumulateAtOrigin) {
  const std::vector<GalleryGenerator> gens{[](int depth) { return DyadicSet::full(1, depth); }};
  const auto g = assemble_gallery(gens, 6, 1);
  EXPECT_EQ(g.leaf_count(), 63);
  EXPECT_TRUE(g.contains(CubeIdx{6, {0}}));
  EXPECT_FALSE(g.contains(CubeIdx{6, {1}}));
  EXPECT_TRUE(g.contains(CubeIdx{1, {1}}));

  const std::vector<GalleryGenerator> two{[](int depth) { return DyadicSet::full(2, depth); },
                                          [](int depth) { return DyadicSet::empty(2, depth); }};
  const auto h = assemble_gallery(two, 5, 2);
  // Copies 1 and 3 are full squares, 2 and 4 are empty.
  EXPECT_EQ(h.leaf_count(), 1 + 256 + 16);
  EXPECT_THROW(assemble_gallery(two, 2, 2), InvalidArgument);
  EXPECT_THROW(assemble_gallery({}, 4, 1), InvalidArgument);
}
