#include "microdim/realize.hpp"

#include <algorithm>
#include <cmath>

#include "microdim/errors.hpp"

namespace microdim {

// ---------------------------------------------------------------------------
// phi

VarphiMap::VarphiMap(TargetSpec spec, VarphiOptions options)
    : spec_(std::move(spec)), options_(std::move(options)), a_(spec_.lower()), b_(spec_.upper()) {
  if (a_ > b_) throw InvalidArgument("target oracle reports min A > max A");
  if (options_.positive_floor && *options_.positive_floor <= 0) {
    throw InvalidArgument("positive floor must be positive");
  }
}

std::optional<int> VarphiMap::m_index(const Word& s) const {
  const auto& o = spec_.oracle();
  if (!o.meets_f(s)) return std::nullopt;
  for (int m = 1; m <= options_.max_f_index; ++m) {
    if (o.closed_meets(m, s)) return m;
  }
  throw ResourceExhausted("m(s) exceeds max_f_index for s = " + s.str());
}

Rational VarphiMap::raw(const Word& s, const Rational& parent_value) const {
  const auto& o = spec_.oracle();
  const Word parent = s.parent();
  const bool in_f = o.meets_f(s);
  const bool in_g = o.meets_g(s);
  if (!in_f && !in_g) throw InvariantViolation("target oracle: cylinder " + s.str() + " meets neither F nor G");
  if (in_f && !o.meets_f(parent)) throw InvariantViolation("target oracle: F-meeting is not inherited by " + parent.str());
  if (!in_f) return o.choose(s);
  if (!in_g) return parent_value;
  const auto ms = m_index(s);
  const auto mp = m_index(parent);
  if (!mp || *mp > *ms) throw InvariantViolation("target oracle: m(" + parent.str() + ") > m(" + s.str() + ")");
  if (*ms == *mp) return parent_value;
  return o.choose(s);
}

std::vector<Rational> VarphiMap::along(const Word& x, std::size_t n) const {
  if (n > x.length()) throw InvalidArgument("VarphiMap::along: n exceeds the word length");
  std::vector<Rational> out;
  out.reserve(n + 1);
  Rational current = a_;
  out.push_back(current);
  std::string key;
  for (std::size_t i = 1; i <= n; ++i) {
    key.push_back(static_cast<char>('0' + x[i - 1]));
    std::optional<Rational> hit;
    {
      std::lock_guard lock(mutex_);
      if (auto it = memo_.find(key); it != memo_.end()) hit = it->second;
    }
    if (hit) {
      current = *hit;
    } else {
      current = std::clamp(raw(x.prefix(i), current), a_, b_);
      std::lock_guard lock(mutex_);
      memo_.emplace(key, current);
    }
    out.push_back(current);
  }
  if (options_.positive_floor) {
    const Rational& gamma = *options_.positive_floor;
    for (std::size_t i = 0; i <= n; ++i) {
      if (out[i] <= 0) out[i] = gamma / Rational(BigInt(1) << i);
      if (out[i] > gamma) out[i] = gamma;
    }
  }
  return out;
}

Rational VarphiMap::operator()(const Word& s) const { return along(s, s.length()).back(); }

Rational build_varphi(const TargetSpec& spec, const Word& s) { return VarphiMap(spec)(s); }

// ---------------------------------------------------------------------------
// k(s)

BlockTarget::BlockTarget(const Rational& a_, const Rational& b_, const Rational& t_) : a(a_), b(b_), target(t_) {
  if (a > b || target < a || target > b) throw InvalidArgument("choose_k needs a <= target <= b");
  D = boost::multiprecision::lcm(boost::multiprecision::lcm(denominator(a), denominator(b)), denominator(target));
  A = numerator(a) * (D / denominator(a));
  B = numerator(b) * (D / denominator(b));
  T = numerator(target) * (D / denominator(target));
  af = static_cast<long double>(to_double(a));
  bf = static_cast<long double>(to_double(b));
  tf = static_cast<long double>(to_double(target));
}

namespace {

constexpr std::uint64_t kMaxBlockN = std::uint64_t{1} << 21;  // keeps n^3 within 64 bits

struct KRange {
  std::uint64_t lo;
  std::uint64_t hi;
};

// Integers k with sqrt(n) - 1 < k < n sqrt(n) + 1.
KRange k_range(std::uint64_t n) {
  const std::uint64_t lo = std::max<std::uint64_t>(1, isqrt(n));
  const std::uint64_t cube = n * n * n;
  const std::uint64_t c = isqrt(cube);
  const std::uint64_t hi = c * c == cube ? c : c + 1;
  return {lo, hi};
}

BigInt excess(std::uint64_t n, std::uint64_t k, const BlockTarget& t) {
  return BigInt(n) * (t.A - t.T) + BigInt(k) * (t.B - t.T);
}

// n X^2 <= 4 D^2 (n+k)^2, i.e. |r(k) - target| <= 2/sqrt(n).
bool within_exact(std::uint64_t n, std::uint64_t k, const BlockTarget& t) {
  const BigInt x = excess(n, k, t);
  const BigInt nk = BigInt(n + k);
  return BigInt(n) * x * x <= 4 * t.D * t.D * nk * nk;
}

// -1 certainly outside, 1 certainly inside, 0 undecided.
int within_fast(std::uint64_t n, std::uint64_t k, const BlockTarget& t, long double& g) {
  const long double nn = static_cast<long double>(n);
  const long double kk = static_cast<long double>(k);
  g = (nn * (t.af - t.tf) + kk * (t.bf - t.tf)) / (nn + kk);
  const long double v = nn * g * g;
  if (v < 4.0L * (1 - 1e-9L)) return 1;
  if (v > 4.0L * (1 + 1e-9L)) return -1;
  return 0;
}

// r(k) >= target - 2/sqrt(n)
bool above_floor(std::uint64_t n, std::uint64_t k, const BlockTarget& t) {
  long double g;
  const int f = within_fast(n, k, t, g);
  if (f == 1) return true;
  if (f == -1) return g > 0;
  return within_exact(n, k, t) || excess(n, k, t) > 0;
}

// r(k) <= target + 2/sqrt(n)
bool below_ceiling(std::uint64_t n, std::uint64_t k, const BlockTarget& t) {
  long double g;
  const int f = within_fast(n, k, t, g);
  if (f == 1) return true;
  if (f == -1) return g < 0;
  return within_exact(n, k, t) || excess(n, k, t) < 0;
}

}  // namespace

bool k_is_valid(std::uint64_t n, std::uint64_t k, const BlockTarget& t) {
  if (n == 0 || n > kMaxBlockN) return false;
  const auto r = k_range(n);
  return k >= r.lo && k <= r.hi && within_exact(n, k, t);
}

std::uint64_t choose_k(std::uint64_t n, const BlockTarget& t, KRule rule) {
  if (n == 0) throw InvalidArgument("choose_k: n must be positive");
  if (n > kMaxBlockN) throw ResourceExhausted("choose_k: n too large");
  if (t.a == t.b) return ceil_sqrt(n);
  const auto range = k_range(n);
  // r(k) increases with k, so the valid k form an interval [klo, khi].
  std::uint64_t lo = range.lo;
  std::uint64_t hi = range.hi + 1;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (above_floor(n, mid, t)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  const std::uint64_t klo = lo;
  if (klo > range.hi || !below_ceiling(n, klo, t)) {
    throw InvariantViolation("choose_k: no admissible k for n = " + std::to_string(n) + ", target " + to_string(t.target));
  }
  if (rule == KRule::minimal) return klo;
  lo = klo;
  hi = range.hi;
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo + 1) / 2;
    if (below_ceiling(n, mid, t)) {
      lo = mid;
    } else {
      hi = mid - 1;
    }
  }
  const std::uint64_t khi = lo;
  if (t.target == t.b) return khi;
  // r(z) = target at z = n (T - A) / (B - T).
  const BigInt z = BigInt(n) * (t.T - t.A) / (t.B - t.T);
  auto clampk = [&](const BigInt& v) {
    if (v < BigInt(klo)) return klo;
    if (v > BigInt(khi)) return khi;
    return static_cast<std::uint64_t>(v);
  };
  const std::uint64_t k1 = clampk(z);
  const std::uint64_t k2 = clampk(z + 1);
  const BigInt e1 = abs(excess(n, k1, t)) * BigInt(n + k2);
  const BigInt e2 = abs(excess(n, k2, t)) * BigInt(n + k1);
  return e2 < e1 ? k2 : k1;
}

std::uint64_t choose_k(std::uint64_t n, const Rational& a, const Rational& b, const Rational& target, KRule rule) {
  return choose_k(n, BlockTarget(a, b, target), rule);
}

// ---------------------------------------------------------------------------
// psi

PsiPrefix build_psi_prefix(const Word& x, const VarphiMap& varphi, std::size_t blocks, KRule rule) {
  if (blocks > x.length() + 1) throw InvalidArgument("build_psi_prefix: blocks exceeds length(x) + 1");
  PsiPrefix out;
  out.a = varphi.lower();
  out.b = varphi.upper();
  out.boundaries.push_back(0);
  if (blocks == 0) return out;
  out.blocks.push_back({0, 0, varphi.lower()});
  out.boundaries.push_back(0);
  if (blocks == 1) return out;
  const std::size_t last = blocks - 1;
  const auto phis = varphi.along(x, last);
  const SeqProgram alpha = beatty_balanced(out.a);
  const SeqProgram beta = beatty_balanced(out.b);
  const Word alpha_bits = alpha.prefix(last);
  Word beta_bits = beta.prefix(k_range(last).hi);
  std::vector<std::uint8_t> bits;
  for (std::size_t i = 1; i <= last; ++i) {
    const std::uint64_t k = choose_k(i, BlockTarget(out.a, out.b, phis[i]), rule);
    bits.insert(bits.end(), alpha_bits.bits().begin(), alpha_bits.bits().begin() + static_cast<std::ptrdiff_t>(i));
    bits.insert(bits.end(), beta_bits.bits().begin(), beta_bits.bits().begin() + static_cast<std::ptrdiff_t>(k));
    out.blocks.push_back({i, k, phis[i]});
    out.boundaries.push_back(bits.size());
  }
  out.word = Word(std::move(bits));
  return out;
}

PsiPrefix build_psi_prefix(const Word& x, const TargetSpec& spec, std::size_t blocks, KRule rule) {
  return build_psi_prefix(x, VarphiMap(spec), blocks, rule);
}

DensityReport realized_density_check(const PsiPrefix& p, const Rational& expected) {
  if (p.blocks.size() < 2) throw InvalidArgument("realized_density_check needs at least two blocks");
  DensityReport r;
  r.worst_slack = -INFINITY;
  const auto bits = p.word.bits();
  for (std::size_t i = 1; i < p.blocks.size(); ++i) {
    const auto& blk = p.blocks[i];
    const std::size_t start = p.boundaries[i];
    const std::size_t end = p.boundaries[i + 1];
    if (end - start != blk.n + blk.k) throw InvariantViolation("psi prefix: block length mismatch");
    const auto ones = static_cast<std::uint64_t>(std::count(bits.begin() + static_cast<std::ptrdiff_t>(start),
                                                            bits.begin() + static_cast<std::ptrdiff_t>(end), std::uint8_t{1}));
    const Rational len(BigInt(blk.n + blk.k));
    const Rational err = abs(Rational(BigInt(ones)) / len - blk.phi);
    const Rational rest = err - Rational(2) / len;
    if (rest > 0 && !abs_le_over_sqrt(rest, 2, static_cast<std::int64_t>(blk.n))) {
      throw InvariantViolation("block " + std::to_string(i) + " density error " + to_string(err) + " exceeds 2/(n+k) + 2/sqrt(n)");
    }
    r.worst_slack = std::max(r.worst_slack, to_double(rest) - 2.0 / std::sqrt(static_cast<double>(blk.n)));
    ++r.blocks_checked;
  }
  const double n = static_cast<double>(p.blocks.back().n);
  const double total = static_cast<double>(p.word.length());
  r.last_block_fraction = static_cast<double>(p.blocks.back().n + p.blocks.back().k) / total;
  r.fraction_bound = (n + n * std::sqrt(n) + 1) / (n * (n + 1) / 2 + n);
  if (r.last_block_fraction > r.fraction_bound) throw InvariantViolation("psi prefix: last block too long");
  r.cumulative_density = p.word.density();
  r.cumulative_error = std::abs(to_double(r.cumulative_density - expected));
  return r;
}

// ---------------------------------------------------------------------------
// gallery

DyadicSet assemble_gallery(const std::vector<GalleryGenerator>& generators, int depth, int d) {
  if (generators.empty()) throw InvalidArgument("assemble_gallery: no generators");
  if (static_cast<int>(generators.size()) > depth - 1) {
    throw InvalidArgument("assemble_gallery: " + std::to_string(generators.size()) +
                          " generators do not fit in depth " + std::to_string(depth));
  }
  detail::TreeBuilder b(d, depth);
  const unsigned fan = 1U << d;
  std::vector<DyadicSet> keep;  // imported trees must outlive the builder calls
  std::int64_t corner = b.leaf();
  for (int l = depth - 1; l >= 0; --l) {
    std::vector<std::int64_t> kids(fan, detail::kNone);
    kids[0] = corner;
    const int j = l + 1;  // copy j lives in the all-ones child of the level-l corner cube
    if (j <= depth - 1) {
      const auto& gen = generators[static_cast<std::size_t>(j - 1) % generators.size()];
      DyadicSet s = gen(depth - j);
      if (s.dim() != d || s.depth() != depth - j) throw InvalidArgument("assemble_gallery: generator returned wrong shape");
      if (!s.is_empty()) {
        kids[fan - 1] = b.import(*s.tree(), 0, 0, j);
        keep.push_back(std::move(s));
      }
    }
    corner = b.node(l, kids);
  }
  return DyadicSet::from_tree(d, depth, b.finish(corner));
}

}  // namespace microdim
