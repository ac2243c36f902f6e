#include "microdim/dyadic.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <functional>

#include "microdim/errors.hpp"

namespace microdim {

using detail::kNone;
using detail::Tree;
using detail::TreeBuilder;

namespace {

void check_dim(int d) {
  if (d < 1 || d > kMaxDim) throw InvalidArgument("dimension must be in 1.." + std::to_string(kMaxDim));
}

void check_depth(int depth) {
  if (depth < 0) throw InvalidArgument("depth must be nonnegative");
}

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

CubeIdx CubeIdx::parent() const {
  if (level == 0) throw InvalidArgument("the unit cube has no parent");
  CubeIdx p{level - 1, coords};
  for (auto& c : p.coords) c >>= 1;
  return p;
}

CubeIdx CubeIdx::child(unsigned c) const {
  CubeIdx k{level + 1, coords};
  for (std::size_t j = 0; j < k.coords.size(); ++j) k.coords[j] = 2 * k.coords[j] + ((c >> j) & 1U);
  return k;
}

// ---------------------------------------------------------------------------
// Tree and builder

std::uint32_t Tree::child(int level, std::uint32_t node, unsigned c) const {
  const auto& lv = levels[static_cast<std::size_t>(level)];
  const std::uint16_t mask = lv.mask[node];
  const unsigned below = static_cast<unsigned>(std::popcount(static_cast<unsigned>(mask & ((1U << c) - 1U))));
  return lv.kids[lv.first[node] + below];
}

std::size_t TreeBuilder::KeyHash::operator()(const std::vector<std::uint32_t>& key) const noexcept {
  std::uint64_t h = key.size();
  for (auto v : key) h = mix(h, v);
  return static_cast<std::size_t>(h);
}

TreeBuilder::TreeBuilder(int d, int depth) : d_(d), depth_(depth) {
  check_dim(d);
  check_depth(depth);
  levels_.resize(static_cast<std::size_t>(depth) + 1);
  index_.resize(static_cast<std::size_t>(depth) + 1);
  full_.assign(static_cast<std::size_t>(depth) + 1, kNone);
  auto& leaf = levels_[static_cast<std::size_t>(depth)];
  leaf.mask.push_back(0);
  leaf.first.push_back(0);
}

std::int64_t TreeBuilder::node(int level, std::span<const std::int64_t> children) {
  const unsigned fan = 1U << d_;
  if (level < 0 || level >= depth_ || children.size() != fan) {
    throw InvalidArgument("TreeBuilder::node: bad level or child count");
  }
  std::vector<std::uint32_t> key;
  key.reserve(fan + 1);
  key.push_back(0);
  std::uint32_t mask = 0;
  for (unsigned c = 0; c < fan; ++c) {
    if (children[c] == kNone) continue;
    mask |= 1U << c;
    key.push_back(static_cast<std::uint32_t>(children[c]));
  }
  if (mask == 0) return kNone;
  key[0] = mask;
  auto& idx = index_[static_cast<std::size_t>(level)];
  if (auto it = idx.find(key); it != idx.end()) return it->second;
  auto& lv = levels_[static_cast<std::size_t>(level)];
  const auto id = static_cast<std::uint32_t>(lv.mask.size());
  lv.mask.push_back(static_cast<std::uint16_t>(mask));
  lv.first.push_back(static_cast<std::uint32_t>(lv.kids.size()));
  lv.kids.insert(lv.kids.end(), key.begin() + 1, key.end());
  idx.emplace(std::move(key), id);
  return id;
}

std::int64_t TreeBuilder::full(int level) {
  if (level >= depth_) return leaf();
  auto& slot = full_[static_cast<std::size_t>(level)];
  if (slot != kNone) return slot;
  const std::int64_t below = full(level + 1);
  std::vector<std::int64_t> kids(std::size_t{1} << d_, below);
  slot = node(level, kids);
  return slot;
}

std::int64_t TreeBuilder::import(const Tree& src, int src_level, std::uint32_t src_node, int dst_level) {
  if (src.d != d_) throw InvalidArgument("import: dimension mismatch");
  if (&src != import_src_) {
    import_memo_.clear();
    import_src_ = &src;
  }
  std::function<std::int64_t(int, std::uint32_t, int)> rec = [&](int sl, std::uint32_t sn, int dl) -> std::int64_t {
    if (dl >= depth_) return leaf();
    if (sl >= src.depth) return full(dl);
    const std::uint64_t key = (static_cast<std::uint64_t>(dl) << 48) ^ (static_cast<std::uint64_t>(sl) << 32) ^ sn;
    if (auto it = import_memo_.find(key); it != import_memo_.end()) return it->second;
    const auto& lv = src.levels[static_cast<std::size_t>(sl)];
    const std::uint16_t mask = lv.mask[sn];
    std::array<std::int64_t, 1U << kMaxDim> kids;
    kids.fill(kNone);
    std::uint32_t k = lv.first[sn];
    for (unsigned c = 0; c < (1U << d_); ++c) {
      if (mask & (1U << c)) kids[c] = rec(sl + 1, lv.kids[k++], dl + 1);
    }
    const std::int64_t id = node(dl, std::span<const std::int64_t>(kids.data(), std::size_t{1} << d_));
    import_memo_.emplace(key, id);
    return id;
  };
  return rec(src_level, src_node, dst_level);
}

std::shared_ptr<const Tree> TreeBuilder::finish(std::int64_t root) const {
  if (root == kNone) return nullptr;
  auto tree = std::make_shared<Tree>();
  tree->d = d_;
  tree->depth = depth_;
  tree->levels.resize(static_cast<std::size_t>(depth_) + 1);
  // Breadth-first renumbering: ids at each level follow first discovery order.
  std::vector<std::uint32_t> order{static_cast<std::uint32_t>(root)};
  for (int l = 0; l < depth_; ++l) {
    const auto& src = levels_[static_cast<std::size_t>(l)];
    auto& dst = tree->levels[static_cast<std::size_t>(l)];
    const auto& below = levels_[static_cast<std::size_t>(l) + 1];
    std::vector<std::int64_t> renumber(below.size(), kNone);
    std::vector<std::uint32_t> next;
    dst.mask.reserve(order.size());
    dst.first.reserve(order.size());
    for (const auto old : order) {
      const std::uint16_t mask = src.mask[old];
      dst.mask.push_back(mask);
      dst.first.push_back(static_cast<std::uint32_t>(dst.kids.size()));
      const auto n = static_cast<std::uint32_t>(std::popcount(static_cast<unsigned>(mask)));
      for (std::uint32_t i = 0; i < n; ++i) {
        const std::uint32_t kid = src.kids[src.first[old] + i];
        if (renumber[kid] == kNone) {
          renumber[kid] = static_cast<std::int64_t>(next.size());
          next.push_back(kid);
        }
        dst.kids.push_back(static_cast<std::uint32_t>(renumber[kid]));
      }
    }
    order = std::move(next);
  }
  auto& leaf = tree->levels[static_cast<std::size_t>(depth_)];
  leaf.mask.push_back(0);
  leaf.first.push_back(0);
  return tree;
}

// ---------------------------------------------------------------------------
// DyadicSet basics

DyadicSet DyadicSet::empty(int d, int depth) {
  check_dim(d);
  check_depth(depth);
  return DyadicSet(d, depth, nullptr);
}

DyadicSet DyadicSet::full(int d, int depth) {
  TreeBuilder b(d, depth);
  return DyadicSet(d, depth, b.finish(b.full(0)));
}

DyadicSet DyadicSet::from_tree(int d, int depth, std::shared_ptr<const Tree> tree) {
  check_dim(d);
  check_depth(depth);
  if (tree && (tree->d != d || tree->depth != depth)) throw InvalidArgument("from_tree: shape mismatch");
  return DyadicSet(d, depth, std::move(tree));
}

DyadicSet DyadicSet::from_leaves(int d, int depth, std::span<const CubeIdx> leaves) {
  check_dim(d);
  check_depth(depth);
  if (depth > 62) throw InvalidArgument("from_leaves supports depth <= 62");
  const std::uint64_t side = std::uint64_t{1} << depth;
  for (const auto& c : leaves) {
    if (c.level != depth || c.coords.size() != static_cast<std::size_t>(d)) {
      throw InvalidArgument("from_leaves: leaf has wrong level or dimension");
    }
    for (auto v : c.coords) {
      if (v >= side) throw InvalidArgument("from_leaves: coordinate out of range");
    }
  }
  if (leaves.empty()) return empty(d, depth);
  TreeBuilder b(d, depth);
  const unsigned fan = 1U << d;
  std::vector<const CubeIdx*> all;
  all.reserve(leaves.size());
  for (const auto& c : leaves) all.push_back(&c);
  std::function<std::int64_t(int, std::vector<const CubeIdx*>&)> rec =
      [&](int level, std::vector<const CubeIdx*>& items) -> std::int64_t {
    if (level == depth) return b.leaf();
    const int shift = depth - level - 1;
    std::vector<std::vector<const CubeIdx*>> buckets(fan);
    for (const auto* c : items) {
      unsigned k = 0;
      for (int j = 0; j < d; ++j) k |= static_cast<unsigned>((c->coords[static_cast<std::size_t>(j)] >> shift) & 1U) << j;
      buckets[k].push_back(c);
    }
    items.clear();
    items.shrink_to_fit();
    std::array<std::int64_t, 1U << kMaxDim> kids;
    kids.fill(kNone);
    for (unsigned k = 0; k < fan; ++k) {
      if (!buckets[k].empty()) kids[k] = rec(level + 1, buckets[k]);
    }
    return b.node(level, std::span<const std::int64_t>(kids.data(), fan));
  };
  return DyadicSet(d, depth, b.finish(rec(0, all)));
}

std::vector<BigInt> DyadicSet::level_counts() const {
  std::vector<BigInt> out(static_cast<std::size_t>(depth_) + 1, 0);
  if (!tree_) return out;
  std::vector<BigInt> mult{BigInt(1)};
  for (int l = 0; l <= depth_; ++l) {
    const auto& lv = tree_->levels[static_cast<std::size_t>(l)];
    BigInt total = 0;
    for (const auto& m : mult) total += m;
    out[static_cast<std::size_t>(l)] = total;
    if (l == depth_) break;
    std::vector<BigInt> next(tree_->levels[static_cast<std::size_t>(l) + 1].size(), 0);
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const auto n = static_cast<std::uint32_t>(std::popcount(static_cast<unsigned>(lv.mask[i])));
      for (std::uint32_t k = 0; k < n; ++k) next[lv.kids[lv.first[i] + k]] += mult[i];
    }
    mult = std::move(next);
  }
  return out;
}

BigInt DyadicSet::count(int level) const {
  if (level < 0 || level > depth_) throw InvalidArgument("count: level out of range");
  return level_counts()[static_cast<std::size_t>(level)];
}

std::vector<CubeIdx> DyadicSet::cubes(int level, std::size_t cap) const {
  if (level < 0 || level > depth_) throw InvalidArgument("cubes: level out of range");
  if (level > 62) throw InvalidArgument("cubes: coordinates need level <= 62");
  std::vector<CubeIdx> out;
  if (!tree_) return out;
  std::vector<std::pair<std::uint32_t, CubeIdx>> frontier{{0, CubeIdx{0, std::vector<std::uint64_t>(static_cast<std::size_t>(d_), 0)}}};
  for (int l = 0; l < level; ++l) {
    std::vector<std::pair<std::uint32_t, CubeIdx>> next;
    const auto& lv = tree_->levels[static_cast<std::size_t>(l)];
    for (const auto& [id, cube] : frontier) {
      std::uint32_t k = lv.first[id];
      for (unsigned c = 0; c < (1U << d_); ++c) {
        if (!(lv.mask[id] & (1U << c))) continue;
        next.emplace_back(lv.kids[k++], cube.child(c));
        if (next.size() > cap) throw ResourceExhausted("cube enumeration exceeds cap");
      }
    }
    frontier = std::move(next);
  }
  out.reserve(frontier.size());
  for (auto& [id, cube] : frontier) out.push_back(std::move(cube));
  std::sort(out.begin(), out.end());
  return out;
}

bool DyadicSet::contains(const CubeIdx& cube) const {
  if (cube.level < 0 || cube.level > depth_ || cube.coords.size() != static_cast<std::size_t>(d_)) {
    throw InvalidArgument("contains: cube does not match the set's shape");
  }
  if (!tree_) return false;
  if (cube.level < 64) {
    for (auto v : cube.coords) {
      if (v >> cube.level) return false;
    }
  }
  std::uint32_t id = 0;
  for (int l = 0; l < cube.level; ++l) {
    const int shift = cube.level - l - 1;
    unsigned c = 0;
    for (int j = 0; j < d_; ++j) {
      const auto v = cube.coords[static_cast<std::size_t>(j)];
      if (shift < 64) c |= static_cast<unsigned>((v >> shift) & 1U) << j;
    }
    if (!(tree_->levels[static_cast<std::size_t>(l)].mask[id] & (1U << c))) return false;
    id = tree_->child(l, id, c);
  }
  return true;
}

DyadicSet DyadicSet::truncate(int level) const {
  if (level < 0 || level > depth_) throw InvalidArgument("truncate: level out of range");
  if (!tree_) return empty(d_, level);
  TreeBuilder b(d_, level);
  return DyadicSet(d_, level, b.finish(b.import(*tree_, 0, 0, 0)));
}

bool operator==(const DyadicSet& a, const DyadicSet& b) {
  if (a.d_ != b.d_ || a.depth_ != b.depth_) return false;
  if (!a.tree_ || !b.tree_) return !a.tree_ && !b.tree_;
  if (a.tree_ == b.tree_) return true;
  for (std::size_t l = 0; l < a.tree_->levels.size(); ++l) {
    const auto& x = a.tree_->levels[l];
    const auto& y = b.tree_->levels[l];
    if (x.mask != y.mask || x.kids != y.kids) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Constructions

DyadicSet kx_set(const Word& x) {
  const int n = static_cast<int>(x.length());
  TreeBuilder b(1, n);
  std::int64_t id = b.leaf();
  for (int l = n - 1; l >= 0; --l) {
    const std::int64_t kids[2] = {id, x[static_cast<std::size_t>(l)] ? id : kNone};
    id = b.node(l, kids);
  }
  return DyadicSet::from_tree(1, n, b.finish(id));
}

namespace {

using PairMemo = std::vector<std::unordered_map<std::uint64_t, std::int64_t>>;

std::uint64_t pair_key(std::int64_t a, std::int64_t b) {
  return (static_cast<std::uint64_t>(a + 1) << 32) | static_cast<std::uint64_t>(b + 1);
}

void require_same_shape(const DyadicSet& a, const DyadicSet& b, const char* op) {
  if (a.dim() != b.dim() || a.depth() != b.depth()) {
    throw InvalidArgument(std::string(op) + ": operands differ in dimension or depth");
  }
}

}  // namespace

DyadicSet product(const DyadicSet& a, const DyadicSet& b) {
  if (a.depth() != b.depth()) throw InvalidArgument("product: depth mismatch");
  const int da = a.dim();
  const int d = da + b.dim();
  if (d > kMaxDim) throw InvalidArgument("product: dimension exceeds " + std::to_string(kMaxDim));
  const int depth = a.depth();
  if (a.is_empty() || b.is_empty()) return DyadicSet::empty(d, depth);
  TreeBuilder builder(d, depth);
  const Tree& ta = *a.tree();
  const Tree& tb = *b.tree();
  PairMemo memo(static_cast<std::size_t>(depth) + 1);
  std::function<std::int64_t(int, std::uint32_t, std::uint32_t)> rec = [&](int l, std::uint32_t ia, std::uint32_t ib) -> std::int64_t {
    if (l == depth) return builder.leaf();
    auto& m = memo[static_cast<std::size_t>(l)];
    const auto key = pair_key(ia, ib);
    if (auto it = m.find(key); it != m.end()) return it->second;
    std::array<std::int64_t, 1U << kMaxDim> kids;
    kids.fill(kNone);
    const auto ma = ta.levels[static_cast<std::size_t>(l)].mask[ia];
    const auto mb = tb.levels[static_cast<std::size_t>(l)].mask[ib];
    for (unsigned ca = 0; ca < (1U << da); ++ca) {
      if (!(ma & (1U << ca))) continue;
      for (unsigned cb = 0; cb < (1U << b.dim()); ++cb) {
        if (!(mb & (1U << cb))) continue;
        kids[ca | (cb << da)] = rec(l + 1, ta.child(l, ia, ca), tb.child(l, ib, cb));
      }
    }
    const auto id = builder.node(l, std::span<const std::int64_t>(kids.data(), std::size_t{1} << d));
    m.emplace(key, id);
    return id;
  };
  return DyadicSet::from_tree(d, depth, builder.finish(rec(0, 0, 0)));
}

namespace {

DyadicSet combine(const DyadicSet& a, const DyadicSet& b, bool is_union) {
  const int d = a.dim();
  const int depth = a.depth();
  TreeBuilder builder(d, depth);
  const Tree* ta = a.tree();
  const Tree* tb = b.tree();
  PairMemo memo(static_cast<std::size_t>(depth) + 1);
  std::function<std::int64_t(int, std::int64_t, std::int64_t)> rec = [&](int l, std::int64_t ia, std::int64_t ib) -> std::int64_t {
    if (ia == kNone && ib == kNone) return kNone;
    if (!is_union && (ia == kNone || ib == kNone)) return kNone;
    if (l == depth) return builder.leaf();
    auto& m = memo[static_cast<std::size_t>(l)];
    const auto key = pair_key(ia, ib);
    if (auto it = m.find(key); it != m.end()) return it->second;
    std::array<std::int64_t, 1U << kMaxDim> kids;
    kids.fill(kNone);
    const unsigned ma = ia == kNone ? 0U : ta->levels[static_cast<std::size_t>(l)].mask[static_cast<std::size_t>(ia)];
    const unsigned mb = ib == kNone ? 0U : tb->levels[static_cast<std::size_t>(l)].mask[static_cast<std::size_t>(ib)];
    for (unsigned c = 0; c < (1U << d); ++c) {
      const std::int64_t ka = (ma & (1U << c)) ? ta->child(l, static_cast<std::uint32_t>(ia), c) : kNone;
      const std::int64_t kb = (mb & (1U << c)) ? tb->child(l, static_cast<std::uint32_t>(ib), c) : kNone;
      kids[c] = rec(l + 1, ka, kb);
    }
    const auto id = builder.node(l, std::span<const std::int64_t>(kids.data(), std::size_t{1} << d));
    m.emplace(key, id);
    return id;
  };
  const std::int64_t ra = ta ? 0 : kNone;
  const std::int64_t rb = tb ? 0 : kNone;
  return DyadicSet::from_tree(d, depth, builder.finish(rec(0, ra, rb)));
}

}  // namespace

DyadicSet set_union(const DyadicSet& a, const DyadicSet& b) {
  require_same_shape(a, b, "set_union");
  return combine(a, b, true);
}

DyadicSet set_intersection(const DyadicSet& a, const DyadicSet& b) {
  require_same_shape(a, b, "set_intersection");
  return combine(a, b, false);
}

bool is_subset(const DyadicSet& a, const DyadicSet& b) {
  require_same_shape(a, b, "is_subset");
  return set_intersection(a, b) == a;
}

// ---------------------------------------------------------------------------
// Zoom

namespace {

// floor(t / 2^k) for any sign.
BigInt floor_shift(const BigInt& t, unsigned k) {
  if (t >= 0) return t >> k;
  const BigInt neg = -t;
  BigInt q = neg >> k;
  if ((q << k) != neg) q += 1;
  return -q;
}

BigInt ceil_shift(const BigInt& t, unsigned k) { return -floor_shift(-t, k); }

// Number of trailing zero bits of t (t != 0).
unsigned trailing_zeros(const BigInt& t) {
  const BigInt v = t < 0 ? BigInt(-t) : t;
  return static_cast<unsigned>(boost::multiprecision::lsb(v));
}

struct WindowHash {
  std::size_t operator()(const std::vector<std::int64_t>& w) const noexcept {
    std::uint64_t h = w.size();
    for (auto v : w) h = mix(h, static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

// Node of `tree` for the level-`level` cube with (possibly out-of-range) coordinates.
std::int64_t locate(const Tree& tree, int level, const std::vector<BigInt>& coords) {
  const BigInt side = BigInt(1) << level;
  for (const auto& c : coords) {
    if (c < 0 || c >= side) return kNone;
  }
  std::uint32_t id = 0;
  for (int l = 0; l < level; ++l) {
    unsigned c = 0;
    for (std::size_t j = 0; j < coords.size(); ++j) {
      if (boost::multiprecision::bit_test(coords[j], static_cast<unsigned>(level - l - 1))) c |= 1U << j;
    }
    if (!(tree.levels[static_cast<std::size_t>(l)].mask[id] & (1U << c))) return kNone;
    id = tree.child(l, id, c);
  }
  return id;
}

bool leaves_off_boundary(const DyadicSet& s) {
  if (s.is_empty()) return false;
  if (s.depth() < 2) return true;
  const Tree& t = *s.tree();
  const int d = s.dim();
  // flags: bit 2j = cube touches x_j = 0, bit 2j+1 = cube touches x_j = 1.
  std::vector<std::unordered_map<std::uint64_t, bool>> memo(static_cast<std::size_t>(s.depth()) + 1);
  std::function<bool(int, std::uint32_t, unsigned)> rec = [&](int l, std::uint32_t id, unsigned flags) -> bool {
    if (l == s.depth()) return flags == 0;
    const std::uint64_t key = (static_cast<std::uint64_t>(id) << 8) | flags;
    auto& m = memo[static_cast<std::size_t>(l)];
    if (auto it = m.find(key); it != m.end()) return it->second;
    bool found = false;
    const auto mask = t.levels[static_cast<std::size_t>(l)].mask[id];
    for (unsigned c = 0; c < (1U << d) && !found; ++c) {
      if (!(mask & (1U << c))) continue;
      unsigned nf = 0;
      for (int j = 0; j < d; ++j) {
        const bool bit = (c >> j) & 1U;
        if ((flags >> (2 * j)) & 1U && !bit) nf |= 1U << (2 * j);
        if ((flags >> (2 * j + 1)) & 1U && bit) nf |= 1U << (2 * j + 1);
      }
      found = rec(l + 1, t.child(l, id, c), nf);
    }
    m.emplace(key, found);
    return found;
  };
  return rec(0, 0, (1U << (2 * d)) - 1U);
}

DyadicSet zoom_set(const DyadicSet& a, int m, std::span<const Rational> u) {
  const int d = a.dim();
  if (m < 0 || m > a.depth()) throw InvalidArgument("zoom: m must lie in [0, depth]");
  if (u.size() != static_cast<std::size_t>(d)) throw InvalidArgument("zoom: translation has wrong dimension");
  const int L = a.depth() - m;
  // t_j = u_j 2^L must be an integer.
  std::vector<BigInt> t(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const Rational scaled = u[static_cast<std::size_t>(j)] * Rational(BigInt(1) << L);
    if (denominator(scaled) != 1) {
      throw InvalidArgument("zoom: translation " + to_string(u[static_cast<std::size_t>(j)]) +
                            " is not a multiple of 2^-" + std::to_string(L));
    }
    t[static_cast<std::size_t>(j)] = numerator(scaled);
  }
  if (a.is_empty()) return DyadicSet::empty(d, L);
  const Tree& src = *a.tree();
  // At result level r the cube R overlaps source level-(m+r) cubes B + e with
  // B_j = R_j - ceil(t_j / 2^(L-r)); slot e_j = 1 is needed only while t_j is not a
  // multiple of 2^(L-r). Going down one level moves B_j to 2 B_j + b_j + delta_j(r).
  std::vector<std::vector<unsigned>> delta(static_cast<std::size_t>(L), std::vector<unsigned>(static_cast<std::size_t>(d)));
  std::vector<unsigned> tz(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    const auto& tj = t[static_cast<std::size_t>(j)];
    tz[static_cast<std::size_t>(j)] = tj == 0 ? static_cast<unsigned>(L) + 1 : trailing_zeros(tj);
    for (int r = 0; r < L; ++r) {
      const BigInt v = 2 * ceil_shift(tj, static_cast<unsigned>(L - r)) - ceil_shift(tj, static_cast<unsigned>(L - r - 1));
      delta[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] = static_cast<unsigned>(v);
    }
  }
  auto slot_needed = [&](int r, int j, unsigned e) {
    return e == 0 || tz[static_cast<std::size_t>(j)] < static_cast<unsigned>(L - r);
  };
  const unsigned fan = 1U << d;

  std::vector<std::int64_t> root_window(fan, kNone);
  for (unsigned e = 0; e < fan; ++e) {
    bool ok = true;
    std::vector<BigInt> coords(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const unsigned ej = (e >> j) & 1U;
      if (!slot_needed(0, j, ej)) ok = false;
      coords[static_cast<std::size_t>(j)] = -ceil_shift(t[static_cast<std::size_t>(j)], static_cast<unsigned>(L)) + ej;
    }
    if (ok) root_window[e] = locate(src, m, coords);
  }

  TreeBuilder builder(d, L);
  std::vector<std::unordered_map<std::vector<std::int64_t>, std::int64_t, WindowHash>> memo(static_cast<std::size_t>(L) + 1);
  std::function<std::int64_t(int, const std::vector<std::int64_t>&)> rec =
      [&](int r, const std::vector<std::int64_t>& w) -> std::int64_t {
    if (std::all_of(w.begin(), w.end(), [](std::int64_t v) { return v == kNone; })) return kNone;
    if (r == L) return w[0] == kNone ? kNone : builder.leaf();
    auto& mm = memo[static_cast<std::size_t>(r)];
    if (auto it = mm.find(w); it != mm.end()) return it->second;
    const int sl = m + r;
    const auto& lv = src.levels[static_cast<std::size_t>(sl)];
    std::array<std::int64_t, 1U << kMaxDim> kids;
    kids.fill(kNone);
    std::vector<std::int64_t> cw(fan);
    for (unsigned b = 0; b < fan; ++b) {
      for (unsigned e2 = 0; e2 < fan; ++e2) {
        unsigned parent_slot = 0;
        unsigned child_no = 0;
        bool needed = true;
        for (int j = 0; j < d; ++j) {
          const unsigned ej = (e2 >> j) & 1U;
          if (!slot_needed(r + 1, j, ej)) needed = false;
          const unsigned o = ((b >> j) & 1U) + delta[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] + ej;
          parent_slot |= (o >> 1) << j;
          child_no |= (o & 1U) << j;
        }
        std::int64_t id = kNone;
        if (needed && parent_slot < fan) {
          const std::int64_t p = w[parent_slot];
          if (p != kNone && (lv.mask[static_cast<std::size_t>(p)] & (1U << child_no))) {
            id = src.child(sl, static_cast<std::uint32_t>(p), child_no);
          }
        }
        cw[e2] = id;
      }
      kids[b] = rec(r + 1, cw);
    }
    const auto id = builder.node(r, std::span<const std::int64_t>(kids.data(), fan));
    mm.emplace(w, id);
    return id;
  };
  return DyadicSet::from_tree(d, L, builder.finish(rec(0, root_window)));
}

}  // namespace

ZoomResult zoom(const DyadicSet& a, int m, std::span<const Rational> u) {
  ZoomResult out{zoom_set(a, m, u), false};
  if (out.set.is_empty()) throw InvalidArgument("zoom: the zoomed view does not meet [0,1]^d");
  out.meets_open_cube = leaves_off_boundary(out.set);
  return out;
}

DyadicSet translate(const DyadicSet& a, std::span<const Rational> v) { return zoom_set(a, 0, v); }

std::vector<Piece> decompose(const Word& x, int n, std::size_t cap) {
  if (n < 0 || static_cast<std::size_t>(n) > x.length()) throw InvalidArgument("decompose: n out of range");
  if (n > 62) throw InvalidArgument("decompose: n must be <= 62");
  const DyadicSet k = kx_set(x);
  const int depth = k.depth();
  const auto level_cubes = k.cubes(n, cap);
  // The digit-restriction tree has exactly one node per level.
  std::vector<Piece> out;
  out.reserve(level_cubes.size());
  for (const auto& cube : level_cubes) {
    TreeBuilder b(1, depth);
    std::int64_t id = b.import(*k.tree(), n, 0, n);
    for (int l = n - 1; l >= 0; --l) {
      std::int64_t kids[2] = {kNone, kNone};
      kids[(cube.coords[0] >> (n - 1 - l)) & 1U] = id;
      id = b.node(l, kids);
    }
    out.push_back({Rational(cube.coords[0]) / Rational(BigInt(1) << n), DyadicSet::from_tree(1, depth, b.finish(id))});
  }
  std::sort(out.begin(), out.end(), [](const Piece& p, const Piece& q) { return p.u < q.u; });
  return out;
}

bool verify_sandwich(const DyadicSet& e, const DyadicSet& c, std::span<const std::vector<Rational>> translates) {
  require_same_shape(e, c, "verify_sandwich");
  if (translates.empty()) throw InvalidArgument("verify_sandwich: need at least one translate");
  const DyadicSet first = translate(c, translates[0]);
  if (first.leaf_count() != c.leaf_count()) return false;  // C + v_1 sticks out of the cube
  if (!is_subset(first, e)) return false;
  DyadicSet cover = first;
  for (std::size_t i = 1; i < translates.size(); ++i) cover = set_union(cover, translate(c, translates[i]));
  return is_subset(e, cover);
}

}  // namespace microdim
