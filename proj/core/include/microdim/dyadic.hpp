#pragma once

// Finite unions of closed dyadic cubes in [0,1]^d, stored as a shared (hash-consed) tree
// of live cubes. Subtrees that are equal as sets share one node, so digit-restriction
// sets thousands of levels deep cost one node per level.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "microdim/rational.hpp"
#include "microdim/seq.hpp"

namespace microdim {

inline constexpr int kMaxDim = 4;

/// The cube prod_j [coords_j 2^-level, (coords_j+1) 2^-level].
struct CubeIdx {
  int level = 0;
  std::vector<std::uint64_t> coords;

  CubeIdx parent() const;
  /// Child number c in [0, 2^d): bit j of c is the low bit of the child's j-th coordinate.
  CubeIdx child(unsigned c) const;
  friend bool operator==(const CubeIdx&, const CubeIdx&) = default;
  friend auto operator<=>(const CubeIdx&, const CubeIdx&) = default;
};

namespace detail {

/// Nodes of one tree level. Node i has child mask mask[i] and its live children are
/// kids[first[i] .. first[i] + popcount(mask[i])) in child-number order.
struct Level {
  std::vector<std::uint16_t> mask;
  std::vector<std::uint32_t> first;
  std::vector<std::uint32_t> kids;

  std::size_t size() const { return mask.size(); }
};

/// levels[depth] always holds exactly one node (the leaf cube). The root is node 0 of
/// levels[0]. Node ids are assigned in breadth-first order, so two trees describing the
/// same set have identical tables.
struct Tree {
  int d = 1;
  int depth = 0;
  std::vector<Level> levels;

  std::uint32_t child(int level, std::uint32_t node, unsigned c) const;
};

inline constexpr std::int64_t kNone = -1;

/// Builds hash-consed trees bottom-up. node() returns kNone for an empty child set.
class TreeBuilder {
 public:
  TreeBuilder(int d, int depth);

  int dim() const { return d_; }
  int depth() const { return depth_; }

  /// The leaf node at `depth`.
  std::int64_t leaf() const { return 0; }
  /// Node at `level` (< depth) whose child c is children[c] (kNone = dead).
  std::int64_t node(int level, std::span<const std::int64_t> children);

  /// Copies the subtree rooted at (level src_level, node src_node) of `src` so that it
  /// sits at `dst_level` here; levels deeper than this builder's depth are cut off, and a
  /// source that ends early is padded with full cubes.
  std::int64_t import(const Tree& src, int src_level, std::uint32_t src_node, int dst_level);

  /// A full subtree (every child live) rooted at `level`.
  std::int64_t full(int level);

  /// Canonicalizes; root == kNone gives an empty tree pointer.
  std::shared_ptr<const Tree> finish(std::int64_t root) const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<std::uint32_t>& key) const noexcept;
  };
  int d_;
  int depth_;
  std::vector<Level> levels_;
  std::vector<std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, KeyHash>> index_;
  std::vector<std::int64_t> full_;
  std::unordered_map<std::uint64_t, std::int64_t> import_memo_;
  const Tree* import_src_ = nullptr;
};

}  // namespace detail

class DyadicSet {
 public:
  /// The empty set in [0,1] at depth 0.
  DyadicSet() = default;
  static DyadicSet empty(int d, int depth);
  static DyadicSet full(int d, int depth);
  static DyadicSet from_leaves(int d, int depth, std::span<const CubeIdx> leaves);
  static DyadicSet from_tree(int d, int depth, std::shared_ptr<const detail::Tree> tree);

  int dim() const noexcept { return d_; }
  int depth() const noexcept { return depth_; }
  bool is_empty() const noexcept { return tree_ == nullptr; }

  /// Number of live cubes at every level 0..depth.
  std::vector<BigInt> level_counts() const;
  BigInt count(int level) const;
  BigInt leaf_count() const { return count(depth_); }

  /// Live cubes at `level`, lexicographic by coordinates; throws ResourceExhausted past
  /// `cap` cubes. Coordinates must fit 64 bits (level <= 62).
  std::vector<CubeIdx> cubes(int level, std::size_t cap = std::size_t{1} << 24) const;
  std::vector<CubeIdx> leaves(std::size_t cap = std::size_t{1} << 24) const {
    return cubes(depth_, cap);
  }

  /// True iff the cube (at any level <= depth) is live.
  bool contains(const CubeIdx& cube) const;

  /// The set of live level-`level` cubes as a set of that depth.
  DyadicSet truncate(int level) const;

  const detail::Tree* tree() const noexcept { return tree_.get(); }
  const std::shared_ptr<const detail::Tree>& shared_tree() const noexcept { return tree_; }

  friend bool operator==(const DyadicSet& a, const DyadicSet& b);

 private:
  DyadicSet(int d, int depth, std::shared_ptr<const detail::Tree> tree)
      : d_(d), depth_(depth), tree_(std::move(tree)) {}
  int d_ = 1;
  int depth_ = 0;
  std::shared_ptr<const detail::Tree> tree_;
};

/// K(x) at depth length(x): the 2^sigma(x) intervals whose left endpoints lie in F_n(x).
DyadicSet kx_set(const Word& x);

DyadicSet product(const DyadicSet& a, const DyadicSet& b);
DyadicSet set_union(const DyadicSet& a, const DyadicSet& b);
DyadicSet set_intersection(const DyadicSet& a, const DyadicSet& b);
bool is_subset(const DyadicSet& a, const DyadicSet& b);

enum class Metric { sup, euclidean };

/// Exact Hausdorff distance in the sup metric between the two cube unions; it is always
/// a multiple of 2^-(depth+1).
Rational hausdorff_sup_exact(const DyadicSet& a, const DyadicSet& b);
/// Sup metric: exact (converted to double). Euclidean: exact for d = 1, otherwise
/// certified to within `tolerance` by branch and bound over cube geometry.
double hausdorff_distance(const DyadicSet& a, const DyadicSet& b, Metric metric,
                          double tolerance = 1e-9);

struct ZoomResult {
  DyadicSet set;
  /// Some leaf cube of the result is disjoint from the boundary of [0,1]^d; for results
  /// shallower than two levels, simply non-emptiness.
  bool meets_open_cube = false;
};

/// (2^m A + u) ∩ [0,1]^d at depth depth(A) - m. Each u_j must be a dyadic rational with
/// u_j 2^(depth-m) an integer, so translated cubes land on the grid. Cubes that would
/// only touch [0,1]^d along their boundary are dropped.
ZoomResult zoom(const DyadicSet& a, int m, std::span<const Rational> u);

/// A + v clipped to [0,1]^d (zoom with m = 0, empty results allowed).
DyadicSet translate(const DyadicSet& a, std::span<const Rational> v);

struct Piece {
  Rational u;
  DyadicSet set;
};

/// The 2^sigma(x|n) pieces 2^-n K(T^n x) + u, u in F_n(x), of kx_set(x), in increasing u.
std::vector<Piece> decompose(const Word& x, int n, std::size_t cap = std::size_t{1} << 20);

/// C + v_1 ⊂ E ⊂ ⋃_i (C + v_i) as cube sets at the common depth.
bool verify_sandwich(const DyadicSet& e, const DyadicSet& c,
                     std::span<const std::vector<Rational>> translates);

nlohmann::json to_json(const DyadicSet& a);
DyadicSet dyadic_from_json(const nlohmann::json& j);

/// "DYS1", d (u8), empty flag (u8), depth (u32 LE), mask count (u64 LE), then the child
/// masks of all live non-leaf cubes in breadth-first order, each 2^d bits, packed LSB-first.
std::vector<std::uint8_t> to_binary(const DyadicSet& a);
DyadicSet dyadic_from_binary(std::span<const std::uint8_t> bytes);

}  // namespace microdim
