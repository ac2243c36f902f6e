#pragma once

// From a presented target set A to sequences whose densities sweep out A: the map
// phi on finite codes, the block map s -> (alpha|n)(beta|k(s)), and psi(x).

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "microdim/dyadic.hpp"
#include "microdim/rational.hpp"
#include "microdim/seq.hpp"
#include "microdim/target.hpp"

namespace microdim {

struct VarphiOptions {
  /// For targets inside (0, gamma]: a value <= 0 at depth n becomes gamma 2^-n.
  std::optional<Rational> positive_floor;
  /// Largest F_m index scanned when looking for m(s).
  int max_f_index = 4096;
};

/// phi on finite codes, by the four-case induction: a cylinder missing F takes a fresh
/// f-value; one missing G inherits its parent's value; otherwise the value is inherited
/// while m(s) (least m with [s] meeting F_m) stays put and refreshed when it grows.
/// phi(empty) is the minimum of A; every value is clamped into [min A, max A].
/// Memoized and safe to share between threads.
class VarphiMap {
 public:
  explicit VarphiMap(TargetSpec spec, VarphiOptions options = {});

  const TargetSpec& spec() const { return spec_; }
  Rational lower() const { return a_; }
  Rational upper() const { return b_; }

  Rational operator()(const Word& s) const;
  /// phi(x|0), ..., phi(x|n).
  std::vector<Rational> along(const Word& x, std::size_t n) const;
  /// m(s), or nullopt when [s] misses F.
  std::optional<int> m_index(const Word& s) const;

 private:
  Rational raw(const Word& s, const Rational& parent_value) const;

  TargetSpec spec_;
  VarphiOptions options_;
  Rational a_;
  Rational b_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, Rational> memo_;
};

/// Convenience: phi(s) with a fresh map.
Rational build_varphi(const TargetSpec& spec, const Word& s);

enum class KRule { minimal, nearest };

/// Integer form of (a, b, target) over a common denominator, for repeated k searches.
struct BlockTarget {
  BlockTarget(const Rational& a, const Rational& b, const Rational& target);
  Rational a;
  Rational b;
  Rational target;
  BigInt A;  // a * D
  BigInt B;
  BigInt T;
  BigInt D;
  long double af;
  long double bf;
  long double tf;
};

/// A k in (sqrt(n) - 1, n sqrt(n) + 1) with |(n a + k b)/(n + k) - target| <= 2/sqrt(n):
/// the smallest such k (KRule::minimal) or the one whose ratio is closest to the target
/// (KRule::nearest, ties to the smaller). When a == b the answer is ceil(sqrt(n)).
/// Throws InvariantViolation if no valid k exists (impossible for valid input).
std::uint64_t choose_k(std::uint64_t n, const Rational& a, const Rational& b, const Rational& target,
                       KRule rule = KRule::minimal);
std::uint64_t choose_k(std::uint64_t n, const BlockTarget& t, KRule rule = KRule::minimal);

/// Exact test of both conditions on k.
bool k_is_valid(std::uint64_t n, std::uint64_t k, const BlockTarget& t);

struct PsiBlock {
  std::uint64_t n = 0;  // code length = alpha part length
  std::uint64_t k = 0;  // beta part length
  Rational phi;         // phi(x|n)
};

struct PsiPrefix {
  Word word;
  /// boundaries[i] is where block i starts; boundaries.back() == word.length().
  std::vector<std::size_t> boundaries;
  std::vector<PsiBlock> blocks;
  Rational a;
  Rational b;
};

/// Block i is empty for i = 0 and (alpha|i)(beta|k(x|i)) otherwise, for i < blocks;
/// alpha, beta are the balanced sequences of densities min A and max A. Requires
/// blocks <= length(x) + 1. The block map uses KRule::nearest.
PsiPrefix build_psi_prefix(const Word& x, const VarphiMap& varphi, std::size_t blocks,
                           KRule rule = KRule::nearest);
PsiPrefix build_psi_prefix(const Word& x, const TargetSpec& spec, std::size_t blocks,
                           KRule rule = KRule::nearest);

struct DensityReport {
  std::size_t blocks_checked = 0;
  /// max over blocks of |rho(block) - phi| minus its allowance 2/(n+k) + 2/sqrt(n)
  /// (nonpositive when every block passes).
  double worst_slack = 0;
  /// length of the last block over the whole prefix, and the bound
  /// (n + n sqrt(n) + 1) / (sum over i <= n of (i + 1)) it must respect.
  double last_block_fraction = 0;
  double fraction_bound = 0;
  Rational cumulative_density;
  double cumulative_error = 0;  // |cumulative density - expected|
};

/// Checks every nonempty block exactly against its allowance and throws
/// InvariantViolation on any breach. Requires at least two blocks.
DensityReport realized_density_check(const PsiPrefix& p, const Rational& expected);

using GalleryGenerator = std::function<DyadicSet(int depth)>;

/// Copy j (j = 1 .. depth-1) is generator (j-1) mod #generators at depth depth-j, scaled
/// by 2^-j and placed in the cube [2^-j, 2^-j+1]^d; the chain of corner cubes at the
/// origin is kept, so the accumulation point 0 belongs to the set. Throws InvalidArgument
/// when some generator would never be placed.
DyadicSet assemble_gallery(const std::vector<GalleryGenerator>& generators, int depth, int d);

}  // namespace microdim
