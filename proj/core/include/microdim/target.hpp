#pragma once

// Finitely presented target sets A: a G_delta set G of codes, its complement
// F = union of increasing closed F_m, and a continuous f : G -> A, all queried through
// cylinders [s] = {x : x extends s}.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "microdim/rational.hpp"
#include "microdim/seq.hpp"

namespace microdim {

struct RationalInterval {
  Rational lo;
  Rational hi;
};

/// Call contract for a presented target set. All methods must be deterministic and
/// thread-safe (const, no hidden mutation).
///  - closed_meets(m, s): [s] ∩ F_m ≠ ∅, for m >= 1; monotone in m and inherited by
///    prefixes of s.
///  - meets_f(s): [s] ∩ F ≠ ∅.  meets_g(s): [s] ∩ G ≠ ∅.
///  - f_range(s): a closed interval containing f([s] ∩ G); its width must shrink to 0
///    along every branch.
///  - choose(s): a canonical element of f([s] ∩ G) (only called when [s] meets G).
///  - lower()/upper(): min and max of A.
class TargetOracle {
 public:
  virtual ~TargetOracle() = default;
  virtual Rational lower() const = 0;
  virtual Rational upper() const = 0;
  virtual bool closed_meets(int m, const Word& s) const = 0;
  virtual bool meets_f(const Word& s) const = 0;
  virtual bool meets_g(const Word& s) const = 0;
  virtual RationalInterval f_range(const Word& s) const = 0;
  /// Default: f_range along s⌢0⌢0⌢... until its width is at most 2^-32; a degenerate
  /// interval gives its point, otherwise the midpoint rounded to the 2^-32 grid.
  virtual Rational choose(const Word& s) const;
  virtual nlohmann::json to_json() const = 0;
};

class TargetSpec {
 public:
  /// A = the given values (deduplicated).
  static TargetSpec finite_set(std::vector<Rational> values);
  /// A = union of the closed intervals [lo, hi].
  static TargetSpec interval_union(std::vector<RationalInterval> intervals);
  /// Built-in effective presentations:
  ///   "first_bit" {low, high}: G = all codes, f(x) = low if x(0) = 0 else high.
  ///   "reciprocals": G = all codes, f(x) = 1/(i+1) for i the first 1 of x, f(0^∞) = 0.
  ///   "cofinite_ones": F_m = codes vanishing from index m on, G = codes with infinitely
  ///   many ones, f(x) = 1/4 + x(0)/2.
  static TargetSpec effective(std::string_view name, const nlohmann::json& params = {});
  /// Any user oracle honouring the TargetOracle contract.
  static TargetSpec custom(std::shared_ptr<const TargetOracle> oracle);

  /// B = {z / divisor : z in A}.
  TargetSpec scaled(const Rational& divisor) const;

  const TargetOracle& oracle() const { return *oracle_; }
  Rational lower() const { return oracle_->lower(); }
  Rational upper() const { return oracle_->upper(); }

  nlohmann::json to_json() const { return oracle_->to_json(); }
  static TargetSpec from_json(const nlohmann::json& j);
  /// "set:1/3,1/2", "interval:0.3,0.7[;0.8,0.9...]", "effective:reciprocals",
  /// "effective:first_bit:1/4,3/4", "effective:cofinite_ones".
  static TargetSpec parse(std::string_view text);

 private:
  explicit TargetSpec(std::shared_ptr<const TargetOracle> oracle) : oracle_(std::move(oracle)) {}
  std::shared_ptr<const TargetOracle> oracle_;
};

}  // namespace microdim
