#pragma once

// Fractal percolation in [0,1]^d with generation-dependent retention 2^-alpha_n. Every
// cube draws one uniform variate from a keyed hash of its path, so samples under
// different schedules are coupled exactly: lower alphas keep a superset of cubes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "microdim/dyadic.hpp"
#include "microdim/philox.hpp"
#include "microdim/rational.hpp"
#include "microdim/realize.hpp"
#include "microdim/seq.hpp"

namespace microdim {

/// alpha_1, alpha_2, ...; past the listed values the limit (or else the last value) repeats.
class RetentionSchedule {
 public:
  RetentionSchedule(std::vector<Rational> alphas, std::optional<Rational> limit = std::nullopt);
  static RetentionSchedule constant(const Rational& alpha);

  /// alpha_n for n >= 1.
  const Rational& alpha(int n) const;
  /// 2^-alpha_n.
  double retention(int n) const;
  /// Throws InvalidArgument unless every alpha lies in [0, d].
  void validate(int d) const;

  const std::vector<Rational>& alphas() const { return alphas_; }
  const std::optional<Rational>& limit() const { return limit_; }

 private:
  std::vector<Rational> alphas_;
  std::optional<Rational> limit_;
  std::vector<double> retention_;
  double limit_retention_ = 1;
};

/// Uniform variates keyed by (seed, copy, cube). The cube's path is its sequence of child
/// numbers from the root, so d * level must not exceed 64.
class PercField {
 public:
  explicit PercField(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

  /// A multiple of 2^-53 in [0, 1).
  double variate(std::uint32_t copy_key, const CubeIdx& cube) const;
  double variate_at(std::uint32_t copy_key, int level, std::uint64_t path) const {
    const Philox4x32 out = philox4x32_10(
        {static_cast<std::uint32_t>(level), copy_key, static_cast<std::uint32_t>(path),
         static_cast<std::uint32_t>(path >> 32)},
        {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    const std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 21) | (out[1] >> 11);
    return static_cast<double>(bits) * 0x1p-53;
  }

 private:
  std::uint64_t seed_;
};

/// Child-number path of a cube (d bits per level, root first).
std::uint64_t cube_path(const CubeIdx& cube);
CubeIdx cube_from_path(std::uint64_t path, int level, int d);

struct Completion {
  CubeIdx cube;         // a cube at the sample's final depth, inside K
  int died_level = -1;  // level of the dead-end cube it completes; -1 for the anchor point
};

struct PercSample {
  /// Cubes alive at the final depth.
  DyadicSet survivors;
  /// For each dead-end cube that met K: the first final-depth cube of K inside it.
  std::vector<Completion> completions;
  /// Alive cubes per generation 0..depth (generation 0 is the root cube).
  std::vector<std::uint64_t> level_counts;

  /// survivors together with the completion cubes.
  DyadicSet with_completions() const;
};

/// One sample inside `root` (default: the unit cube) for `depth` generations; the result
/// has depth root.level + depth. The cube at generation n survives iff its parent did and
/// its variate is below 2^-alpha_n.
PercSample sample(const RetentionSchedule& schedule, const PercField& field, std::uint32_t copy_key,
                  int depth, int d, const std::optional<CubeIdx>& root = std::nullopt);

/// As `sample`, tracking only cubes of K (which is treated as full below its depth) and
/// recording completion points for dead ends.
PercSample sample_in(const DyadicSet& k, const RetentionSchedule& schedule, const PercField& field,
                     std::uint32_t copy_key, int depth,
                     const std::optional<CubeIdx>& root = std::nullopt);

std::pair<PercSample, PercSample> coupled_pair(const RetentionSchedule& a, const RetentionSchedule& b,
                                               const PercField& field, std::uint32_t copy_key,
                                               int depth, int d);

/// Extinction probability of the branching process where each of `children` offspring is
/// kept independently with probability p.
double gw_extinction(double p, int children);

struct DepthStats {
  int depth = 0;
  std::uint64_t surviving = 0;
  double survival = 0;
  double ci_low = 0;  // Wilson 95% interval
  double ci_high = 0;
  double mean_count = 0;  // alive cubes of K at this depth, over all trials
  double count_se = 0;
  /// Mean of log2(count) / depth over surviving trials; empty when none survived.
  std::optional<double> cond_slope;
};

struct HawkesReport {
  Rational beta;
  std::uint64_t trials = 0;
  std::vector<DepthStats> rows;
  bool survival_nonincreasing = true;
  /// No trial survived to the deepest depth, so its slope is missing.
  bool slope_missing = false;

  std::string csv() const;
};

/// Monte Carlo over `trials` copies of percolation with constant beta, restricted to K.
/// Trial t uses copy key first_copy + t.
HawkesReport hawkes_experiment(const DyadicSet& k, const Rational& beta, std::vector<int> depths,
                               std::uint64_t trials, const PercField& field,
                               std::uint32_t first_copy = 0, unsigned threads = 0);

double wilson_low(std::uint64_t hits, std::uint64_t n);
double wilson_high(std::uint64_t hits, std::uint64_t n);

struct GammaStarOptions {
  /// beta_k for k = 1..; default gamma k / (k + 1).
  std::vector<Rational> betas;
  std::uint64_t estimate_trials = 2000;
  int estimate_generations = 12;
  int max_copies = 64;
};

struct GammaStarConfig {
  Rational gamma;
  std::vector<Rational> betas;      // index k-1
  std::vector<CubeIdx> cubes;       // Q_k, side 2^-k
  std::vector<int> copies;          // i_k
  std::vector<double> survival;     // estimated c_k
  CubeIdx anchor;                   // y0 as a cube at K's depth

  int k_max() const { return static_cast<int>(cubes.size()); }
  /// Throws InvariantViolation unless (1 - c_k)^(i_k) < 1/2 and the cubes are nested.
  void validate() const;
  nlohmann::json to_json() const;
};

/// Chooses y0 by descending K toward the child with the most leaves (first child on ties),
/// takes Q_k as its level-k ancestors, estimates c_k by Monte Carlo, and sets i_k to the
/// least i with (1 - c_k / 2)^i < 1/2, capped at max_copies.
GammaStarConfig make_gamma_star_config(const DyadicSet& k, const Rational& gamma, int k_max,
                                       const PercField& field, const GammaStarOptions& options = {});

/// alpha(x)_n = gamma - phi(x|n) for n = 1..generations, clamped into [0, d].
RetentionSchedule alpha_schedule(const Rational& gamma, const VarphiMap& varphi, const Word& x,
                                 int generations, int d);

/// Union over k <= k_max and i <= i_k of K-restricted samples in Q_k under alpha(x), with
/// copy key (k << 16) | i, together with their completion points and the anchor y0.
/// `depth` is the final level; x needs at least depth - 1 digits.
PercSample gamma_star(const GammaStarConfig& config, const DyadicSet& k, const Word& x,
                      const VarphiMap& varphi, const PercField& field, int depth);

}  // namespace microdim
