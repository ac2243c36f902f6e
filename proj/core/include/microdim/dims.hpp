#pragma once

// Covering and packing count series and the slope estimators built on them.

#include <span>
#include <string>
#include <vector>

#include "microdim/dyadic.hpp"
#include "microdim/metric.hpp"
#include "microdim/rational.hpp"

namespace microdim {

enum class CountKind { covering, packing };

struct CountEntry {
  int level = 0;
  BigInt count;
};

struct CountSeries {
  CountKind kind = CountKind::covering;
  /// False when some count came from a heuristic (greedy) search rather than an exact one.
  bool exact = true;
  std::vector<CountEntry> entries;

  /// "level,count,log2count_over_n" rows; the level-0 ratio is written as 0.
  std::string csv() const;
};

/// Number of live level-m cubes for each requested m (grid proxy for N_m).
CountSeries covering_counts(const DyadicSet& a, std::span<const int> levels);
/// All levels 0..depth.
CountSeries covering_counts(const DyadicSet& a);

struct DimEstimate {
  double lower = 0;
  double upper = 0;
};

/// min and max of log2(count)/n over the last `window` entries with n >= 1; window 0
/// means the top third of the available levels.
DimEstimate box_dim_estimate(const CountSeries& series, int window = 0);

/// P_n at delta = 2^-n: exact maximum packings up to 64 points, greedy beyond (flagged).
CountSeries packing_counts(const FiniteMetricSpace& space, std::span<const int> levels);
/// N_n with balls of radius 2^-n centred in the space: exact up to 64 points; beyond that
/// a greedy 2^-n packing, which also covers, gives an upper bound (flagged).
CountSeries covering_counts(const FiniteMetricSpace& space, std::span<const int> levels);

/// N_n <= P_n <= N_{n+1} at every level n of P. Throws InvalidArgument when N lacks level n
/// or n+1 for some such n, or when either series is not exact.
bool chain_check(const CountSeries& n, const CountSeries& p);

/// count(A x B) == count(A) count(B) at every level.
bool product_inequality_check(const DyadicSet& a, const DyadicSet& b, std::span<const int> levels);

}  // namespace microdim
