#pragma once

// Finite metric spaces, packings and covers.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace microdim {

enum class PointMetric { sup, euclidean };

/// A finite metric space: either coordinates with a norm metric, or an explicit distance
/// matrix. Coordinate spaces answer ball queries through a sorted first-coordinate index.
class FiniteMetricSpace {
 public:
  FiniteMetricSpace() = default;
  static FiniteMetricSpace from_points(std::vector<std::vector<double>> points, PointMetric metric);
  /// Rejects matrices that are not square, symmetric, nonnegative with zero diagonal.
  static FiniteMetricSpace from_matrix(std::vector<std::vector<double>> dist);

  /// One point per line, comma-separated coordinates; '#' lines are comments.
  static FiniteMetricSpace load_points_csv(std::istream& in, PointMetric metric);
  /// Square matrix, one row per line, comma-separated.
  static FiniteMetricSpace load_matrix_csv(std::istream& in);

  std::size_t size() const noexcept { return n_; }
  bool has_coords() const noexcept { return !points_.empty(); }
  const std::vector<double>& point(std::size_t i) const { return points_[i]; }
  double distance(std::size_t i, std::size_t j) const;

  /// Indices of points within closed distance r of point `center`, ascending.
  std::vector<std::size_t> ball(std::size_t center, double r) const;
  /// Same, restricted to the ascending index list `among`.
  std::vector<std::size_t> ball_within(std::size_t center, double r, const std::vector<std::size_t>& among) const;

  /// Checks symmetry and the triangle inequality on up to `samples` index triples drawn
  /// deterministically from `seed` (all triples when the space is small).
  bool check_axioms(std::size_t samples, std::uint64_t seed) const;

 private:
  std::size_t n_ = 0;
  PointMetric metric_ = PointMetric::euclidean;
  std::vector<std::vector<double>> points_;
  std::vector<std::vector<double>> matrix_;
  std::vector<std::size_t> by_x_;  // indices sorted by first coordinate
};

/// Greedy inclusion-maximal delta-packing (pairwise distance > delta) scanning `order`
/// (all points in index order when empty).
std::vector<std::size_t> greedy_packing(const FiniteMetricSpace& space, double delta,
                                        const std::vector<std::size_t>& order = {});

/// Maximum-cardinality delta-packing by branch and bound; at most 64 points.
std::vector<std::size_t> exact_max_packing(const FiniteMetricSpace& space, double delta);

/// Minimum number of closed radius-r balls centred at points of the space that cover it;
/// branch and bound, at most 64 points.
std::size_t exact_min_cover(const FiniteMetricSpace& space, double r);

/// True iff `s` is a delta-packing to which no further point can be added.
bool is_maximal_packing(const FiniteMetricSpace& space, const std::vector<std::size_t>& s, double delta);

}  // namespace microdim
