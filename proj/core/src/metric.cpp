#include "microdim/metric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <random>
#include <sstream>

#include "microdim/errors.hpp"

namespace microdim {

FiniteMetricSpace FiniteMetricSpace::from_points(std::vector<std::vector<double>> points, PointMetric metric) {
  FiniteMetricSpace s;
  if (!points.empty()) {
    const std::size_t d = points.front().size();
    if (d == 0) throw InvalidArgument("points need at least one coordinate");
    for (const auto& p : points) {
      if (p.size() != d) throw InvalidArgument("points have inconsistent dimension");
      for (double v : p) {
        if (!std::isfinite(v)) throw InvalidArgument("non-finite coordinate");
      }
    }
  }
  s.n_ = points.size();
  s.metric_ = metric;
  s.points_ = std::move(points);
  s.by_x_.resize(s.n_);
  for (std::size_t i = 0; i < s.n_; ++i) s.by_x_[i] = i;
  std::stable_sort(s.by_x_.begin(), s.by_x_.end(),
                   [&](std::size_t a, std::size_t b) { return s.points_[a][0] < s.points_[b][0]; });
  return s;
}

FiniteMetricSpace FiniteMetricSpace::from_matrix(std::vector<std::vector<double>> dist) {
  const std::size_t n = dist.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i].size() != n) throw InvalidArgument("distance matrix is not square");
    if (dist[i][i] != 0) throw InvalidArgument("distance matrix has nonzero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      if (!(dist[i][j] >= 0) || !std::isfinite(dist[i][j])) throw InvalidArgument("distance matrix has a bad entry");
      if (dist[i][j] != dist[j][i]) throw InvalidArgument("distance matrix is not symmetric");
    }
  }
  FiniteMetricSpace s;
  s.n_ = n;
  s.matrix_ = std::move(dist);
  return s;
}

namespace {

std::vector<std::vector<double>> read_rows(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidArgument("bad number in CSV: '" + cell + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

FiniteMetricSpace FiniteMetricSpace::load_points_csv(std::istream& in, PointMetric metric) {
  return from_points(read_rows(in), metric);
}

FiniteMetricSpace FiniteMetricSpace::load_matrix_csv(std::istream& in) { return from_matrix(read_rows(in)); }

double FiniteMetricSpace::distance(std::size_t i, std::size_t j) const {
  if (!matrix_.empty() || points_.empty()) return matrix_[i][j];
  const auto& p = points_[i];
  const auto& q = points_[j];
  double acc = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double g = std::abs(p[k] - q[k]);
    if (metric_ == PointMetric::sup) {
      acc = std::max(acc, g);
    } else {
      acc += g * g;
    }
  }
  return metric_ == PointMetric::sup ? acc : std::sqrt(acc);
}

std::vector<std::size_t> FiniteMetricSpace::ball(std::size_t center, double r) const {
  std::vector<std::size_t> out;
  if (has_coords()) {
    const double x = points_[center][0];
    auto lo = std::lower_bound(by_x_.begin(), by_x_.end(), x - r,
                               [&](std::size_t i, double v) { return points_[i][0] < v; });
    for (auto it = lo; it != by_x_.end() && points_[*it][0] <= x + r; ++it) {
      if (distance(center, *it) <= r) out.push_back(*it);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (distance(center, i) <= r) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FiniteMetricSpace::ball_within(std::size_t center, double r,
                                                        const std::vector<std::size_t>& among) const {
  std::vector<std::size_t> out;
  if (has_coords() && among.size() > 64) {
    for (auto i : ball(center, r)) {
      if (std::binary_search(among.begin(), among.end(), i)) out.push_back(i);
    }
    return out;
  }
  for (auto i : among) {
    if (distance(center, i) <= r) out.push_back(i);
  }
  return out;
}

bool FiniteMetricSpace::check_axioms(std::size_t samples, std::uint64_t seed) const {
  constexpr double kSlack = 1e-12;
  auto ok = [&](std::size_t i, std::size_t j, std::size_t k) {
    const double ij = distance(i, j);
    return ij == distance(j, i) && ij >= 0 && distance(i, i) == 0 &&
           ij <= distance(i, k) + distance(k, j) + kSlack * (1 + ij);
  };
  if (n_ == 0) return true;
  if (n_ * n_ * n_ <= samples) {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t k = 0; k < n_; ++k)
          if (!ok(i, j, k)) return false;
    return true;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
  for (std::size_t s = 0; s < samples; ++s) {
    if (!ok(pick(rng), pick(rng), pick(rng))) return false;
  }
  return true;
}

std::vector<std::size_t> greedy_packing(const FiniteMetricSpace& space, double delta,
                                        const std::vector<std::size_t>& order) {
  if (!(delta > 0)) throw InvalidArgument("greedy_packing: delta must be positive");
  std::vector<char> blocked(space.size(), 0);
  std::vector<std::size_t> out;
  auto consider = [&](std::size_t i) {
    if (blocked[i]) return;
    out.push_back(i);
    for (auto j : space.ball(i, delta)) blocked[j] = 1;
  };
  if (order.empty()) {
    for (std::size_t i = 0; i < space.size(); ++i) consider(i);
  } else {
    for (auto i : order) consider(i);
  }
  return out;
}

bool is_maximal_packing(const FiniteMetricSpace& space, const std::vector<std::size_t>& s, double delta) {
  for (std::size_t a = 0; a < s.size(); ++a)
    for (std::size_t b = a + 1; b < s.size(); ++b)
      if (space.distance(s[a], s[b]) <= delta) return false;
  std::vector<char> in(space.size(), 0);
  for (auto i : s) in[i] = 1;
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (in[i]) continue;
    bool addable = true;
    for (auto j : s) {
      if (space.distance(i, j) <= delta) {
        addable = false;
        break;
      }
    }
    if (addable) return false;
  }
  return true;
}

namespace {

std::vector<std::uint64_t> closeness(const FiniteMetricSpace& space, double r) {
  const std::size_t n = space.size();
  std::vector<std::uint64_t> close(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (space.distance(i, j) <= r) close[i] |= std::uint64_t{1} << j;
  return close;
}

void check_small(const FiniteMetricSpace& space, const char* what) {
  if (space.size() > 64) throw ResourceExhausted(std::string(what) + ": exact search supports at most 64 points");
}

}  // namespace

std::vector<std::size_t> exact_max_packing(const FiniteMetricSpace& space, double delta) {
  check_small(space, "exact_max_packing");
  if (!(delta > 0)) throw InvalidArgument("exact_max_packing: delta must be positive");
  const std::size_t n = space.size();
  if (n == 0) return {};
  // Maximum independent set of the conflict graph (distance <= delta).
  const auto conflict = closeness(space, delta);
  std::uint64_t best_set = 0;
  int best = 0;
  auto rec = [&](auto&& self, std::uint64_t cand, std::uint64_t chosen, int size) -> void {
    if (cand == 0) {
      if (size > best) {
        best = size;
        best_set = chosen;
      }
      return;
    }
    if (size + std::popcount(cand) <= best) return;
    // Branch on a vertex of maximum degree within the candidates.
    int pick = -1;
    int deg = -1;
    for (std::uint64_t c = cand; c; c &= c - 1) {
      const int v = std::countr_zero(c);
      const int dv = std::popcount(conflict[static_cast<std::size_t>(v)] & cand);
      if (dv > deg) {
        deg = dv;
        pick = v;
      }
    }
    const std::uint64_t bit = std::uint64_t{1} << pick;
    if (deg == 1) {
      // Only self-conflict: every candidate is independent of the rest.
      self(self, 0, chosen | cand, size + std::popcount(cand));
      return;
    }
    self(self, cand & ~conflict[static_cast<std::size_t>(pick)], chosen | bit, size + 1);
    self(self, cand & ~bit, chosen, size);
  };
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  rec(rec, all, 0, 0);
  std::vector<std::size_t> out;
  for (std::uint64_t c = best_set; c; c &= c - 1) out.push_back(static_cast<std::size_t>(std::countr_zero(c)));
  return out;
}

std::size_t exact_min_cover(const FiniteMetricSpace& space, double r) {
  check_small(space, "exact_min_cover");
  if (!(r >= 0)) throw InvalidArgument("exact_min_cover: radius must be nonnegative");
  const std::size_t n = space.size();
  if (n == 0) return 0;
  const auto cover = closeness(space, r);
  const std::uint64_t all = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  // Upper bound from a greedy cover.
  std::size_t best = 0;
  {
    std::uint64_t left = all;
    while (left) {
      std::size_t pick = 0;
      int gain = -1;
      for (std::size_t i = 0; i < n; ++i) {
        const int g = std::popcount(cover[i] & left);
        if (g > gain) {
          gain = g;
          pick = i;
        }
      }
      left &= ~cover[pick];
      ++best;
    }
  }
  int widest = 0;
  for (auto c : cover) widest = std::max(widest, std::popcount(c));
  auto rec = [&](auto&& self, std::uint64_t left, std::size_t used) -> void {
    if (left == 0) {
      best = std::min(best, used);
      return;
    }
    const auto lower = used + static_cast<std::size_t>((std::popcount(left) + widest - 1) / widest);
    if (lower >= best) return;
    // The uncovered point with the fewest covering balls.
    int point = -1;
    int options = 65;
    for (std::uint64_t c = left; c; c &= c - 1) {
      const int v = std::countr_zero(c);
      const int k = std::popcount(cover[static_cast<std::size_t>(v)]);  // symmetric: balls containing v
      if (k < options) {
        options = k;
        point = v;
      }
    }
    for (std::uint64_t c = cover[static_cast<std::size_t>(point)]; c; c &= c - 1) {
      const int centre = std::countr_zero(c);
      self(self, left & ~cover[static_cast<std::size_t>(centre)], used + 1);
    }
  };
  rec(rec, all, 0);
  return best;
}

}  // namespace microdim
