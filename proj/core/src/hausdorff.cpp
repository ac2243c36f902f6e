// Hausdorff distance between finite unions of closed grid cubes.
//
// Sup metric: measured in half-cells (side h/2, h = 2^-depth) the distance from a point
// of a half-cell q to a grid cube c is maximized at a vertex of q, and that maximum is
//   k(q, c) = max_j max(2c_j - q_j, q_j - 2c_j - 1, 0).
// The directed distance is then max over half-cells q of A of min over leaves c of B of
// k(q, c), times h/2; exact and always a multiple of 2^-(depth+1).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "microdim/dyadic.hpp"
#include "microdim/errors.hpp"

namespace microdim {

namespace {

using detail::Tree;
using Coords = std::array<std::int64_t, kMaxDim>;

constexpr int kMaxHausdorffDepth = 60;

void check_operands(const DyadicSet& a, const DyadicSet& b) {
  if (a.dim() != b.dim() || a.depth() != b.depth()) {
    throw InvalidArgument("hausdorff_distance: operands differ in dimension or depth");
  }
  if (a.is_empty() || b.is_empty()) throw InvalidArgument("hausdorff_distance: empty operand");
  if (a.depth() > kMaxHausdorffDepth) {
    throw InvalidArgument("hausdorff_distance: depth must be <= " + std::to_string(kMaxHausdorffDepth));
  }
}

// Nearest-leaf search in the sup metric, half-cell units.
class SupSearch {
 public:
  SupSearch(const Tree& t, int d, int n) : t_(t), d_(d), n_(n) {}

  // min over leaves c of k(q, c), abandoning once the best drops to `stop` or below.
  std::int64_t nearest(const Coords& q, std::int64_t stop) {
    best_ = std::numeric_limits<std::int64_t>::max();
    stop_ = stop;
    Coords root{};
    visit(0, 0, root, q);
    return best_;
  }

 private:
  std::int64_t bound(int l, const Coords& c, const Coords& q) const {
    const int shift = n_ - l + 1;
    std::int64_t k = 0;
    for (int j = 0; j < d_; ++j) {
      const std::int64_t lo = c[static_cast<std::size_t>(j)] << shift;
      const std::int64_t hi = (c[static_cast<std::size_t>(j)] + 1) << shift;
      k = std::max({k, lo - q[static_cast<std::size_t>(j)], q[static_cast<std::size_t>(j)] + 1 - hi});
    }
    return k;
  }

  void visit(int l, std::uint32_t id, const Coords& c, const Coords& q) {
    if (l == n_) {
      best_ = std::min(best_, bound(l, c, q));
      return;
    }
    const auto& lv = t_.levels[static_cast<std::size_t>(l)];
    std::array<std::pair<std::int64_t, unsigned>, 1U << kMaxDim> order;
    std::array<Coords, 1U << kMaxDim> kids;
    unsigned count = 0;
    for (unsigned ch = 0; ch < (1U << d_); ++ch) {
      if (!(lv.mask[id] & (1U << ch))) continue;
      Coords k = c;
      for (int j = 0; j < d_; ++j) k[static_cast<std::size_t>(j)] = 2 * c[static_cast<std::size_t>(j)] + ((ch >> j) & 1U);
      kids[ch] = k;
      order[count++] = {bound(l + 1, k, q), ch};
    }
    std::sort(order.begin(), order.begin() + count);
    for (unsigned i = 0; i < count; ++i) {
      if (best_ <= stop_ || order[i].first >= best_) return;
      visit(l + 1, t_.child(l, id, order[i].second), kids[order[i].second], q);
    }
  }

  const Tree& t_;
  int d_;
  int n_;
  std::int64_t best_ = 0;
  std::int64_t stop_ = 0;
};

std::int64_t directed_sup_halfcells(const DyadicSet& a, const DyadicSet& b) {
  const int d = a.dim();
  const int n = a.depth();
  SupSearch search(*b.tree(), d, n);
  std::int64_t worst = 0;
  for (const auto& leaf : a.leaves()) {
    if (b.contains(leaf)) continue;
    for (unsigned e = 0; e < (1U << d); ++e) {
      Coords q{};
      for (int j = 0; j < d; ++j) {
        q[static_cast<std::size_t>(j)] = 2 * static_cast<std::int64_t>(leaf.coords[static_cast<std::size_t>(j)]) + ((e >> j) & 1U);
      }
      worst = std::max(worst, search.nearest(q, worst));
    }
  }
  return worst;
}

// Euclidean distance from a point (in units of h) to the nearest leaf cube.
class EuclidSearch {
 public:
  EuclidSearch(const Tree& t, int d, int n) : t_(t), d_(d), n_(n) {}

  double nearest(const std::array<double, kMaxDim>& p) {
    best_ = std::numeric_limits<double>::infinity();
    Coords root{};
    visit(0, 0, root, p);
    return std::sqrt(best_);
  }

 private:
  double bound2(int l, const Coords& c, const std::array<double, kMaxDim>& p) const {
    const double side = std::ldexp(1.0, n_ - l);
    double s = 0;
    for (int j = 0; j < d_; ++j) {
      const double lo = static_cast<double>(c[static_cast<std::size_t>(j)]) * side;
      const double hi = lo + side;
      const double x = p[static_cast<std::size_t>(j)];
      const double g = x < lo ? lo - x : (x > hi ? x - hi : 0.0);
      s += g * g;
    }
    return s;
  }

  void visit(int l, std::uint32_t id, const Coords& c, const std::array<double, kMaxDim>& p) {
    if (l == n_) {
      best_ = std::min(best_, bound2(l, c, p));
      return;
    }
    const auto& lv = t_.levels[static_cast<std::size_t>(l)];
    std::array<std::pair<double, unsigned>, 1U << kMaxDim> order;
    std::array<Coords, 1U << kMaxDim> kids;
    unsigned count = 0;
    for (unsigned ch = 0; ch < (1U << d_); ++ch) {
      if (!(lv.mask[id] & (1U << ch))) continue;
      Coords k = c;
      for (int j = 0; j < d_; ++j) k[static_cast<std::size_t>(j)] = 2 * c[static_cast<std::size_t>(j)] + ((ch >> j) & 1U);
      kids[ch] = k;
      order[count++] = {bound2(l + 1, k, p), ch};
    }
    std::sort(order.begin(), order.begin() + count);
    for (unsigned i = 0; i < count; ++i) {
      if (best_ == 0.0 || order[i].first >= best_) return;
      visit(l + 1, t_.child(l, id, order[i].second), kids[order[i].second], p);
    }
  }

  const Tree& t_;
  int d_;
  int n_;
  double best_ = 0;
};

// Lower bound on the directed Euclidean distance, within `tol` (units of h) of the truth.
double directed_euclid_units(const DyadicSet& a, const DyadicSet& b, double tol) {
  const int d = a.dim();
  EuclidSearch search(*b.tree(), d, a.depth());
  const double diag = std::sqrt(static_cast<double>(d));
  double worst = 0;
  struct Cell {
    std::array<double, kMaxDim> lo;
    double side;
  };
  for (const auto& leaf : a.leaves()) {
    if (b.contains(leaf)) continue;
    std::array<double, kMaxDim> lo{};
    for (int j = 0; j < d; ++j) lo[static_cast<std::size_t>(j)] = static_cast<double>(leaf.coords[static_cast<std::size_t>(j)]);
    // Vertices first: in practice the maximum usually sits at one of them.
    for (unsigned e = 0; e < (1U << d); ++e) {
      auto p = lo;
      for (int j = 0; j < d; ++j) p[static_cast<std::size_t>(j)] += (e >> j) & 1U;
      worst = std::max(worst, search.nearest(p));
    }
    std::vector<Cell> stack{{lo, 1.0}};
    while (!stack.empty()) {
      const Cell cell = stack.back();
      stack.pop_back();
      auto mid = cell.lo;
      for (int j = 0; j < d; ++j) mid[static_cast<std::size_t>(j)] += cell.side / 2;
      const double f = search.nearest(mid);
      worst = std::max(worst, f);
      if (f + cell.side * diag / 2 <= worst + tol) continue;
      for (unsigned e = 0; e < (1U << d); ++e) {
        Cell sub{cell.lo, cell.side / 2};
        for (int j = 0; j < d; ++j) sub.lo[static_cast<std::size_t>(j)] += ((e >> j) & 1U) * sub.side;
        stack.push_back(sub);
      }
    }
  }
  return worst;
}

}  // namespace

Rational hausdorff_sup_exact(const DyadicSet& a, const DyadicSet& b) {
  check_operands(a, b);
  const std::int64_t k = std::max(directed_sup_halfcells(a, b), directed_sup_halfcells(b, a));
  return Rational(k) / Rational(BigInt(1) << (a.depth() + 1));
}

double hausdorff_distance(const DyadicSet& a, const DyadicSet& b, Metric metric, double tolerance) {
  check_operands(a, b);
  if (metric == Metric::sup || a.dim() == 1) return to_double(hausdorff_sup_exact(a, b));
  if (!(tolerance > 0)) throw InvalidArgument("hausdorff_distance: tolerance must be positive");
  const double h = std::ldexp(1.0, -a.depth());
  const double tol = tolerance / h;
  return h * std::max(directed_euclid_units(a, b, tol), directed_euclid_units(b, a, tol));
}

}  // namespace microdim
