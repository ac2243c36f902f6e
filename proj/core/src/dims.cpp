#include "microdim/dims.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "microdim/errors.hpp"

namespace microdim {

std::string CountSeries::csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "level,count,log2count_over_n\n";
  for (const auto& e : entries) {
    const double ratio = e.level == 0 ? 0.0 : log2_big(e.count) / e.level;
    out << e.level << ',' << e.count << ',' << ratio << '\n';
  }
  return out.str();
}

namespace {

void check_levels(std::span<const int> levels, int max_level) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || levels[i] > max_level) throw InvalidArgument("level " + std::to_string(levels[i]) + " out of range");
    if (i > 0 && levels[i] <= levels[i - 1]) throw InvalidArgument("levels must be strictly increasing");
  }
}

}  // namespace

CountSeries covering_counts(const DyadicSet& a, std::span<const int> levels) {
  check_levels(levels, a.depth());
  const auto all = a.level_counts();
  CountSeries s;
  for (int l : levels) s.entries.push_back({l, all[static_cast<std::size_t>(l)]});
  return s;
}

CountSeries covering_counts(const DyadicSet& a) {
  std::vector<int> levels(static_cast<std::size_t>(a.depth()) + 1);
  for (int l = 0; l <= a.depth(); ++l) levels[static_cast<std::size_t>(l)] = l;
  return covering_counts(a, levels);
}

DimEstimate box_dim_estimate(const CountSeries& series, int window) {
  std::vector<const CountEntry*> usable;
  for (const auto& e : series.entries) {
    if (e.level >= 1) {
      if (e.count < 1) throw InvalidArgument("box_dim_estimate: counts must be positive");
      usable.push_back(&e);
    }
  }
  if (usable.empty()) throw InvalidArgument("box_dim_estimate: no entries with level >= 1");
  if (window < 0) throw InvalidArgument("box_dim_estimate: negative window");
  std::size_t w = window == 0 ? std::max<std::size_t>(1, usable.size() / 3) : static_cast<std::size_t>(window);
  w = std::min(w, usable.size());
  DimEstimate out{INFINITY, -INFINITY};
  for (std::size_t i = usable.size() - w; i < usable.size(); ++i) {
    const double r = log2_big(usable[i]->count) / usable[i]->level;
    out.lower = std::min(out.lower, r);
    out.upper = std::max(out.upper, r);
  }
  return out;
}

CountSeries packing_counts(const FiniteMetricSpace& space, std::span<const int> levels) {
  check_levels(levels, 1000);
  CountSeries s;
  s.kind = CountKind::packing;
  s.exact = space.size() <= 64;
  for (int l : levels) {
    const double delta = std::ldexp(1.0, -l);
    const auto size = s.exact ? exact_max_packing(space, delta).size() : greedy_packing(space, delta).size();
    s.entries.push_back({l, BigInt(size)});
  }
  return s;
}

CountSeries covering_counts(const FiniteMetricSpace& space, std::span<const int> levels) {
  check_levels(levels, 1000);
  CountSeries s;
  s.exact = space.size() <= 64;
  for (int l : levels) {
    const double r = std::ldexp(1.0, -l);
    const auto size = s.exact ? exact_min_cover(space, r) : greedy_packing(space, r).size();
    s.entries.push_back({l, BigInt(size)});
  }
  return s;
}

bool chain_check(const CountSeries& n, const CountSeries& p) {
  if (!n.exact || !p.exact) throw InvalidArgument("chain_check: needs exact counts");
  std::map<int, BigInt> cover;
  for (const auto& e : n.entries) cover[e.level] = e.count;
  bool ok = true;
  for (const auto& e : p.entries) {
    const auto here = cover.find(e.level);
    const auto next = cover.find(e.level + 1);
    if (here == cover.end() || next == cover.end()) {
      throw InvalidArgument("chain_check: covering series lacks level " + std::to_string(e.level) + " or the next");
    }
    ok = ok && here->second <= e.count && e.count <= next->second;
  }
  return ok;
}

bool product_inequality_check(const DyadicSet& a, const DyadicSet& b, std::span<const int> levels) {
  const auto ca = covering_counts(a, levels);
  const auto cb = covering_counts(b, levels);
  const auto cp = covering_counts(product(a, b), levels);
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (cp.entries[i].count != ca.entries[i].count * cb.entries[i].count) return false;
  }
  return true;
}

}  // namespace microdim
