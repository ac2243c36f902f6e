#include "microdim/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "microdim/errors.hpp"
#include "microdim/parallel.hpp"

namespace microdim {

// ---------------------------------------------------------------------------
// Views and counts

struct MetricSpaceView::Cache {
  std::mutex mutex;
  std::map<int, std::uint64_t> packing;
};

MetricSpaceView::MetricSpaceView(std::shared_ptr<const FiniteMetricSpace> space, double epsilon,
                                 std::size_t origin)
    : space_(std::move(space)), epsilon_(epsilon), origin_(origin), cache_(std::make_shared<Cache>()) {
  if (!space_ || space_->size() == 0) throw InvalidArgument("metric view needs a nonempty net");
  if (origin_ >= space_->size()) throw InvalidArgument("metric view origin out of range");
  if (!(epsilon_ >= 0)) throw InvalidArgument("net resolution must be nonnegative");
}

double scale(int level) { return std::ldexp(1.0, -level); }

std::vector<std::size_t> MetricSpaceView::ball(std::size_t y, int level) const {
  return space_->ball(y, scale(level));
}

std::uint64_t MetricSpaceView::packing_number(int n) const {
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->packing.find(n);
    if (it != cache_->packing.end()) return it->second;
  }
  const double delta = scale(n);
  const std::uint64_t p = delta > 0 ? greedy_packing(*space_, delta).size() : space_->size();
  std::lock_guard lock(cache_->mutex);
  cache_->packing[n] = p;
  return p;
}

std::uint64_t MetricSpaceView::level_function(int n) const {
  return std::max<std::uint64_t>(static_cast<std::uint64_t>(n) + 1, packing_number(n));
}

std::vector<std::size_t> MetricSpaceView::packing_in(const std::vector<std::size_t>& points, int level,
                                                     std::size_t limit) const {
  const double delta = scale(level);
  std::vector<std::size_t> chosen;
  for (auto p : points) {
    bool ok = true;
    for (auto q : chosen) {
      if (space_->distance(p, q) <= delta) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    chosen.push_back(p);
    if (limit != 0 && chosen.size() >= limit) break;
  }
  return chosen;
}

MetricSpaceView grid_view(int d, std::size_t side, PointMetric metric) {
  if (d < 1 || d > 4) throw InvalidArgument("grid dimension must lie in [1, 4]");
  if (side < 1) throw InvalidArgument("grid side must be positive");
  std::size_t total = 1;
  for (int j = 0; j < d; ++j) {
    if (total > (std::size_t{1} << 24) / side) throw ResourceExhausted("grid net too large");
    total *= side;
  }
  std::vector<std::vector<double>> pts;
  pts.reserve(total);
  std::size_t origin = 0;
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t r = i;
    std::vector<double> p(static_cast<std::size_t>(d));
    bool centre = true;
    for (int j = d - 1; j >= 0; --j) {
      const std::size_t v = r % side;
      r /= side;
      p[static_cast<std::size_t>(j)] = static_cast<double>(v) / static_cast<double>(side);
      centre = centre && v == side / 2;
    }
    if (centre) origin = i;
    pts.push_back(std::move(p));
  }
  auto space = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::from_points(std::move(pts), metric));
  const double eps = (metric == PointMetric::sup ? 1.0 : std::sqrt(static_cast<double>(d))) / static_cast<double>(side);
  return MetricSpaceView(std::move(space), eps, origin);
}

std::pair<std::uint64_t, bool> pow2_floor(const Rational& e) {
  using Float = boost::multiprecision::cpp_bin_float_50;
  if (e < 0) throw InvalidArgument("pow2_floor needs a nonnegative exponent");
  const BigInt whole = boost::multiprecision::numerator(e) / boost::multiprecision::denominator(e);
  if (whole >= 63) throw ResourceExhausted("2^e exceeds 64-bit counts");
  const int i = static_cast<int>(whole);
  const Rational frac = e - Rational(whole);
  if (frac == 0) return {std::uint64_t{1} << i, true};
  // 2^frac is irrational here, so 2^e is never an integer; 50 digits decide its floor.
  const Float f = Float(boost::multiprecision::numerator(frac)) / Float(boost::multiprecision::denominator(frac));
  const Float v = boost::multiprecision::ldexp(boost::multiprecision::pow(Float(2), f), i);
  const Float fl = boost::multiprecision::floor(v);
  const Float gap = v - fl;
  if (gap < Float("1e-40") || 1 - gap < Float("1e-40")) {
    throw InvariantViolation("pow2_floor: 2^" + to_string(e) + " too close to an integer to decide");
  }
  return {fl.convert_to<std::uint64_t>(), false};
}

bool count_reaches(std::uint64_t count, const Rational& e) {
  if (e <= 0) return count >= 1;
  if (e >= 63) return false;
  const auto [fl, exact] = pow2_floor(e);
  return count > fl || (count == fl && exact);
}

namespace {

// Least integer reaching 2^e.
std::uint64_t needed(const Rational& e) {
  if (e <= 0) return 1;
  if (e >= 63) return std::numeric_limits<std::uint64_t>::max();
  const auto [fl, exact] = pow2_floor(e);
  return exact ? fl : fl + 1;
}

struct Witness {
  int j;
  std::uint64_t count;
};

// Least j in [g, j_max] with P_j(B(y, 2^-g)) >= 2^(alpha j).
std::optional<Witness> find_witness(const MetricSpaceView& view, std::size_t y, int g, const Rational& alpha,
                                    int j_max) {
  const auto ball = view.ball(y, g);
  for (int j = g; j <= j_max; ++j) {
    const std::uint64_t need = needed(alpha * j);
    if (need > ball.size()) return std::nullopt;  // P_j never exceeds the ball's size
    const auto pk = view.packing_in(ball, j, need);
    if (pk.size() >= need) return Witness{j, pk.size()};
  }
  return std::nullopt;
}

}  // namespace

KSeq level_schedule(const MetricSpaceView& view, std::vector<Rational> alphas, FamilyVariant variant,
                    const ScheduleOptions& options) {
  KSeq seq;
  seq.variant = variant;
  seq.k = {0};
  for (const auto& a : alphas) {
    if (a < 0) throw InvalidArgument("schedule exponents must be nonnegative");
  }
  seq.alphas = std::move(alphas);
  const int gap = seq.gap();
  for (std::size_t n = 0; n < seq.alphas.size(); ++n) {
    const int level = static_cast<int>(n);
    const std::uint64_t g = view.level_function(seq.k.back());
    const int j_max = options.max_level - gap;
    if (g > static_cast<std::uint64_t>(j_max)) {
      throw ResolutionExhausted(level, "level " + std::to_string(level) + ": g(k_n) = " + std::to_string(g) +
                                           " leaves no witness scale below the level cap " +
                                           std::to_string(options.max_level));
    }
    const int gi = static_cast<int>(g);
    const Rational& alpha = seq.alphas[n];
    LevelWitness w;
    w.n = level;
    w.g = g;
    if (variant == FamilyVariant::box) {
      const auto found = find_witness(view, view.origin(), gi, alpha, j_max);
      if (!found) {
        throw ResolutionExhausted(level, "level " + std::to_string(level) + ": no packing of B(y0, 2^-" +
                                             std::to_string(g) + ") reaches 2^(" + to_string(alpha) +
                                             " j) on this net");
      }
      w.j = found->j;
      w.y = view.origin();
      w.packing = found->count;
    } else {
      std::vector<std::optional<Witness>> all(view.size());
      parallel_for(view.size(), [&](std::size_t y) { all[y] = find_witness(view, y, gi, alpha, j_max); },
                   options.threads);
      w.j = -1;
      for (std::size_t y = 0; y < all.size(); ++y) {
        if (!all[y]) {
          throw ResolutionExhausted(level, "level " + std::to_string(level) + ": no packing of B(y, 2^-" +
                                               std::to_string(g) + ") reaches 2^(" + to_string(alpha) +
                                               " j) for net point " + std::to_string(y));
        }
        if (all[y]->j > w.j) {
          w.j = all[y]->j;
          w.y = y;
          w.packing = all[y]->count;
        }
      }
    }
    seq.witnesses.push_back(w);
    seq.k.push_back(w.j + gap);
  }
  return seq;
}

// ---------------------------------------------------------------------------
// Ball trees

BallTree ball_tree_root(const MetricSpaceView& view, FamilyVariant variant) {
  BallTree t;
  t.variant = variant;
  t.radius_level = 0;
  t.centers = {view.origin()};
  return t;
}

namespace {

int level_checked(const KSeq& seq, const BallTree& tree, FamilyVariant variant, const Rational& phi) {
  if (tree.variant != variant || seq.variant != variant) throw InvalidArgument("ball tree variant mismatch");
  const int n = tree.level();
  if (n >= seq.levels()) throw InvalidArgument("ball tree is already at the schedule's last level");
  if (tree.radius_level != seq.k[static_cast<std::size_t>(n)]) throw InvalidArgument("ball tree radius is off schedule");
  if (phi < 0) throw InvalidArgument("phi must be nonnegative");
  if (phi > seq.alphas[static_cast<std::size_t>(n)]) {
    throw InvalidArgument("schedule violation: phi = " + to_string(phi) + " exceeds alpha_" + std::to_string(n) +
                          " = " + to_string(seq.alphas[static_cast<std::size_t>(n)]));
  }
  return n;
}

// Least ell in [g, ell_max] whose greedy packing of `ball` reaches 2^(phi ell), and that
// packing cut to floor(2^(phi ell)).
std::pair<int, std::vector<std::size_t>> select_packing(const MetricSpaceView& view,
                                                        const std::vector<std::size_t>& ball, int g,
                                                        int ell_max, const Rational& phi, int level) {
  for (int ell = g; ell <= ell_max; ++ell) {
    const Rational e = phi * ell;
    const std::uint64_t need = needed(e);
    if (need > ball.size()) break;
    auto pk = view.packing_in(ball, ell, need);
    if (pk.size() >= need) {
      pk.resize(static_cast<std::size_t>(pow2_floor(e).first));
      return {ell, std::move(pk)};
    }
  }
  throw ResolutionExhausted(level, "level " + std::to_string(level) + ": packing selection falls short for phi = " +
                                       to_string(phi));
}

}  // namespace

BallTree extend_box(const MetricSpaceView& view, const KSeq& seq, const BallTree& tree, int c,
                    const Rational& phi) {
  const int n = level_checked(seq, tree, FamilyVariant::box, phi);
  const auto& w = seq.witnesses[static_cast<std::size_t>(n)];
  const int g = static_cast<int>(w.g);
  const int k_next = seq.k[static_cast<std::size_t>(n) + 1];
  const std::size_t y0 = view.origin();
  auto [ell, s] = select_packing(view, view.ball(y0, g), g, k_next - 3, phi, n);

  // Put y0 into the packing at the cost of halving its separation.
  const double half = scale(ell + 1);
  Extension ext;
  auto near = std::find_if(s.begin(), s.end(), [&](std::size_t y) { return view.space().distance(y0, y) <= half; });
  if (near != s.end()) {
    *near = y0;
    ext.swapped_existing = true;
  } else {
    s.back() = y0;
  }
  BallTree out = tree;
  out.prefix = out.prefix.append(c != 0 ? 1 : 0);
  out.radius_level = k_next;
  for (auto y : s) {
    if (y != y0) out.centers.push_back(y);
  }
  ext.phi = phi;
  ext.ell = {ell};
  ext.sizes = {s.size()};
  ext.packings = {std::move(s)};
  out.history.push_back(std::move(ext));
  return out;
}

BallTree extend_packing(const MetricSpaceView& view, const KSeq& seq, const BallTree& tree, int c,
                        const Rational& phi) {
  const int n = level_checked(seq, tree, FamilyVariant::packing, phi);
  const int g = static_cast<int>(seq.witnesses[static_cast<std::size_t>(n)].g);
  const int k_next = seq.k[static_cast<std::size_t>(n) + 1];
  BallTree out = tree;
  out.prefix = out.prefix.append(c != 0 ? 1 : 0);
  out.radius_level = k_next;
  out.centers.clear();
  Extension ext;
  ext.phi = phi;
  for (auto y : tree.centers) {
    auto [ell, s] = select_packing(view, view.ball(y, g), g, k_next - 2, phi, n);
    out.centers.insert(out.centers.end(), s.begin(), s.end());
    ext.ell.push_back(ell);
    ext.sizes.push_back(s.size());
    ext.packings.push_back(std::move(s));
  }
  out.history.push_back(std::move(ext));
  return out;
}

void check_ball_tree(const MetricSpaceView& view, const KSeq& seq, const BallTree& tree, const BallTree* parent) {
  const auto& sp = view.space();
  const int n = tree.level();
  if (n > seq.levels() || tree.radius_level != seq.k[static_cast<std::size_t>(n)]) {
    throw InvariantViolation("ball tree radius is off schedule");
  }
  const double sep = scale(tree.radius_level - 2);
  for (std::size_t a = 0; a < tree.centers.size(); ++a) {
    for (std::size_t b = a + 1; b < tree.centers.size(); ++b) {
      if (!(sp.distance(tree.centers[a], tree.centers[b]) > sep)) {
        throw InvariantViolation("centers " + std::to_string(tree.centers[a]) + " and " +
                                 std::to_string(tree.centers[b]) + " are not 2^(2-k_n)-separated at level " +
                                 std::to_string(n));
      }
    }
  }
  if (tree.variant == FamilyVariant::box &&
      std::find(tree.centers.begin(), tree.centers.end(), view.origin()) == tree.centers.end()) {
    throw InvariantViolation("box-variant tree lost y0 at level " + std::to_string(n));
  }
  if (parent) {
    const double r = scale(tree.radius_level);
    const double pr = scale(parent->radius_level);
    for (auto c : tree.centers) {
      const bool inside = std::any_of(parent->centers.begin(), parent->centers.end(),
                                      [&](std::size_t p) { return sp.distance(p, c) + r <= pr; });
      if (!inside) {
        throw InvariantViolation("ball around " + std::to_string(c) + " leaves the parent union at level " +
                                 std::to_string(n));
      }
    }
  }
}

nlohmann::json FamilyTrace::to_json() const {
  nlohmann::json j;
  j["prefix"] = prefix.str();
  j["variant"] = variant == FamilyVariant::box ? "box" : "packing";
  j["levels"] = nlohmann::json::array();
  for (std::size_t n = 0; n < trees.size(); ++n) {
    j["levels"].push_back({{"n", n}, {"k", k[n]}, {"centers", trees[n].centers}});
  }
  return j;
}

FamilyTrace family_member(const Word& x, const VarphiMap& varphi, const MetricSpaceView& view, const KSeq& seq,
                          int levels) {
  if (levels < 0 || levels > seq.levels()) {
    throw ResolutionExhausted(seq.levels(), "family_member: schedule has only " + std::to_string(seq.levels()) +
                                                " levels, " + std::to_string(levels) + " requested");
  }
  if (x.length() < static_cast<std::size_t>(levels)) throw InvalidArgument("family_member: word too short");
  FamilyTrace trace;
  trace.variant = seq.variant;
  trace.prefix = x.prefix(static_cast<std::size_t>(levels));
  trace.k.assign(seq.k.begin(), seq.k.begin() + levels + 1);
  trace.trees.push_back(ball_tree_root(view, seq.variant));
  const auto phis = varphi.along(x, static_cast<std::size_t>(levels));
  for (int n = 0; n < levels; ++n) {
    Rational phi = phis[static_cast<std::size_t>(n) + 1];
    if (phi > seq.alphas[static_cast<std::size_t>(n)]) phi = seq.alphas[static_cast<std::size_t>(n)];
    if (phi < 0) phi = 0;
    const BallTree& prev = trace.trees.back();
    const int c = x[static_cast<std::size_t>(n)];
    BallTree next = seq.variant == FamilyVariant::box ? extend_box(view, seq, prev, c, phi)
                                                      : extend_packing(view, seq, prev, c, phi);
    check_ball_tree(view, seq, next, &prev);
    trace.trees.push_back(std::move(next));
  }
  return trace;
}

double hausdorff_points(const FiniteMetricSpace& space, const std::vector<std::size_t>& a,
                        const std::vector<std::size_t>& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("hausdorff_points needs nonempty sets");
  auto directed = [&](const std::vector<std::size_t>& from, const std::vector<std::size_t>& to) {
    double worst = 0;
    for (auto p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (auto q : to) best = std::min(best, space.distance(p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

FamilyDimReport family_dim_report(const MetricSpaceView& view, const KSeq& seq, const FamilyTrace& trace) {
  const auto& sp = view.space();
  FamilyDimReport report;
  report.packings_verified = true;
  const auto& final_centers = trace.centers();
  std::vector<std::size_t> sorted_final = final_centers;
  std::sort(sorted_final.begin(), sorted_final.end());
  const auto& history = trace.trees.back().history;
  for (const auto& ext : history) {
    for (std::size_t i = 0; i < ext.packings.size(); ++i) {
      const auto& pk = ext.packings[i];
      const int ell = ext.ell[i];
      const double sep = scale(trace.variant == FamilyVariant::box ? ell + 1 : ell);
      if (pk.size() != ext.sizes[i] || ext.sizes[i] != pow2_floor(ext.phi * ell).first) report.packings_verified = false;
      for (std::size_t a = 0; a < pk.size(); ++a)
        for (std::size_t b = a + 1; b < pk.size(); ++b)
          if (!(sp.distance(pk[a], pk[b]) > sep)) report.packings_verified = false;
      // Box-variant centers are never removed, so the packing survives into C(x).
      if (trace.variant == FamilyVariant::box) {
        for (auto y : pk)
          if (!std::binary_search(sorted_final.begin(), sorted_final.end(), y)) report.packings_verified = false;
      }
    }
  }

  auto cover = [&](const std::vector<std::size_t>& pts, int ell) -> std::uint64_t {
    return view.packing_in(pts, ell).size();
  };
  const int levels = static_cast<int>(trace.trees.size()) - 1;
  for (int n = 0; n < levels; ++n) {
    const auto& w = seq.witnesses[static_cast<std::size_t>(n)];
    const int g = static_cast<int>(w.g);
    const int hi = seq.k[static_cast<std::size_t>(n) + 1] - seq.gap();
    const Rational& phi = history[static_cast<std::size_t>(n)].phi;
    const auto& here = trace.trees[static_cast<std::size_t>(n)].centers;
    for (int ell = g; ell <= hi; ++ell) {
      CoverRow row;
      row.n = n;
      row.ell = ell;
      row.covering = cover(final_centers, ell);
      row.centers = here.size();
      const double r = scale(g);
      if (trace.variant == FamilyVariant::box) {
        std::vector<std::size_t> part;
        for (auto p : final_centers)
          if (sp.distance(p, view.origin()) <= r) part.push_back(p);
        row.ball_part = cover(part, ell);
        row.chain_holds = row.covering <= row.centers + row.ball_part;
        row.bound = ell + std::exp2(to_double(phi) * ell);
        row.bound_holds = static_cast<double>(row.centers + row.ball_part) <= row.bound;
      } else {
        for (auto y : here) {
          std::vector<std::size_t> part;
          for (auto p : final_centers)
            if (sp.distance(p, y) <= r) part.push_back(p);
          row.ball_part += cover(part, ell);
        }
        row.chain_holds = row.covering <= row.ball_part;
        row.bound = static_cast<double>(w.g) * std::exp2(to_double(phi) * ell);
        row.bound_holds = static_cast<double>(row.ball_part) <= row.bound;
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

nlohmann::json FamilyDescription::to_json() const {
  nlohmann::json j;
  j["kind"] = kind == Kind::empty ? "empty" : kind == Kind::whole_space ? "whole_space" : "layered";
  j["top"] = to_string(top);
  if (kind == Kind::layered) {
    j["beta0"] = to_string(beta0);
    j["layers"] = nlohmann::json::array();
    for (const auto& l : layers) {
      j["layers"].push_back({{"n", l.n}, {"beta", to_string(l.beta)}, {"radius", l.radius},
                             {"joined_with_base", l.joined_with_base}});
    }
  }
  return j;
}

FamilyDescription packing_family_assembly(const std::optional<TargetSpec>& a, const MetricSpaceView& view,
                                          const Rational& top, int layers) {
  (void)view;
  FamilyDescription out;
  out.top = top;
  if (!a) return out;
  const Rational lo = a->lower();
  const Rational hi = a->upper();
  if (lo < 0 || hi > top) throw InvalidArgument("targets must lie in [0, dim_P K]");
  if (lo == top) {
    out.kind = FamilyDescription::Kind::whole_space;
    return out;
  }
  if (layers < 1) throw InvalidArgument("assembly needs at least one layer");
  out.kind = FamilyDescription::Kind::layered;
  out.beta0 = lo;
  for (int n = 0; n <= layers; ++n) {
    FamilyLayer l;
    l.n = n;
    l.beta = top - (top - lo) / Rational(BigInt(1) << n);
    l.radius = n == 0 ? 1.0 : scale(n);
    l.joined_with_base = n > 0;
    out.layers.push_back(l);
  }
  return out;
}

}  // namespace microdim
