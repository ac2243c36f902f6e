#include "microdim/percolation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "microdim/errors.hpp"
#include "microdim/parallel.hpp"

namespace microdim {

// ---------------------------------------------------------------------------
// Schedules and variates

RetentionSchedule::RetentionSchedule(std::vector<Rational> alphas, std::optional<Rational> limit)
    : alphas_(std::move(alphas)), limit_(std::move(limit)) {
  if (alphas_.empty() && !limit_) throw InvalidArgument("retention schedule needs an alpha");
  for (const auto& a : alphas_) {
    if (a < 0) throw InvalidArgument("retention exponent must be nonnegative: " + to_string(a));
    retention_.push_back(std::exp2(-to_double(a)));
  }
  if (limit_) {
    if (*limit_ < 0) throw InvalidArgument("retention limit must be nonnegative");
    limit_retention_ = std::exp2(-to_double(*limit_));
  } else {
    limit_retention_ = retention_.back();
  }
}

RetentionSchedule RetentionSchedule::constant(const Rational& alpha) { return RetentionSchedule({}, alpha); }

const Rational& RetentionSchedule::alpha(int n) const {
  if (n < 1) throw InvalidArgument("generations are numbered from 1");
  if (static_cast<std::size_t>(n) <= alphas_.size()) return alphas_[static_cast<std::size_t>(n) - 1];
  return limit_ ? *limit_ : alphas_.back();
}

double RetentionSchedule::retention(int n) const {
  if (n < 1) throw InvalidArgument("generations are numbered from 1");
  if (static_cast<std::size_t>(n) <= retention_.size()) return retention_[static_cast<std::size_t>(n) - 1];
  return limit_retention_;
}

void RetentionSchedule::validate(int d) const {
  auto check = [d](const Rational& a) {
    if (a < 0 || a > d) {
      throw InvalidArgument("retention exponent " + to_string(a) + " outside [0, " + std::to_string(d) + "]");
    }
  };
  for (const auto& a : alphas_) check(a);
  if (limit_) check(*limit_);
}

std::uint64_t cube_path(const CubeIdx& cube) {
  const int d = static_cast<int>(cube.coords.size());
  if (d * cube.level > 64) throw InvalidArgument("cube path needs more than 64 bits");
  std::uint64_t path = 0;
  for (int l = cube.level - 1; l >= 0; --l) {
    unsigned c = 0;
    for (int j = 0; j < d; ++j) c |= static_cast<unsigned>((cube.coords[static_cast<std::size_t>(j)] >> l) & 1U) << j;
    path = (path << d) | c;
  }
  return path;
}

CubeIdx cube_from_path(std::uint64_t path, int level, int d) {
  CubeIdx cube{level, std::vector<std::uint64_t>(static_cast<std::size_t>(d), 0)};
  for (int l = level - 1; l >= 0; --l) {
    const unsigned c = static_cast<unsigned>(path >> (d * l)) & ((1U << d) - 1U);
    for (int j = 0; j < d; ++j) {
      auto& v = cube.coords[static_cast<std::size_t>(j)];
      v = 2 * v + ((c >> j) & 1U);
    }
  }
  return cube;
}

double PercField::variate(std::uint32_t copy_key, const CubeIdx& cube) const {
  return variate_at(copy_key, cube.level, cube_path(cube));
}

// ---------------------------------------------------------------------------
// Growth

namespace {

constexpr std::uint32_t kFull = 0xFFFFFFFFU;

struct Entry {
  std::uint32_t node;  // node of K at this level, or kFull below K's depth
  std::uint64_t path;
};

struct GrowSpec {
  const detail::Tree* k = nullptr;  // null: unrestricted
  int k_depth = 0;
  int d = 1;
  CubeIdx root;
  int depth = 0;
  bool completions = false;
  std::size_t cap = std::size_t{1} << 24;
};

struct GrowOutput {
  std::vector<std::uint64_t> counts;
  std::vector<std::uint64_t> final_paths;
  std::vector<std::pair<std::uint64_t, int>> completions;  // final-depth path, died level
};

unsigned mask_of(const GrowSpec& g, int level, std::uint32_t node) {
  if (node == kFull || level >= g.k_depth) return (1U << (1U << g.d)) - 1U;
  return g.k->levels[static_cast<std::size_t>(level)].mask[node];
}

std::uint32_t child_of(const GrowSpec& g, int level, std::uint32_t node, unsigned c) {
  if (node == kFull || level + 1 >= g.k_depth) return kFull;
  return g.k->child(level, node, c);
}

// The first final-depth cube of K below (level, node, path).
std::uint64_t first_descendant(const GrowSpec& g, int level, std::uint32_t node, std::uint64_t path,
                               int final_level) {
  while (level < final_level) {
    const unsigned mask = mask_of(g, level, node);
    const auto c = static_cast<unsigned>(std::countr_zero(mask));
    node = child_of(g, level, node, c);
    path = (path << g.d) | c;
    ++level;
  }
  return path;
}

void check_depths(const GrowSpec& g) {
  if (g.depth < 1) throw InvalidArgument("percolation depth must be at least 1");
  if (g.d < 1 || g.d > kMaxDim) throw InvalidArgument("percolation dimension out of range");
  if (static_cast<int>(g.root.coords.size()) != g.d) throw InvalidArgument("root cube has wrong dimension");
  const int final_level = g.root.level + g.depth;
  if (g.d * final_level > 64 || final_level > 62) {
    throw InvalidArgument("percolation depth too large: d * level must be at most 64");
  }
}

// Visits generations 1..depth; `on_level(n, frontier)` sees the alive cubes of generation n.
template <typename OnLevel>
void grow(const GrowSpec& g, const RetentionSchedule& s, const PercField& field, std::uint32_t key,
          GrowOutput* out, OnLevel&& on_level) {
  const int final_level = g.root.level + g.depth;
  std::uint32_t node = g.k ? 0U : kFull;
  std::uint64_t path = 0;
  // Walk K down to the root cube.
  for (int l = 0; l < g.root.level; ++l) {
    unsigned c = 0;
    for (int j = 0; j < g.d; ++j) {
      c |= static_cast<unsigned>((g.root.coords[static_cast<std::size_t>(j)] >> (g.root.level - 1 - l)) & 1U) << j;
    }
    if (!(mask_of(g, l, node) >> c & 1U)) {
      if (out) out->counts.assign(static_cast<std::size_t>(g.depth) + 1, 0);
      for (int n = 1; n <= g.depth; ++n) on_level(n, std::vector<Entry>{});
      return;
    }
    node = child_of(g, l, node, c);
    path = (path << g.d) | c;
  }
  std::vector<Entry> frontier{{node, path}};
  std::vector<Entry> next;
  if (out) {
    out->counts.assign(static_cast<std::size_t>(g.depth) + 1, 0);
    out->counts[0] = 1;
  }
  for (int n = 1; n <= g.depth; ++n) {
    const int parent_level = g.root.level + n - 1;
    const double p = s.retention(n);
    next.clear();
    for (const Entry& e : frontier) {
      const unsigned mask = mask_of(g, parent_level, e.node);
      bool any = false;
      for (unsigned c = 0; c < (1U << g.d); ++c) {
        if (!(mask >> c & 1U)) continue;
        const std::uint64_t cp = (e.path << g.d) | c;
        if (field.variate_at(key, parent_level + 1, cp) < p) {
          next.push_back({child_of(g, parent_level, e.node, c), cp});
          any = true;
        }
      }
      if (!any && g.completions && out) {
        out->completions.emplace_back(first_descendant(g, parent_level, e.node, e.path, final_level), parent_level);
      }
    }
    if (next.size() > g.cap) throw ResourceExhausted("percolation frontier exceeds the cube limit");
    std::swap(frontier, next);
    if (out) out->counts[static_cast<std::size_t>(n)] = frontier.size();
    on_level(n, frontier);
  }
  if (out) {
    out->final_paths.reserve(frontier.size());
    for (const Entry& e : frontier) out->final_paths.push_back(e.path);
  }
}

DyadicSet set_from_paths(const std::vector<std::uint64_t>& paths, int level, int d) {
  std::vector<CubeIdx> leaves;
  leaves.reserve(paths.size());
  for (auto p : paths) leaves.push_back(cube_from_path(p, level, d));
  return DyadicSet::from_leaves(d, level, leaves);
}

CubeIdx unit_cube(int d) { return CubeIdx{0, std::vector<std::uint64_t>(static_cast<std::size_t>(d), 0)}; }

PercSample run(const GrowSpec& g, const RetentionSchedule& s, const PercField& field, std::uint32_t key) {
  check_depths(g);
  s.validate(g.d);
  GrowOutput out;
  grow(g, s, field, key, &out, [](int, const std::vector<Entry>&) {});
  const int final_level = g.root.level + g.depth;
  PercSample result;
  result.survivors = set_from_paths(out.final_paths, final_level, g.d);
  result.level_counts = std::move(out.counts);
  for (const auto& [p, l] : out.completions) {
    result.completions.push_back({cube_from_path(p, final_level, g.d), l});
  }
  return result;
}

}  // namespace

DyadicSet PercSample::with_completions() const {
  if (completions.empty()) return survivors;
  std::vector<CubeIdx> cubes = survivors.leaves();
  for (const auto& c : completions) cubes.push_back(c.cube);
  std::sort(cubes.begin(), cubes.end());
  cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
  return DyadicSet::from_leaves(survivors.dim(), survivors.depth(), cubes);
}

PercSample sample(const RetentionSchedule& schedule, const PercField& field, std::uint32_t copy_key,
                  int depth, int d, const std::optional<CubeIdx>& root) {
  GrowSpec g;
  g.d = d;
  g.root = root ? *root : unit_cube(d);
  g.depth = depth;
  return run(g, schedule, field, copy_key);
}

PercSample sample_in(const DyadicSet& k, const RetentionSchedule& schedule, const PercField& field,
                     std::uint32_t copy_key, int depth, const std::optional<CubeIdx>& root) {
  GrowSpec g;
  g.d = k.dim();
  g.root = root ? *root : unit_cube(k.dim());
  g.depth = depth;
  g.completions = true;
  if (k.is_empty()) {
    check_depths(g);
    PercSample empty;
    empty.survivors = DyadicSet::empty(g.d, g.root.level + depth);
    empty.level_counts.assign(static_cast<std::size_t>(depth) + 1, 0);
    return empty;
  }
  g.k = k.tree();
  g.k_depth = k.depth();
  return run(g, schedule, field, copy_key);
}

std::pair<PercSample, PercSample> coupled_pair(const RetentionSchedule& a, const RetentionSchedule& b,
                                               const PercField& field, std::uint32_t copy_key,
                                               int depth, int d) {
  return {sample(a, field, copy_key, depth, d), sample(b, field, copy_key, depth, d)};
}

double gw_extinction(double p, int children) {
  if (!(p >= 0 && p <= 1)) throw InvalidArgument("retention probability must lie in [0, 1]");
  if (children < 1) throw InvalidArgument("offspring count must be positive");
  if (p * children <= 1) return 1.0;
  if (children == 2) {
    // sqrt(q) is the smaller root of p t^2 - t + (1 - p) = 0, namely (1 - p) / p.
    const double t = (1 - std::sqrt(1 - 4 * p * (1 - p))) / (2 * p);
    return t * t;
  }
  double q = 0;
  for (int i = 0; i < 1000000; ++i) {
    const double nq = std::pow(1 - p + p * q, children);
    if (std::abs(nq - q) < 1e-16) return nq;
    q = nq;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Hawkes experiment

namespace {

constexpr double kZ95 = 1.959963984540054;

}  // namespace

double wilson_low(std::uint64_t hits, std::uint64_t n) {
  if (n == 0 || hits == 0) return 0;
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(hits) / nn;
  const double z2 = kZ95 * kZ95;
  const double centre = ph + z2 / (2 * nn);
  const double half = kZ95 * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn));
  return std::max(0.0, (centre - half) / (1 + z2 / nn));
}

double wilson_high(std::uint64_t hits, std::uint64_t n) {
  if (n == 0 || hits >= n) return 1;
  const double nn = static_cast<double>(n);
  const double ph = static_cast<double>(hits) / nn;
  const double z2 = kZ95 * kZ95;
  const double centre = ph + z2 / (2 * nn);
  const double half = kZ95 * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn));
  return std::min(1.0, (centre + half) / (1 + z2 / nn));
}

std::string HawkesReport::csv() const {
  std::ostringstream os;
  os.precision(10);
  os << "depth,survival_frac,ci_low,ci_high,cond_slope\n";
  for (const auto& r : rows) {
    os << r.depth << ',' << r.survival << ',' << r.ci_low << ',' << r.ci_high << ',';
    if (r.cond_slope) os << *r.cond_slope;
    os << '\n';
  }
  return os.str();
}

HawkesReport hawkes_experiment(const DyadicSet& k, const Rational& beta, std::vector<int> depths,
                               std::uint64_t trials, const PercField& field, std::uint32_t first_copy,
                               unsigned threads) {
  if (k.is_empty()) throw InvalidArgument("hawkes_experiment needs a nonempty K");
  if (beta <= 0 || beta >= k.dim()) throw InvalidArgument("beta must lie in (0, d)");
  if (depths.empty()) throw InvalidArgument("hawkes_experiment needs at least one depth");
  if (trials == 0) throw InvalidArgument("hawkes_experiment needs at least one trial");
  std::sort(depths.begin(), depths.end());
  depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
  GrowSpec g;
  g.k = k.tree();
  g.k_depth = k.depth();
  g.d = k.dim();
  g.root = unit_cube(g.d);
  g.depth = depths.back();
  if (depths.front() < 1) throw InvalidArgument("depths must be positive");
  check_depths(g);
  const auto schedule = RetentionSchedule::constant(beta);

  // counts[t][i]: alive cubes at depths[i] in trial t.
  std::vector<std::vector<std::uint64_t>> counts(trials);
  parallel_for(trials, [&](std::size_t t) {
    std::vector<std::uint64_t> row(depths.size(), 0);
    std::size_t next = 0;
    grow(g, schedule, field, first_copy + static_cast<std::uint32_t>(t), nullptr,
         [&](int n, const std::vector<Entry>& frontier) {
           if (next < depths.size() && depths[next] == n) row[next++] = frontier.size();
         });
    counts[t] = std::move(row);
  }, threads);

  HawkesReport report;
  report.beta = beta;
  report.trials = trials;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    DepthStats r;
    r.depth = depths[i];
    double sum = 0;
    double sum_sq = 0;
    double slope_sum = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const auto c = static_cast<double>(counts[t][i]);
      sum += c;
      sum_sq += c * c;
      if (counts[t][i] > 0) {
        ++r.surviving;
        slope_sum += std::log2(c) / depths[i];
      }
    }
    const double n = static_cast<double>(trials);
    r.survival = static_cast<double>(r.surviving) / n;
    r.ci_low = wilson_low(r.surviving, trials);
    r.ci_high = wilson_high(r.surviving, trials);
    r.mean_count = sum / n;
    const double var = trials > 1 ? std::max(0.0, (sum_sq - sum * sum / n) / (n - 1)) : 0.0;
    r.count_se = std::sqrt(var / n);
    if (r.surviving > 0) r.cond_slope = slope_sum / static_cast<double>(r.surviving);
    if (!report.rows.empty() && r.survival > report.rows.back().survival) report.survival_nonincreasing = false;
    report.rows.push_back(r);
  }
  report.slope_missing = !report.rows.back().cond_slope.has_value();
  return report;
}

// ---------------------------------------------------------------------------
// The coupled family

void GammaStarConfig::validate() const {
  const std::size_t n = cubes.size();
  if (betas.size() < n || copies.size() != n || survival.size() != n) {
    throw InvariantViolation("gamma-star config: per-level tables disagree in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int k = static_cast<int>(i) + 1;
    if (cubes[i].level != k) throw InvariantViolation("gamma-star config: Q_k must have side 2^-k");
    if (i > 0 && cubes[i].parent() != cubes[i - 1]) {
      throw InvariantViolation("gamma-star config: Q_k are not nested");
    }
    if (copies[i] < 1) throw InvariantViolation("gamma-star config: copy count must be positive");
    if (!(std::pow(1 - survival[i], copies[i]) < 0.5)) {
      throw InvariantViolation("gamma-star config: (1 - c_k)^i_k >= 1/2 at k = " + std::to_string(k) +
                               " (estimated c_k = " + std::to_string(survival[i]) + ")");
    }
  }
}

nlohmann::json GammaStarConfig::to_json() const {
  nlohmann::json j;
  j["gamma"] = to_string(gamma);
  j["anchor"] = {{"level", anchor.level}, {"coords", anchor.coords}};
  j["levels"] = nlohmann::json::array();
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    j["levels"].push_back({{"k", i + 1},
                           {"beta", to_string(betas[i])},
                           {"coords", cubes[i].coords},
                           {"copies", copies[i]},
                           {"survival", survival[i]}});
  }
  return j;
}

GammaStarConfig make_gamma_star_config(const DyadicSet& k, const Rational& gamma, int k_max,
                                       const PercField& field, const GammaStarOptions& options) {
  if (k.is_empty()) throw InvalidArgument("gamma-star needs a nonempty K");
  if (gamma <= 0 || gamma > k.dim()) throw InvalidArgument("gamma must lie in (0, d]");
  if (k_max < 1 || k_max >= k.depth()) throw InvalidArgument("k_max must lie in [1, depth(K))");
  if (options.max_copies < 1 || options.max_copies >= (1 << 16)) throw InvalidArgument("max_copies out of range");
  const detail::Tree& t = *k.tree();
  const int d = k.dim();

  // Leaf counts per node, bottom-up.
  std::vector<std::vector<BigInt>> leaves(static_cast<std::size_t>(k.depth()) + 1);
  leaves[static_cast<std::size_t>(k.depth())] = {BigInt(1)};
  for (int l = k.depth() - 1; l >= 0; --l) {
    const auto& lv = t.levels[static_cast<std::size_t>(l)];
    auto& out = leaves[static_cast<std::size_t>(l)];
    out.assign(lv.size(), 0);
    for (std::size_t i = 0; i < lv.size(); ++i) {
      const int fan = std::popcount(static_cast<unsigned>(lv.mask[i]));
      for (int j = 0; j < fan; ++j) out[i] += leaves[static_cast<std::size_t>(l) + 1][lv.kids[lv.first[i] + static_cast<unsigned>(j)]];
    }
  }
  GammaStarConfig cfg;
  cfg.gamma = gamma;
  CubeIdx cube = unit_cube(d);
  std::uint32_t node = 0;
  for (int l = 0; l < k.depth(); ++l) {
    const unsigned mask = t.levels[static_cast<std::size_t>(l)].mask[node];
    unsigned best = 0;
    BigInt best_count = -1;
    for (unsigned c = 0; c < (1U << d); ++c) {
      if (!(mask >> c & 1U)) continue;
      const BigInt& n = leaves[static_cast<std::size_t>(l) + 1][t.child(l, node, c)];
      if (n > best_count) {
        best_count = n;
        best = c;
      }
    }
    node = t.child(l, node, best);
    cube = cube.child(best);
    if (l + 1 <= k_max) cfg.cubes.push_back(cube);
  }
  cfg.anchor = cube;

  for (int kk = 1; kk <= k_max; ++kk) {
    if (static_cast<std::size_t>(kk) <= options.betas.size()) {
      cfg.betas.push_back(options.betas[static_cast<std::size_t>(kk) - 1]);
    } else {
      cfg.betas.push_back(gamma * kk / (kk + 1));
    }
    const Rational& b = cfg.betas.back();
    if (b <= 0 || b >= gamma) throw InvalidArgument("beta_k must lie in (0, gamma)");
    if (kk > 1 && b <= cfg.betas[static_cast<std::size_t>(kk) - 2]) throw InvalidArgument("beta_k must increase");
  }

  const std::uint64_t trials = options.estimate_trials;
  if (trials == 0 || trials >= (1U << 16)) throw InvalidArgument("estimate_trials out of range");
  for (int kk = 1; kk <= k_max; ++kk) {
    GrowSpec g;
    g.k = k.tree();
    g.k_depth = k.depth();
    g.d = d;
    g.root = cfg.cubes[static_cast<std::size_t>(kk) - 1];
    g.depth = std::min(options.estimate_generations, k.depth() - kk);
    check_depths(g);
    const auto schedule = RetentionSchedule::constant(cfg.betas[static_cast<std::size_t>(kk) - 1]);
    // Estimation copies live above the construction's key range.
    const std::uint32_t base = 0x80000000U | (static_cast<std::uint32_t>(kk) << 16);
    std::vector<char> alive(trials, 0);
    parallel_for(trials, [&](std::size_t i) {
      bool last = false;
      grow(g, schedule, field, base + static_cast<std::uint32_t>(i), nullptr,
           [&](int n, const std::vector<Entry>& f) {
             if (n == g.depth) last = !f.empty();
           });
      alive[i] = last ? 1 : 0;
    });
    const double c = static_cast<double>(std::count(alive.begin(), alive.end(), 1)) / static_cast<double>(trials);
    cfg.survival.push_back(c);
    int copies = options.max_copies;
    if (c > 0) {
      for (int i = 1; i <= options.max_copies; ++i) {
        if (std::pow(1 - c / 2, i) < 0.5) {
          copies = i;
          break;
        }
      }
    }
    cfg.copies.push_back(copies);
  }
  return cfg;
}

RetentionSchedule alpha_schedule(const Rational& gamma, const VarphiMap& varphi, const Word& x,
                                 int generations, int d) {
  if (generations < 1) throw InvalidArgument("alpha_schedule needs at least one generation");
  if (x.length() < static_cast<std::size_t>(generations)) {
    throw InvalidArgument("alpha_schedule: word shorter than the number of generations");
  }
  const auto phi = varphi.along(x, static_cast<std::size_t>(generations));
  std::vector<Rational> alphas;
  alphas.reserve(static_cast<std::size_t>(generations));
  for (int n = 1; n <= generations; ++n) {
    Rational a = gamma - phi[static_cast<std::size_t>(n)];
    if (a < 0) a = 0;
    if (a > d) a = d;
    alphas.push_back(a);
  }
  return RetentionSchedule(std::move(alphas));
}

PercSample gamma_star(const GammaStarConfig& config, const DyadicSet& k, const Word& x,
                      const VarphiMap& varphi, const PercField& field, int depth) {
  config.validate();
  if (k.is_empty()) throw InvalidArgument("gamma-star needs a nonempty K");
  if (depth <= config.k_max() || depth > k.depth()) throw InvalidArgument("gamma_star: depth must lie in (k_max, depth(K)]");
  const int d = k.dim();
  const auto schedule = alpha_schedule(config.gamma, varphi, x, depth - 1, d);

  GrowSpec g;
  g.k = k.tree();
  g.k_depth = k.depth();
  g.d = d;
  g.completions = true;
  std::vector<std::uint64_t> paths;
  std::vector<std::pair<std::uint64_t, int>> completions;
  for (int kk = 1; kk <= config.k_max(); ++kk) {
    g.root = config.cubes[static_cast<std::size_t>(kk) - 1];
    g.depth = depth - kk;
    check_depths(g);
    for (int i = 1; i <= config.copies[static_cast<std::size_t>(kk) - 1]; ++i) {
      GrowOutput out;
      grow(g, schedule, field, (static_cast<std::uint32_t>(kk) << 16) | static_cast<std::uint32_t>(i), &out,
           [](int, const std::vector<Entry>&) {});
      paths.insert(paths.end(), out.final_paths.begin(), out.final_paths.end());
      completions.insert(completions.end(), out.completions.begin(), out.completions.end());
    }
  }
  std::sort(paths.begin(), paths.end());
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  PercSample result;
  result.survivors = set_from_paths(paths, depth, d);
  std::sort(completions.begin(), completions.end());
  completions.erase(std::unique(completions.begin(), completions.end(),
                                [](const auto& a, const auto& b) { return a.first == b.first; }),
                    completions.end());
  for (const auto& [p, l] : completions) result.completions.push_back({cube_from_path(p, depth, d), l});
  // The anchor y0, rasterized at the final depth by following K's first cubes.
  CubeIdx anchor = config.anchor;
  while (anchor.level > depth) anchor = anchor.parent();
  result.completions.push_back({anchor, -1});
  result.level_counts = {paths.size()};
  return result;
}

}  // namespace microdim
