// Acceptance run: one PASS/FAIL line per criterion. With an argument N only criterion N
// runs and the exit status reports it; without one all criteria run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "microdim/dims.hpp"
#include "microdim/dyadic.hpp"
#include "microdim/errors.hpp"
#include "microdim/families.hpp"
#include "microdim/parallel.hpp"
#include "microdim/percolation.hpp"
#include "microdim/realize.hpp"
#include "microdim/seq.hpp"

using namespace microdim;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Word random_word(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
  return Word(bits);
}

Rational pow2_neg(int n) { return Rational(1) / Rational(BigInt(1) << n); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// Beatty words of densities 1/3, 2/5, 7/12: balanced at every factor length up to 256 and
// |rho_n - a| <= 1/n for every prefix.
Outcome balancedness() {
  std::ostringstream out;
  bool ok = true;
  for (const Rational a : {Rational(1, 3), Rational(2, 5), Rational(7, 12)}) {
    const Word w = beatty_balanced(a).prefix(256);
    const bool bal = is_balanced(w, 256);
    const auto prof = density_profile(w);
    std::size_t bad = 0;
    for (std::size_t n = 1; n <= prof.size(); ++n) {
      if (abs(prof[n - 1] - a) > Rational(1, static_cast<long long>(n))) ++bad;
    }
    ok = ok && bal && bad == 0;
    out << to_string(a) << ": balanced=" << bal << " density_violations=" << bad << "; ";
  }
  return {ok, out.str()};
}

// Level counts of K(x) are 2^(ones in x|m); beatty(1/3) slope at depth 2048 within 1/512.
Outcome dimension_formula() {
  std::mt19937_64 rng(2);
  std::size_t bad = 0;
  for (int t = 0; t < 50; ++t) {
    const Word x = random_word(rng, 20);
    const auto counts = kx_set(x).level_counts();
    for (std::size_t m = 0; m <= 20; ++m) {
      if (counts[m] != BigInt(1) << x.prefix(m).ones_count()) ++bad;
    }
  }
  const DyadicSet deep = kx_set(beatty_balanced(Rational(1, 3)).prefix(2048));
  const double slope = log2_big(deep.count(2048)) / 2048;
  const double err = std::abs(slope - 1.0 / 3);
  return {bad == 0 && err <= 1.0 / 512,
          "count_mismatches=" + std::to_string(bad) + " slope=" + fmt("%.6f", slope) + " |slope-1/3|=" +
              fmt("%.2e", err) + " (tol 1/512)"};
}

// d_H(K(x), K(y)) <= 2^-m where m is the first index at which x and y differ.
Outcome hausdorff_contraction() {
  std::mt19937_64 rng(3);
  std::size_t bad = 0;
  Rational worst_ratio = 0;
  for (int t = 0; t < 1000; ++t) {
    const Word x = random_word(rng, 16);
    std::vector<std::uint8_t> yb(x.bits().begin(), x.bits().end());
    const std::size_t m = rng() % 17;
    if (m < 16) {
      yb[m] ^= 1U;
      for (std::size_t i = m + 1; i < 16; ++i) yb[i] = static_cast<std::uint8_t>(rng() & 1U);
    }
    const Rational d = hausdorff_sup_exact(kx_set(x), kx_set(Word(yb)));
    const Rational bound = m < 16 ? pow2_neg(static_cast<int>(m)) : Rational(0);
    if (d > bound) ++bad;
    if (bound > 0) worst_ratio = std::max(worst_ratio, Rational(d / bound));
  }
  return {bad == 0, "violations=" + std::to_string(bad) + "/1000 max d_H/bound=" + to_string(worst_ratio)};
}

// psi on A = [0.3, 0.7]: every block within 2/(n+k) + 2/sqrt(n) of phi, exactly; prefix
// density after 100 blocks within 0.15 of the final phi.
Outcome psi_realization() {
  std::mt19937_64 rng(4);
  const auto spec = TargetSpec::parse("interval:0.3,0.7");
  const VarphiMap phi(spec);
  double worst_cum = 0;
  double worst_slack = -1;
  std::size_t breaches = 0;
  for (int b = 0; b < 20; ++b) {
    const Word x = random_word(rng, 120);
    const auto p = build_psi_prefix(x, phi, 100);
    try {
      const auto r = realized_density_check(p, phi(x.prefix(99)));
      worst_cum = std::max(worst_cum, r.cumulative_error);
      worst_slack = std::max(worst_slack, r.worst_slack);
    } catch (const InvariantViolation&) {
      ++breaches;
    }
  }
  return {breaches == 0 && worst_cum <= 0.15,
          "block_breaches=" + std::to_string(breaches) + " worst_block_slack=" + fmt("%.4f", worst_slack) +
              " worst_cumulative_error=" + fmt("%.4f", worst_cum) + " (tol 0.15)"};
}

// choose_k returns a valid k for every n <= 10^4 on 100 random (a, b, target) triples.
Outcome choose_k_totality() {
  std::mt19937_64 rng(5);
  std::vector<BlockTarget> triples;
  while (triples.size() < 100) {
    const long long den = 1 + static_cast<long long>(rng() % 1000);
    Rational a(static_cast<long long>(rng() % static_cast<std::uint64_t>(den + 1)), den);
    Rational b(static_cast<long long>(rng() % static_cast<std::uint64_t>(den + 1)), den);
    if (a > b) std::swap(a, b);
    const long long tden = 1 + static_cast<long long>(rng() % 997);
    const Rational t = a + (b - a) * Rational(static_cast<long long>(rng() % static_cast<std::uint64_t>(tden + 1)), tden);
    triples.emplace_back(a, b, t);
  }
  std::vector<std::uint64_t> failures(triples.size());
  parallel_for(triples.size(), [&](std::size_t i) {
    for (std::uint64_t n = 1; n <= 10000; ++n) {
      try {
        if (!k_is_valid(n, choose_k(n, triples[i]), triples[i])) ++failures[i];
      } catch (const InvariantViolation&) {
        ++failures[i];
      }
    }
  });
  std::uint64_t total = 0;
  for (auto f : failures) total += f;
  return {total == 0, "failures=" + std::to_string(total) + " of 1000000 calls"};
}

// Constant alpha = 1/2 in d = 1: survival to depth 20 near 1 - q with q = (sqrt 2 - 1)^2,
// and mean counts 2^(n/2) within 3 standard errors at every level.
Outcome percolation_oracle() {
  const PercField field(6);
  const auto sched = RetentionSchedule::constant(Rational(1, 2));
  constexpr int depth = 20;
  constexpr std::size_t trials = 10000;
  std::vector<std::vector<std::uint64_t>> counts(trials);
  parallel_for(trials, [&](std::size_t t) {
    counts[t] = sample(sched, field, static_cast<std::uint32_t>(t), depth, 1).level_counts;
  });
  std::size_t alive = 0;
  for (const auto& c : counts) alive += c[depth] > 0;
  const double survival = static_cast<double>(alive) / trials;
  const double expected = 1 - gw_extinction(std::sqrt(0.5), 2);
  int worst_level = 0;
  double worst_z = 0;
  for (int n = 1; n <= depth; ++n) {
    double sum = 0, sq = 0;
    for (const auto& c : counts) {
      const auto v = static_cast<double>(c[static_cast<std::size_t>(n)]);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / trials;
    const double se = std::sqrt((sq / trials - mean * mean) / trials);
    const double z = std::abs(mean - std::exp2(n / 2.0)) / se;
    if (z > worst_z) {
      worst_z = z;
      worst_level = n;
    }
  }
  const bool ok = std::abs(survival - 0.8284) <= 0.02 && worst_z <= 3;
  return {ok, "survival=" + fmt("%.4f", survival) + " (theory " + fmt("%.4f", expected) +
                  ", tol 0.8284+-0.02) worst_mean_z=" + fmt("%.2f", worst_z) + " at level " +
                  std::to_string(worst_level) + " (tol 3)"};
}

// Pointwise ordered schedules a <= b: the b-sample is inside the a-sample, 100 of 100.
Outcome monotone_coupling() {
  const PercField field(7);
  std::mt19937_64 rng(7);
  int included = 0;
  for (int t = 0; t < 100; ++t) {
    const int d = t < 50 ? 1 : 2;
    std::vector<Rational> lo, hi;
    for (int n = 0; n < 12; ++n) {
      // In d = 2 the lower schedule stays >= 1 so the sample has at most 2^n cubes on average.
      const Rational a = Rational(d - 1) + Rational(static_cast<long long>(rng() % 17), 16);
      Rational b = a + Rational(static_cast<long long>(rng() % 9), 16);
      if (b > d) b = d;
      lo.push_back(a);
      hi.push_back(b);
    }
    const auto [big, small] = coupled_pair(RetentionSchedule(lo), RetentionSchedule(hi), field,
                                           static_cast<std::uint32_t>(t), 12, d);
    bool ok = small.survivors.is_empty() || is_subset(small.survivors, big.survivors);
    for (std::size_t n = 0; n < small.level_counts.size(); ++n) ok = ok && small.level_counts[n] <= big.level_counts[n];
    included += ok;
  }
  return {included == 100, "inclusions=" + std::to_string(included) + "/100"};
}

// beta above dim K kills the process; beta below it leaves slope near dim K - beta.
Outcome hawkes_direction() {
  const PercField field(8);
  const DyadicSet k = kx_set(beatty_balanced(Rational(1, 3)).prefix(24));
  const auto above = hawkes_experiment(k, Rational(3, 5), {8, 24}, 10000, field);
  const double s8 = above.rows[0].survival;
  const double s24 = above.rows[1].survival;
  const auto below = hawkes_experiment(DyadicSet::full(1, 20), Rational(1, 2), {20}, 10000, field, 1U << 20);
  const auto slope = below.rows[0].cond_slope;
  const bool ok = s24 < s8 && s24 < 0.1 && slope && *slope >= 0.35 && *slope <= 0.6;
  return {ok, "beta=0.6: survival(8)=" + fmt("%.4f", s8) + " survival(24)=" + fmt("%.4f", s24) +
                  " (tol < survival(8), < 0.1); beta=0.5 on [0,1]: cond_slope(20)=" +
                  (slope ? fmt("%.4f", *slope) : std::string("missing")) + " (tol [0.35, 0.6])"};
}

// Ball-tree families on the 256 x 256 grid with A = {1/2}, six levels, both variants:
// exact packing sizes, separation, nesting, and d_H(C(x), C(y)) <= 2^(1-k_n) whenever x
// and y share their first n digits.
Outcome ball_tree_families() {
  const auto view = grid_view(2, 256, PointMetric::sup);
  const VarphiMap phi(TargetSpec::parse("set:1/2"));
  constexpr int levels = 6;
  std::ostringstream out;
  bool ok = true;
  for (const auto variant : {FamilyVariant::box, FamilyVariant::packing}) {
    const char* name = variant == FamilyVariant::box ? "box" : "packing";
    try {
      const auto seq = level_schedule(view, std::vector<Rational>(levels, Rational(1, 2)), variant);
      std::vector<FamilyTrace> traces;
      bool sizes_ok = true;
      for (unsigned w = 0; w < (1U << levels); ++w) {
        std::vector<std::uint8_t> bits(levels);
        for (int i = 0; i < levels; ++i) bits[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(w >> (levels - 1 - i) & 1U);
        traces.push_back(family_member(Word(bits), phi, view, seq, levels));  // checks separation and nesting
        sizes_ok = sizes_ok && family_dim_report(view, seq, traces.back()).packings_verified;
      }
      std::size_t cont_bad = 0;
      for (std::size_t a = 0; a < traces.size(); ++a) {
        for (std::size_t b = a + 1; b < traces.size(); ++b) {
          int m = 0;
          while (m < levels && traces[a].prefix[static_cast<std::size_t>(m)] == traces[b].prefix[static_cast<std::size_t>(m)]) ++m;
          const double dh = hausdorff_points(view.space(), traces[a].centers(), traces[b].centers());
          if (dh > scale(seq.k[static_cast<std::size_t>(m)] - 1)) ++cont_bad;
        }
      }
      ok = ok && sizes_ok && cont_bad == 0;
      out << name << ": sizes_ok=" << sizes_ok << " continuity_violations=" << cont_bad << "; ";
    } catch (const ResolutionExhausted& e) {
      ok = false;
      out << name << ": resolution exhausted at level " << e.level() << " (" << e.what() << "); ";
    } catch (const InvariantViolation& e) {
      ok = false;
      out << name << ": invariant violated (" << e.what() << "); ";
    }
  }
  return {ok, out.str()};
}

// Exact N_n <= P_n <= N_{n+1} on 200 random metric sets of at most 32 points.
Outcome packing_chain() {
  std::mt19937_64 rng(10);
  std::vector<FiniteMetricSpace> spaces;
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng() % 31;
    const int d = 1 + static_cast<int>(rng() % 3);
    std::vector<std::vector<double>> pts(n, std::vector<double>(static_cast<std::size_t>(d)));
    for (auto& p : pts)
      for (auto& v : p) v = u(rng);
    spaces.push_back(FiniteMetricSpace::from_points(std::move(pts), t % 2 ? PointMetric::sup : PointMetric::euclidean));
  }
  std::vector<int> p_levels, n_levels;
  for (int i = 0; i <= 6; ++i) p_levels.push_back(i);
  for (int i = 0; i <= 7; ++i) n_levels.push_back(i);
  std::vector<int> result(spaces.size());
  parallel_for(spaces.size(), [&](std::size_t i) {
    result[i] = chain_check(covering_counts(spaces[i], n_levels), packing_counts(spaces[i], p_levels)) ? 1 : 0;
  });
  int holds = 0;
  for (auto r : result) holds += r;
  return {holds == 200, "chain_holds=" + std::to_string(holds) + "/200 (levels 0..6, exact counts)"};
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"balancedness", 1, balancedness},
      {"dimension_formula", 5, dimension_formula},
      {"hausdorff_contraction", 5, hausdorff_contraction},
      {"psi_realization", 10, psi_realization},
      {"choose_k_totality", 10, choose_k_totality},
      {"percolation_oracle", 60, percolation_oracle},
      {"monotone_coupling", 10, monotone_coupling},
      {"hawkes_direction", 120, hawkes_direction},
      {"ball_tree_families", 120, ball_tree_families},
      {"packing_chain", 30, packing_chain},
  };
  return all;
}

bool run_one(std::size_t i) {
  const auto& c = criteria()[i];
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = c.run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = secs < c.limit_seconds;
  const bool pass = o.pass && in_time;
  std::printf("%s c%zu %s: %s time=%.2fs (limit %.0fs%s)\n", pass ? "PASS" : "FAIL", i + 1, c.name, o.detail.c_str(),
              secs, c.limit_seconds, in_time ? "" : ", exceeded");
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  const auto& all = criteria();
  if (argc > 1) {
    const long n = std::strtol(argv[1], nullptr, 10);
    if (n < 1 || n > static_cast<long>(all.size())) {
      std::fprintf(stderr, "criterion must be 1..%zu\n", all.size());
      return 2;
    }
    return run_one(static_cast<std::size_t>(n - 1)) ? 0 : 1;
  }
  bool ok = true;
  for (std::size_t i = 0; i < all.size(); ++i) ok = run_one(i) && ok;
  return ok ? 0 : 1;
}
