// microdim: batch runner for the library's experiments. Every run is described by a JSON
// config (built from flags or read with `run`), and every artifact starts with that config
// and the code version so identical configs give byte-identical files.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "microdim/dims.hpp"
#include "microdim/dyadic.hpp"
#include "microdim/errors.hpp"
#include "microdim/families.hpp"
#include "microdim/percolation.hpp"
#include "microdim/realize.hpp"
#include "microdim/seq.hpp"
#include "microdim/target.hpp"

#ifndef MICRODIM_VERSION
#define MICRODIM_VERSION "unknown"
#endif

using namespace microdim;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kValidation = 1, kInvariant = 2, kResource = 3 };

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// Typed access to a config object. Reading a key records its effective value (defaults
// included), so the artifact header shows exactly what ran; unknown keys are rejected.
class Params {
 public:
  explicit Params(json cfg) : cfg_(std::move(cfg)) {
    if (!cfg_.is_object()) throw InvalidArgument("config must be a JSON object");
  }

  std::string str(const std::string& key, const std::string& def) {
    const json& v = lookup(key, def);
    if (!v.is_string()) throw InvalidArgument("config key '" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::int64_t integer(const std::string& key, std::int64_t def) {
    const json& v = lookup(key, def);
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      std::size_t used = 0;
      try {
        const long long n = std::stoll(s, &used);
        if (used == s.size()) {
          effective_[key] = n;
          return n;
        }
      } catch (const std::exception&) {
      }
    }
    throw InvalidArgument("config key '" + key + "' must be an integer");
  }

  std::uint64_t u64(const std::string& key, std::uint64_t def) {
    const json& v = lookup(key, def);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      std::size_t used = 0;
      try {
        if (!s.empty() && s[0] != '-') {
          const unsigned long long n = std::stoull(s, &used, 0);
          if (used == s.size()) {
            effective_[key] = n;
            return n;
          }
        }
      } catch (const std::exception&) {
      }
    }
    throw InvalidArgument("config key '" + key + "' must be a nonnegative integer");
  }

  // Rationals are strings ("3/4", "0.25") or integers; floating-point JSON numbers are
  // refused so configs stay exact.
  Rational rational(const std::string& key, const std::string& def) {
    const json& v = lookup(key, def);
    if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
    if (!v.is_string()) throw InvalidArgument("config key '" + key + "' must be a rational string");
    return parse_rational(v.get<std::string>());
  }

  bool has(const std::string& key) const { return cfg_.contains(key); }

  void finish() const {
    for (const auto& [k, _] : cfg_.items()) {
      if (!effective_.contains(k)) throw InvalidArgument("unknown config key '" + k + "'");
    }
  }

  const json& effective() const { return effective_; }

 private:
  template <typename T>
  const json& lookup(const std::string& key, const T& def) {
    if (cfg_.contains(key)) {
      effective_[key] = cfg_.at(key);
    } else {
      effective_[key] = def;
    }
    return effective_[key];
  }

  json cfg_;
  json effective_ = json::object();
};

struct Limits {
  std::int64_t max_depth = 4096;
  std::uint64_t max_trials = 1000000;
  std::uint64_t max_points = std::uint64_t{1} << 20;
};

void check_depth(const Limits& lim, std::int64_t depth, const char* what) {
  if (depth < 0) throw InvalidArgument(std::string(what) + " must be nonnegative");
  if (depth > lim.max_depth) {
    throw ResourceExhausted(std::string(what) + " " + std::to_string(depth) + " exceeds limits.max_depth " +
                            std::to_string(lim.max_depth));
  }
}

// Set specs: "full:d", "kx:<sequence spec>", "file:<DyadicSet binary>".
DyadicSet make_set(const std::string& spec, int depth) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "full") {
    int d = 1;
    if (!arg.empty()) d = std::stoi(arg);
    if (d < 1 || d > kMaxDim) throw InvalidArgument("full:d needs 1 <= d <= " + std::to_string(kMaxDim));
    return DyadicSet::full(d, depth);
  }
  if (kind == "kx") return kx_set(SeqProgram::parse(arg).prefix(static_cast<std::uint64_t>(depth)));
  if (kind == "file") {
    std::ifstream in(arg, std::ios::binary);
    if (!in) throw InvalidArgument("cannot open " + arg);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return dyadic_from_binary(bytes);
  }
  throw InvalidArgument("unknown set spec '" + spec + "' (use full:d, kx:<seq>, file:<path>)");
}

std::vector<Rational> rational_list(const std::string& text) {
  std::vector<Rational> out;
  for (const auto& s : split(text, ',')) out.push_back(parse_rational(s));
  if (out.empty()) throw InvalidArgument("empty list");
  return out;
}

json counts_json(const std::vector<BigInt>& counts) {
  json a = json::array();
  for (const auto& c : counts) a.push_back(c.str());
  return a;
}

struct Artifact {
  enum class Kind { csv, json } kind = Kind::json;
  std::string csv_body;
  json result;
  std::string summary;
};

std::string render(const Artifact& a, const json& config) {
  if (a.kind == Artifact::Kind::csv) {
    return "# microdim " + std::string(MICRODIM_VERSION) + "\n# config " + config.dump() + "\n" + a.csv_body;
  }
  json doc;
  doc["microdim_version"] = MICRODIM_VERSION;
  doc["config"] = config;
  doc["result"] = a.result;
  return doc.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path);
  out << bytes;
  if (!out) throw ResourceExhausted("failed writing " + path);
}

Artifact cmd_realize(Params& p, const Limits& lim) {
  const auto spec = TargetSpec::parse(p.str("target", "interval:3/10,7/10"));
  const auto word = SeqProgram::parse(p.str("word", "beatty:1/2"));
  const std::int64_t blocks = p.integer("blocks", 64);
  if (blocks < 2) throw InvalidArgument("blocks must be at least 2");
  check_depth(lim, blocks, "blocks");
  const Word x = word.prefix(static_cast<std::uint64_t>(blocks));
  const VarphiMap phi(spec);
  const auto psi = build_psi_prefix(x, phi, static_cast<std::size_t>(blocks));
  const Rational expected = phi(x.prefix(static_cast<std::size_t>(blocks) - 1));
  const auto report = realized_density_check(psi, expected);

  std::ostringstream os;
  os.precision(10);
  os << "block,n,k,phi,block_density,cumulative_density\n";
  std::uint64_t ones = 0;
  for (std::size_t i = 1; i < psi.blocks.size(); ++i) {
    const auto& b = psi.blocks[i];
    std::uint64_t block_ones = 0;
    for (std::size_t j = psi.boundaries[i]; j < psi.boundaries[i + 1]; ++j) block_ones += static_cast<std::uint64_t>(psi.word[j]);
    ones += block_ones;
    const double len = static_cast<double>(psi.boundaries[i + 1] - psi.boundaries[i]);
    os << i << ',' << b.n << ',' << b.k << ',' << to_string(b.phi) << ',' << static_cast<double>(block_ones) / len << ','
       << static_cast<double>(ones) / static_cast<double>(psi.boundaries[i + 1]) << '\n';
  }
  Artifact a{Artifact::Kind::csv, os.str(), {}, {}};
  std::ostringstream s;
  s << "realize: blocks=" << blocks << " length=" << psi.word.length()
    << " cumulative_density=" << to_double(report.cumulative_density) << " expected=" << to_string(expected)
    << " error=" << report.cumulative_error << " worst_slack=" << report.worst_slack;
  a.summary = s.str();
  return a;
}

Artifact cmd_dims(Params& p, const Limits& lim) {
  const std::int64_t depth = p.integer("depth", 12);
  check_depth(lim, depth, "depth");
  std::string set = p.has("set") ? p.str("set", "") : "kx:" + p.str("word", "beatty:1/3");
  if (p.has("set") && p.has("word")) throw InvalidArgument("give either set or word, not both");
  const DyadicSet a = make_set(set, static_cast<int>(depth));
  const auto series = covering_counts(a);
  const auto est = box_dim_estimate(series);
  Artifact out{Artifact::Kind::csv, series.csv(), {}, {}};
  std::ostringstream s;
  s << "dims: set=" << set << " depth=" << a.depth() << " leaves=" << a.leaf_count().str()
    << " box_dim_window=[" << est.lower << ", " << est.upper << "]";
  out.summary = s.str();
  return out;
}

Artifact cmd_percolate(Params& p, const Limits& lim, std::uint64_t seed, unsigned threads) {
  const std::string kspec = p.str("k", "full:1");
  const Rational beta = p.rational("beta", "1/2");
  const std::int64_t depth = p.integer("depth", 12);
  const std::uint64_t trials = p.u64("trials", 1000);
  const std::string sample_out = p.str("sample_out", "");
  check_depth(lim, depth, "depth");
  if (depth < 1) throw InvalidArgument("depth must be positive");
  if (trials > lim.max_trials) {
    throw ResourceExhausted("trials " + std::to_string(trials) + " exceeds limits.max_trials " +
                            std::to_string(lim.max_trials));
  }
  // K counts as full below its depth, so a full cube needs no levels at all.
  const DyadicSet k = make_set(kspec, kspec.rfind("full", 0) == 0 ? 0 : static_cast<int>(depth));
  std::vector<int> depths;
  for (int n = 1; n <= depth; ++n) depths.push_back(n);
  const PercField field(seed);
  const auto report = hawkes_experiment(k, beta, depths, trials, field, 0, threads);
  if (!sample_out.empty()) {
    const auto s = sample_in(k, RetentionSchedule::constant(beta), field, 0, static_cast<int>(depth));
    const auto bytes = to_binary(s.survivors);
    write_file(sample_out, std::string(bytes.begin(), bytes.end()));
  }
  Artifact a{Artifact::Kind::csv, report.csv(), {}, {}};
  const auto& last = report.rows.back();
  std::ostringstream s;
  s << "percolate: k=" << kspec << " beta=" << to_string(beta) << " depth=" << depth << " trials=" << trials
    << " survival=" << last.survival << " ci=[" << last.ci_low << ", " << last.ci_high << "]";
  if (last.cond_slope) s << " cond_slope=" << *last.cond_slope;
  a.summary = s.str();
  return a;
}

Artifact cmd_hawkes(Params& p, const Limits& lim, std::uint64_t seed) {
  const std::string kspec = p.str("k", "full:1");
  const Rational gamma = p.rational("gamma", "1/2");
  const auto target = TargetSpec::parse(p.str("target", "interval:0,1/2"));
  const auto word = SeqProgram::parse(p.str("word", "beatty:1/2"));
  const std::int64_t depth = p.integer("depth", 12);
  const std::int64_t kmax = p.integer("kmax", 3);
  const std::uint64_t est_trials = p.u64("estimate_trials", 2000);
  const std::string set_out = p.str("set_out", "");
  check_depth(lim, depth, "depth");
  if (kmax < 1 || kmax >= depth) throw InvalidArgument("kmax must lie in [1, depth)");
  if (est_trials > lim.max_trials) throw ResourceExhausted("estimate_trials exceeds limits.max_trials");

  const DyadicSet k = make_set(kspec, static_cast<int>(depth));
  const PercField field(seed);
  GammaStarOptions opt;
  opt.estimate_trials = est_trials;
  const auto cfg = make_gamma_star_config(k, gamma, static_cast<int>(kmax), field, opt);
  cfg.validate();
  const VarphiMap phi(target);
  const Word x = word.prefix(static_cast<std::uint64_t>(depth));
  const auto sample = gamma_star(cfg, k, x, phi, field, static_cast<int>(depth));
  const DyadicSet whole = sample.with_completions();
  if (!set_out.empty()) {
    const auto bytes = to_binary(whole);
    write_file(set_out, std::string(bytes.begin(), bytes.end()));
  }
  Artifact a;
  a.result["gamma_star"] = cfg.to_json();
  a.result["completions"] = sample.completions.size();
  a.result["survivor_counts"] = counts_json(sample.survivors.is_empty() ? std::vector<BigInt>{} : sample.survivors.level_counts());
  a.result["counts_with_completions"] = counts_json(whole.level_counts());
  std::ostringstream s;
  s << "hawkes: k=" << kspec << " gamma=" << to_string(gamma) << " kmax=" << kmax << " depth=" << depth
    << " leaves=" << whole.leaf_count().str() << " completions=" << sample.completions.size();
  a.summary = s.str();
  return a;
}

MetricSpaceView make_net(Params& p, const Limits& lim) {
  const std::string spec = p.str("net", "grid:1,4096,euclidean");
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "grid") {
    const auto parts = split(arg, ',');
    if (parts.size() != 3) throw InvalidArgument("grid net is grid:d,side,sup|euclidean");
    const int d = std::stoi(parts[0]);
    const auto side = static_cast<std::size_t>(std::stoull(parts[1]));
    if (parts[2] != "sup" && parts[2] != "euclidean") throw InvalidArgument("unknown metric " + parts[2]);
    double total = 1;
    for (int i = 0; i < d; ++i) total *= static_cast<double>(side);
    if (total > static_cast<double>(lim.max_points)) throw ResourceExhausted("net exceeds limits.max_points");
    return grid_view(d, side, parts[2] == "sup" ? PointMetric::sup : PointMetric::euclidean);
  }
  const std::uint64_t origin = p.u64("origin", 0);
  const Rational eps = p.rational("epsilon", "0");
  std::ifstream in(arg);
  if (!in) throw InvalidArgument("cannot open net file " + arg);
  std::shared_ptr<FiniteMetricSpace> space;
  if (kind == "points") {
    const std::string metric = p.str("metric", "euclidean");
    if (metric != "sup" && metric != "euclidean") throw InvalidArgument("unknown metric " + metric);
    space = std::make_shared<FiniteMetricSpace>(
        FiniteMetricSpace::load_points_csv(in, metric == "sup" ? PointMetric::sup : PointMetric::euclidean));
  } else if (kind == "matrix") {
    space = std::make_shared<FiniteMetricSpace>(FiniteMetricSpace::load_matrix_csv(in));
  } else {
    throw InvalidArgument("unknown net spec '" + spec + "' (use grid:, points:, matrix:)");
  }
  if (space->size() > lim.max_points) throw ResourceExhausted("net exceeds limits.max_points");
  if (origin >= space->size()) throw InvalidArgument("origin index out of range");
  return MetricSpaceView(space, to_double(eps), static_cast<std::size_t>(origin));
}

Artifact cmd_family(Params& p, const Limits& lim) {
  const MetricSpaceView view = make_net(p, lim);
  const std::string variant_name = p.str("variant", "box");
  if (variant_name != "box" && variant_name != "packing") throw InvalidArgument("variant is box or packing");
  const auto variant = variant_name == "box" ? FamilyVariant::box : FamilyVariant::packing;
  const std::int64_t levels = p.integer("levels", 1);
  if (levels < 1) throw InvalidArgument("levels must be positive");
  check_depth(lim, levels, "levels");
  auto alphas = rational_list(p.str("alphas", "1/2"));
  while (static_cast<std::int64_t>(alphas.size()) < levels) alphas.push_back(alphas.back());
  alphas.resize(static_cast<std::size_t>(levels));
  ScheduleOptions opt;
  opt.max_level = static_cast<int>(p.integer("max_level", 1000));
  const auto target = TargetSpec::parse(p.str("target", "set:1/2"));
  const Word x = SeqProgram::parse(p.str("word", "beatty:1/2")).prefix(static_cast<std::uint64_t>(levels));

  const KSeq seq = level_schedule(view, alphas, variant, opt);
  const VarphiMap phi(target);
  const auto trace = family_member(x, phi, view, seq, static_cast<int>(levels));
  const auto report = family_dim_report(view, seq, trace);

  Artifact a;
  json wit = json::array();
  for (const auto& w : seq.witnesses) wit.push_back({{"n", w.n}, {"g", w.g}, {"j", w.j}, {"y", w.y}, {"packing", w.packing}});
  a.result["schedule"] = {{"k", seq.k}, {"witnesses", wit}};
  a.result["trace"] = trace.to_json();
  json rows = json::array();
  bool all_ok = report.packings_verified;
  for (const auto& r : report.rows) {
    rows.push_back({{"n", r.n}, {"ell", r.ell}, {"covering", r.covering}, {"centers", r.centers},
                    {"ball_part", r.ball_part}, {"bound", r.bound}, {"chain_holds", r.chain_holds},
                    {"bound_holds", r.bound_holds}});
    all_ok = all_ok && r.chain_holds && r.bound_holds;
  }
  a.result["dim_report"] = {{"packings_verified", report.packings_verified}, {"rows", rows}};
  if (!all_ok) throw InvariantViolation("family covering chain or packing check failed");
  std::ostringstream s;
  s << "family: variant=" << variant_name << " levels=" << levels << " k_last=" << seq.k.back()
    << " centers=" << trace.centers().size() << " rows_checked=" << report.rows.size();
  a.summary = s.str();
  return a;
}

Artifact cmd_zoom(Params& p, const Limits& lim) {
  const std::int64_t depth = p.integer("depth", 16);
  check_depth(lim, depth, "depth");
  std::string set = p.has("set") ? p.str("set", "") : "kx:" + p.str("word", "beatty:1/3");
  if (p.has("set") && p.has("word")) throw InvalidArgument("give either set or word, not both");
  const std::int64_t m = p.integer("m", 1);
  const auto u = rational_list(p.str("u", "0"));
  const DyadicSet a = make_set(set, static_cast<int>(depth));
  if (static_cast<int>(u.size()) != a.dim()) throw InvalidArgument("u needs one coordinate per dimension");
  if (m < 0 || m > a.depth()) throw InvalidArgument("m must lie in [0, depth]");
  const auto z = zoom(a, static_cast<int>(m), u);
  Artifact out;
  out.result["meets_open_cube"] = z.meets_open_cube;
  out.result["depth"] = z.set.depth();
  out.result["level_counts"] = z.set.is_empty() ? json::array() : counts_json(z.set.level_counts());
  out.result["set"] = to_json(z.set);
  std::ostringstream s;
  s << "zoom: set=" << set << " m=" << m << " depth=" << z.set.depth()
    << " leaves=" << (z.set.is_empty() ? std::string("0") : z.set.leaf_count().str())
    << " meets_open_cube=" << (z.meets_open_cube ? "true" : "false");
  out.summary = s.str();
  return out;
}

std::uint64_t default_seed() {
  const char* env = std::getenv("MICRODIM_SEED");
  if (env == nullptr || *env == '\0') return 0;
  std::size_t used = 0;
  const std::string s(env);
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s[0] == '-') throw InvalidArgument("MICRODIM_SEED must be an unsigned integer");
  return v;
}

Limits parse_limits(const json& cfg) {
  Limits l;
  if (!cfg.contains("limits")) return l;
  const json& j = cfg.at("limits");
  if (!j.is_object()) throw InvalidArgument("limits must be an object");
  for (const auto& [k, v] : j.items()) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw InvalidArgument("limits." + k + " must be a nonnegative integer");
    if (k == "max_depth") l.max_depth = v.get<std::int64_t>();
    else if (k == "max_trials") l.max_trials = v.get<std::uint64_t>();
    else if (k == "max_points") l.max_points = v.get<std::uint64_t>();
    else throw InvalidArgument("unknown limit '" + k + "'");
  }
  return l;
}

// Runs one config and writes its artifact; returns the summary line.
std::string execute(const json& config) {
  if (!config.is_object() || !config.contains("command") || !config.at("command").is_string()) {
    throw InvalidArgument("config needs a string 'command'");
  }
  const std::string command = config.at("command").get<std::string>();
  json body = config;
  body.erase("command");
  const Limits lim = parse_limits(body);
  body.erase("limits");
  Params p(body);
  const std::uint64_t seed = p.u64("seed", default_seed());
  const std::string out = p.str("out", "");
  const auto threads = static_cast<unsigned>(p.u64("threads", 0));

  Artifact a;
  if (command == "realize") a = cmd_realize(p, lim);
  else if (command == "dims") a = cmd_dims(p, lim);
  else if (command == "percolate") a = cmd_percolate(p, lim, seed, threads);
  else if (command == "hawkes") a = cmd_hawkes(p, lim, seed);
  else if (command == "family") a = cmd_family(p, lim);
  else if (command == "zoom") a = cmd_zoom(p, lim);
  else throw InvalidArgument("unknown command '" + command + "'");
  p.finish();

  json effective = p.effective();
  effective["command"] = command;
  // The thread count never changes results, so it stays out of the recorded config.
  effective.erase("threads");
  effective.erase("out");
  effective["limits"] = {{"max_depth", lim.max_depth}, {"max_trials", lim.max_trials}, {"max_points", lim.max_points}};
  const std::string text = render(a, effective);
  if (out.empty()) std::cout << text;
  else write_file(out, text);
  return a.summary;
}

struct SubcommandSpec {
  const char* name;
  const char* help;
  std::vector<std::pair<const char*, const char*>> options;  // key, help
};

const std::vector<SubcommandSpec>& subcommands() {
  static const std::vector<SubcommandSpec> specs{
      {"realize", "Build a psi prefix for a target set and write per-block densities (CSV)",
       {{"target", "target set: set:a,b | interval:a,b;c,d | effective:<name>"},
        {"word", "code sequence x: beatty:q | periodic:w | word:w | alternating:lo,hi[,first,growth]"},
        {"blocks", "number of blocks"}}},
      {"dims", "Covering counts of a dyadic set per level (CSV)",
       {{"word", "sequence for K(x)"}, {"set", "set spec: full:d | kx:<seq> | file:<path>"}, {"depth", "depth"}}},
      {"percolate", "Survival of percolation restricted to K (CSV)",
       {{"k", "set spec for K"}, {"beta", "retention exponent"}, {"depth", "generations"}, {"trials", "trials"},
        {"sample_out", "write trial 0's survivors in DyadicSet binary format"}}},
      {"hawkes", "Gamma-star realization along a code (JSON)",
       {{"k", "set spec for K"}, {"gamma", "gamma"}, {"target", "target set"}, {"word", "code sequence x"},
        {"depth", "depth"}, {"kmax", "number of cubes Q_k"}, {"estimate_trials", "trials per survival estimate"},
        {"set_out", "write the set in DyadicSet binary format"}}},
      {"family", "Ball-tree family member on a finite net (JSON)",
       {{"net", "grid:d,side,metric | points:<csv> | matrix:<csv>"}, {"metric", "metric for points nets"},
        {"origin", "index of y0 for file nets"}, {"epsilon", "net resolution"}, {"alphas", "alpha_n list"},
        {"variant", "box | packing"}, {"levels", "levels"}, {"target", "target set"}, {"word", "code sequence x"},
        {"max_level", "largest admissible k_n"}}},
      {"zoom", "Zoom (2^m A + u) into the unit cube (JSON)",
       {{"word", "sequence for K(x)"}, {"set", "set spec"}, {"depth", "depth"}, {"m", "zoom exponent"},
        {"u", "translation, comma-separated rationals"}}},
  };
  return specs;
}

int run_main(int argc, char** argv) {
  CLI::App app{"microdim: dyadic dimension experiments"};
  app.set_version_flag("--version", MICRODIM_VERSION);
  app.require_subcommand(1);

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, CLI::App*> subs;
  for (const auto& spec : subcommands()) {
    auto* sub = app.add_subcommand(spec.name, spec.help);
    auto& v = values[spec.name];
    for (const auto& [key, help] : spec.options) {
      std::string flag = std::string("--") + key;
      for (auto& c : flag) if (c == '_') c = '-';
      sub->add_option(flag, v[key], help);
    }
    sub->add_option("--seed", v["seed"], "64-bit seed (default: MICRODIM_SEED or 0)");
    sub->add_option("--out", v["out"], "artifact path (default: stdout)");
    sub->add_option("--threads", v["threads"], "worker threads, 0 = all cores");
    sub->add_option("--max-depth", v["limits.max_depth"], "depth limit");
    sub->add_option("--max-trials", v["limits.max_trials"], "trial limit");
    subs[spec.name] = sub;
  }
  std::string config_path;
  std::string run_out;
  auto* run = app.add_subcommand("run", "Run a JSON config file");
  run->add_option("config", config_path, "config file")->required();
  run->add_option("--out", run_out, "override the config's artifact path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  json config;
  if (run->parsed()) {
    std::ifstream in(config_path);
    if (!in) throw InvalidArgument("cannot open config " + config_path);
    try {
      config = json::parse(in);
    } catch (const json::parse_error& e) {
      throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!run_out.empty()) config["out"] = run_out;
  } else {
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      config["command"] = name;
      for (const auto& [key, text] : values[name]) {
        std::string flag = "--" + key;
        for (auto& c : flag) if (c == '_') c = '-';
        if (key.rfind("limits.", 0) == 0) flag = key == "limits.max_depth" ? "--max-depth" : "--max-trials";
        if (sub->count(flag) == 0) continue;
        if (key.rfind("limits.", 0) == 0) {
          config["limits"][key.substr(7)] = std::stoll(text);
        } else {
          config[key] = text;
        }
      }
    }
  }
  std::cout << execute(config) << std::endl;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kInvariant;
  } catch (const ResourceExhausted& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kResource;
  } catch (const std::bad_alloc&) {
    std::cerr << "resource limit: out of memory\n";
    return kResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}
