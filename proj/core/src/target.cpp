#include "microdim/target.hpp"

#include <algorithm>

#include "microdim/errors.hpp"

namespace microdim {

Rational TargetOracle::choose(const Word& s) const {
  const Rational grid = Rational(1) / Rational(BigInt(1) << 32);
  Word probe = s;
  for (int extra = 0; extra <= 4096; ++extra) {
    const auto r = f_range(probe);
    if (r.lo == r.hi) return r.lo;
    if (r.hi - r.lo <= grid) {
      const Rational mid = round_to_dyadic((r.lo + r.hi) / 2, 32);
      return std::clamp(mid, r.lo, r.hi);
    }
    probe = probe.append(0);
  }
  throw InvariantViolation("target oracle: f_range does not shrink along " + s.str() + "000...");
}

namespace {

// Index coding shared by the finite presentations: the first `bits` code bits name an
// item (clamped to the last one), any further bits are free.
struct IndexCode {
  std::size_t items = 1;
  std::size_t bits = 0;

  explicit IndexCode(std::size_t n) : items(n) {
    while ((std::size_t{1} << bits) < n) ++bits;
  }
  // Range of item indices reachable from cylinder [s].
  std::pair<std::size_t, std::size_t> reachable(const Word& s) const {
    const std::size_t known = std::min(bits, s.length());
    std::size_t p = 0;
    for (std::size_t i = 0; i < known; ++i) p = 2 * p + static_cast<std::size_t>(s[i]);
    const std::size_t lo = p << (bits - known);
    const std::size_t hi = ((p + 1) << (bits - known)) - 1;
    return {std::min(lo, items - 1), std::min(hi, items - 1)};
  }
};

nlohmann::json rationals_json(const std::vector<Rational>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : v) out.push_back(to_string(r));
  return out;
}

class FiniteSetOracle final : public TargetOracle {
 public:
  explicit FiniteSetOracle(std::vector<Rational> values) : values_(std::move(values)), code_(1) {
    if (values_.empty()) throw InvalidArgument("finite_set target needs at least one value");
    std::sort(values_.begin(), values_.end());
    values_.erase(std::unique(values_.begin(), values_.end()), values_.end());
    code_ = IndexCode(values_.size());
  }
  Rational lower() const override { return values_.front(); }
  Rational upper() const override { return values_.back(); }
  bool closed_meets(int, const Word&) const override { return false; }
  bool meets_f(const Word&) const override { return false; }
  bool meets_g(const Word&) const override { return true; }
  RationalInterval f_range(const Word& s) const override {
    const auto [lo, hi] = code_.reachable(s);
    return {values_[lo], values_[hi]};
  }
  Rational choose(const Word& s) const override { return values_[code_.reachable(s).first]; }
  nlohmann::json to_json() const override { return {{"mode", "finite_set"}, {"values", rationals_json(values_)}}; }

 private:
  std::vector<Rational> values_;
  IndexCode code_;
};

class IntervalUnionOracle final : public TargetOracle {
 public:
  explicit IntervalUnionOracle(std::vector<RationalInterval> intervals) : ivs_(std::move(intervals)), code_(1) {
    if (ivs_.empty()) throw InvalidArgument("interval_union target needs at least one interval");
    for (const auto& iv : ivs_) {
      if (iv.lo > iv.hi) throw InvalidArgument("interval_union: interval with lo > hi");
    }
    std::sort(ivs_.begin(), ivs_.end(), [](const auto& x, const auto& y) {
      return x.lo < y.lo || (x.lo == y.lo && x.hi < y.hi);
    });
    code_ = IndexCode(ivs_.size());
    lower_ = ivs_.front().lo;
    upper_ = ivs_.front().hi;
    for (const auto& iv : ivs_) upper_ = std::max(upper_, iv.hi);
  }
  Rational lower() const override { return lower_; }
  Rational upper() const override { return upper_; }
  bool closed_meets(int, const Word&) const override { return false; }
  bool meets_f(const Word&) const override { return false; }
  bool meets_g(const Word&) const override { return true; }
  // Inside interval i the remaining bits are a binary fraction v and f = lo + (hi - lo) v.
  RationalInterval f_range(const Word& s) const override {
    const auto [first, last] = code_.reachable(s);
    if (first != last || s.length() < code_.bits) {
      Rational lo = ivs_[first].lo;
      Rational hi = ivs_[first].hi;
      for (std::size_t i = first; i <= last; ++i) {
        lo = std::min(lo, ivs_[i].lo);
        hi = std::max(hi, ivs_[i].hi);
      }
      return {lo, hi};
    }
    const auto& iv = ivs_[first];
    const auto [v, width] = fraction(s);
    return {iv.lo + (iv.hi - iv.lo) * v, iv.lo + (iv.hi - iv.lo) * (v + width)};
  }
  Rational choose(const Word& s) const override {
    const auto idx = code_.reachable(s).first;
    const auto& iv = ivs_[idx];
    if (s.length() <= code_.bits) return iv.lo;
    return iv.lo + (iv.hi - iv.lo) * fraction(s).first;
  }
  nlohmann::json to_json() const override {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& iv : ivs_) list.push_back({to_string(iv.lo), to_string(iv.hi)});
    return {{"mode", "interval_union"}, {"intervals", list}};
  }

 private:
  // Binary fraction of the bits after the index prefix, and 2^-(their count).
  std::pair<Rational, Rational> fraction(const Word& s) const {
    BigInt num = 0;
    std::size_t count = 0;
    for (std::size_t i = code_.bits; i < s.length(); ++i, ++count) num = 2 * num + s[i];
    const Rational den(BigInt(1) << count);
    return {Rational(num) / den, Rational(1) / den};
  }

  std::vector<RationalInterval> ivs_;
  IndexCode code_;
  Rational lower_;
  Rational upper_;
};

class FirstBitOracle final : public TargetOracle {
 public:
  FirstBitOracle(Rational low, Rational high) : low_(std::move(low)), high_(std::move(high)) {}
  Rational lower() const override { return std::min(low_, high_); }
  Rational upper() const override { return std::max(low_, high_); }
  bool closed_meets(int, const Word&) const override { return false; }
  bool meets_f(const Word&) const override { return false; }
  bool meets_g(const Word&) const override { return true; }
  RationalInterval f_range(const Word& s) const override {
    if (s.empty()) return {lower(), upper()};
    const Rational v = s[0] ? high_ : low_;
    return {v, v};
  }
  nlohmann::json to_json() const override {
    return {{"mode", "effective"}, {"oracle", "first_bit"}, {"params", {{"low", to_string(low_)}, {"high", to_string(high_)}}}};
  }

 private:
  Rational low_;
  Rational high_;
};

class ReciprocalsOracle final : public TargetOracle {
 public:
  Rational lower() const override { return 0; }
  Rational upper() const override { return 1; }
  bool closed_meets(int, const Word&) const override { return false; }
  bool meets_f(const Word&) const override { return false; }
  bool meets_g(const Word&) const override { return true; }
  RationalInterval f_range(const Word& s) const override {
    for (std::size_t i = 0; i < s.length(); ++i) {
      if (s[i]) {
        const Rational v(1, static_cast<long long>(i + 1));
        return {v, v};
      }
    }
    return {0, Rational(1, static_cast<long long>(s.length() + 1))};
  }
  Rational choose(const Word& s) const override {
    const auto r = f_range(s);
    return r.lo == r.hi ? r.lo : Rational(0);
  }
  nlohmann::json to_json() const override { return {{"mode", "effective"}, {"oracle", "reciprocals"}, {"params", nlohmann::json::object()}}; }
};

class CofiniteOnesOracle final : public TargetOracle {
 public:
  Rational lower() const override { return Rational(1, 4); }
  Rational upper() const override { return Rational(3, 4); }
  bool closed_meets(int m, const Word& s) const override {
    if (m < 1) return false;
    for (std::size_t i = static_cast<std::size_t>(m); i < s.length(); ++i) {
      if (s[i]) return false;
    }
    return true;
  }
  bool meets_f(const Word&) const override { return true; }
  bool meets_g(const Word&) const override { return true; }
  RationalInterval f_range(const Word& s) const override {
    if (s.empty()) return {lower(), upper()};
    const Rational v = s[0] ? upper() : lower();
    return {v, v};
  }
  nlohmann::json to_json() const override { return {{"mode", "effective"}, {"oracle", "cofinite_ones"}, {"params", nlohmann::json::object()}}; }
};

class ScaledOracle final : public TargetOracle {
 public:
  ScaledOracle(std::shared_ptr<const TargetOracle> base, Rational divisor)
      : base_(std::move(base)), divisor_(std::move(divisor)) {
    if (divisor_ <= 0) throw InvalidArgument("scaled target: divisor must be positive");
  }
  Rational lower() const override { return base_->lower() / divisor_; }
  Rational upper() const override { return base_->upper() / divisor_; }
  bool closed_meets(int m, const Word& s) const override { return base_->closed_meets(m, s); }
  bool meets_f(const Word& s) const override { return base_->meets_f(s); }
  bool meets_g(const Word& s) const override { return base_->meets_g(s); }
  RationalInterval f_range(const Word& s) const override {
    const auto r = base_->f_range(s);
    return {r.lo / divisor_, r.hi / divisor_};
  }
  Rational choose(const Word& s) const override { return base_->choose(s) / divisor_; }
  nlohmann::json to_json() const override {
    auto j = base_->to_json();
    j["scale"] = to_string(divisor_);
    return j;
  }

 private:
  std::shared_ptr<const TargetOracle> base_;
  Rational divisor_;
};

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = text.find(sep, pos);
    out.push_back(text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

TargetSpec TargetSpec::finite_set(std::vector<Rational> values) {
  return TargetSpec(std::make_shared<FiniteSetOracle>(std::move(values)));
}

TargetSpec TargetSpec::interval_union(std::vector<RationalInterval> intervals) {
  return TargetSpec(std::make_shared<IntervalUnionOracle>(std::move(intervals)));
}

TargetSpec TargetSpec::effective(std::string_view name, const nlohmann::json& params) {
  if (name == "first_bit") {
    const Rational low = params.contains("low") ? parse_rational(params.at("low").get<std::string>()) : Rational(1, 4);
    const Rational high = params.contains("high") ? parse_rational(params.at("high").get<std::string>()) : Rational(3, 4);
    return TargetSpec(std::make_shared<FirstBitOracle>(low, high));
  }
  if (name == "reciprocals") return TargetSpec(std::make_shared<ReciprocalsOracle>());
  if (name == "cofinite_ones") return TargetSpec(std::make_shared<CofiniteOnesOracle>());
  throw InvalidArgument("unknown effective target '" + std::string(name) + "'");
}

TargetSpec TargetSpec::custom(std::shared_ptr<const TargetOracle> oracle) {
  if (!oracle) throw InvalidArgument("custom target: null oracle");
  return TargetSpec(std::move(oracle));
}

TargetSpec TargetSpec::scaled(const Rational& divisor) const {
  return TargetSpec(std::make_shared<ScaledOracle>(oracle_, divisor));
}

TargetSpec TargetSpec::from_json(const nlohmann::json& j) {
  const std::string mode = j.at("mode").get<std::string>();
  TargetSpec spec = [&] {
    if (mode == "finite_set") {
      std::vector<Rational> values;
      for (const auto& v : j.at("values")) values.push_back(parse_rational(v.get<std::string>()));
      return finite_set(std::move(values));
    }
    if (mode == "interval_union") {
      std::vector<RationalInterval> ivs;
      for (const auto& iv : j.at("intervals")) {
        ivs.push_back({parse_rational(iv.at(0).get<std::string>()), parse_rational(iv.at(1).get<std::string>())});
      }
      return interval_union(std::move(ivs));
    }
    if (mode == "effective") {
      return effective(j.at("oracle").get<std::string>(), j.value("params", nlohmann::json::object()));
    }
    throw InvalidArgument("unknown target mode '" + mode + "'");
  }();
  if (j.contains("scale")) spec = spec.scaled(parse_rational(j.at("scale").get<std::string>()));
  return spec;
}

TargetSpec TargetSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw InvalidArgument("target spec needs 'kind:args': " + std::string(text));
  const auto kind = text.substr(0, colon);
  const auto args = text.substr(colon + 1);
  if (kind == "set") {
    std::vector<Rational> values;
    for (auto part : split(args, ',')) values.push_back(parse_rational(part));
    return finite_set(std::move(values));
  }
  if (kind == "interval") {
    std::vector<RationalInterval> ivs;
    for (auto part : split(args, ';')) {
      const auto ends = split(part, ',');
      if (ends.size() != 2) throw InvalidArgument("interval target needs lo,hi pairs");
      ivs.push_back({parse_rational(ends[0]), parse_rational(ends[1])});
    }
    return interval_union(std::move(ivs));
  }
  if (kind == "effective") {
    const auto parts = split(args, ':');
    if (parts[0] == "first_bit" && parts.size() == 2) {
      const auto ends = split(parts[1], ',');
      if (ends.size() != 2) throw InvalidArgument("first_bit needs low,high");
      return effective("first_bit", {{"low", std::string(ends[0])}, {"high", std::string(ends[1])}});
    }
    return effective(parts[0]);
  }
  throw InvalidArgument("unknown target kind '" + std::string(kind) + "'");
}

}  // namespace microdim
