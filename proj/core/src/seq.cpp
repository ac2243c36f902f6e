#include "microdim/seq.hpp"

#include <algorithm>
#include <numeric>
#include <variant>

#include "microdim/errors.hpp"

namespace microdim {

// ---------------------------------------------------------------------------
// Word

Word::Word(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto b : bits_) {
    if (b > 1) throw InvalidArgument("Word bits must be 0 or 1");
  }
}

Word Word::parse(std::string_view text) {
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char ch : text) {
    if (ch != '0' && ch != '1') {
      throw InvalidArgument("word literal must contain only 0/1: '" + std::string(text) + "'");
    }
    bits.push_back(static_cast<std::uint8_t>(ch - '0'));
  }
  return Word(std::move(bits));
}

Word Word::zeros(std::size_t n) { return Word(std::vector<std::uint8_t>(n, 0)); }
Word Word::ones(std::size_t n) { return Word(std::vector<std::uint8_t>(n, 1)); }

std::uint64_t Word::ones_count() const noexcept {
  return static_cast<std::uint64_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

Rational Word::density() const {
  if (bits_.empty()) throw InvalidArgument("density of the empty word is undefined");
  return Rational(ones_count(), bits_.size());
}

Word Word::prefix(std::size_t n) const {
  if (n > bits_.size()) throw InvalidArgument("prefix longer than word");
  return Word(std::vector<std::uint8_t>(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(n)));
}

Word Word::suffix_from(std::size_t k) const {
  if (k > bits_.size()) throw InvalidArgument("suffix start past end of word");
  return Word(std::vector<std::uint8_t>(bits_.begin() + static_cast<std::ptrdiff_t>(k), bits_.end()));
}

Word Word::append(int bit) const {
  auto bits = bits_;
  bits.push_back(static_cast<std::uint8_t>(bit != 0));
  return Word(std::move(bits));
}

Word Word::parent() const {
  if (bits_.empty()) throw InvalidArgument("the empty word has no parent");
  return prefix(bits_.size() - 1);
}

std::string Word::str() const {
  std::string out(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) out[i] = static_cast<char>('0' + bits_[i]);
  return out;
}

Word concat(std::span<const Word> words) {
  std::size_t total = 0;
  for (const auto& w : words) total += w.length();
  std::vector<std::uint8_t> bits;
  bits.reserve(total);
  for (const auto& w : words) bits.insert(bits.end(), w.bits().begin(), w.bits().end());
  return Word(std::move(bits));
}

Word concat(const Word& a, const Word& b) {
  const Word both[] = {a, b};
  return concat(std::span<const Word>(both));
}

bool is_balanced(const Word& w, std::size_t max_factor_len) {
  if (max_factor_len > w.length()) {
    throw InvalidArgument("is_balanced: maxFactorLen exceeds word length");
  }
  std::vector<std::uint32_t> prefix(w.length() + 1, 0);
  for (std::size_t i = 0; i < w.length(); ++i) prefix[i + 1] = prefix[i] + static_cast<std::uint32_t>(w[i]);
  for (std::size_t n = 1; n <= max_factor_len; ++n) {
    std::uint32_t lo = prefix[n];
    std::uint32_t hi = prefix[n];
    for (std::size_t k = 1; k + n <= w.length(); ++k) {
      const std::uint32_t s = prefix[k + n] - prefix[k];
      lo = std::min(lo, s);
      hi = std::max(hi, s);
      if (hi - lo > 1) return false;
    }
  }
  return true;
}

std::vector<Rational> density_profile(const Word& w) {
  if (w.empty()) throw InvalidArgument("density_profile of the empty word");
  std::vector<Rational> out;
  out.reserve(w.length());
  std::uint64_t ones = 0;
  for (std::size_t n = 1; n <= w.length(); ++n) {
    ones += static_cast<std::uint64_t>(w[n - 1]);
    out.emplace_back(ones, n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Beatty evaluation

namespace {

struct BeattyParams {
  std::int64_t p;
  std::int64_t q;
};

BeattyParams beatty_params(const Rational& a) {
  if (a < 0 || a > 1) throw InvalidArgument("beatty density must lie in [0,1], got " + to_string(a));
  return {small_numerator(a), small_denominator(a)};
}

int beatty_bit(const BeattyParams& bp, std::uint64_t i) {
  using i128 = __int128;
  const i128 hi = (static_cast<i128>(i) + 1) * bp.p / bp.q;
  const i128 lo = static_cast<i128>(i) * bp.p / bp.q;
  return static_cast<int>(hi - lo);
}

}  // namespace

BlockGenerator alternating_blocks(const Rational& low, const Rational& high,
                                  std::uint64_t first_length, std::uint64_t growth) {
  if (first_length == 0 || growth == 0) {
    throw InvalidArgument("alternating blocks need positive first length and growth");
  }
  const BeattyParams lo = beatty_params(low);
  const BeattyParams hi = beatty_params(high);
  BlockGenerator gen;
  gen.kind = "alternating";
  gen.params = {{"low", to_string(low)},
                {"high", to_string(high)},
                {"first", first_length},
                {"growth", growth}};
  // Block j has length first * (growth+1)^j * growth / (growth+1) for j >= 1, i.e.
  // growth times the total of all preceding blocks.
  gen.length = [first_length, growth](std::uint64_t j) -> std::uint64_t {
    if (j == 0) return first_length;
    unsigned __int128 total = first_length;
    for (std::uint64_t b = 1; b < j; ++b) total += total * growth;
    const unsigned __int128 len = total * growth;
    if (len > (static_cast<unsigned __int128>(1) << 62)) {
      throw ResourceExhausted("alternating block length overflow");
    }
    return static_cast<std::uint64_t>(len);
  };
  gen.bit = [lo, hi](std::uint64_t j, std::uint64_t i) {
    return beatty_bit(j % 2 == 0 ? lo : hi, i);
  };
  return gen;
}

BlockGenerator cyclic_blocks(std::vector<Word> words) {
  if (words.empty()) throw InvalidArgument("cyclic blocks need at least one word");
  for (const auto& w : words) {
    if (w.empty()) throw InvalidArgument("cyclic blocks must be non-empty words");
  }
  BlockGenerator gen;
  gen.kind = "cyclic";
  nlohmann::json list = nlohmann::json::array();
  for (const auto& w : words) list.push_back(w.str());
  gen.params = {{"words", list}};
  auto shared = std::make_shared<const std::vector<Word>>(std::move(words));
  gen.length = [shared](std::uint64_t j) { return (*shared)[j % shared->size()].length(); };
  gen.bit = [shared](std::uint64_t j, std::uint64_t i) { return (*shared)[j % shared->size()][i]; };
  return gen;
}

namespace {

BlockGenerator finite_then_zeros(const Word& w) {
  BlockGenerator gen;
  gen.kind = "finite";
  gen.params = {{"word", w.str()}};
  auto shared = std::make_shared<const Word>(w);
  // Block 0 is the word itself (possibly empty); every later block is one zero bit.
  gen.length = [shared](std::uint64_t j) -> std::uint64_t { return j == 0 ? shared->length() : 1; };
  gen.bit = [shared](std::uint64_t j, std::uint64_t i) { return j == 0 ? (*shared)[i] : 0; };
  return gen;
}

BlockGenerator block_generator_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto& params = j.at("params");
  if (kind == "alternating") {
    return alternating_blocks(parse_rational(params.at("low").get<std::string>()),
                              parse_rational(params.at("high").get<std::string>()),
                              params.at("first").get<std::uint64_t>(),
                              params.at("growth").get<std::uint64_t>());
  }
  if (kind == "cyclic") {
    std::vector<Word> words;
    for (const auto& w : params.at("words")) words.push_back(Word::parse(w.get<std::string>()));
    return cyclic_blocks(std::move(words));
  }
  if (kind == "finite") return finite_then_zeros(Word::parse(params.at("word").get<std::string>()));
  throw InvalidArgument("unknown block generator kind '" + kind + "'");
}

}  // namespace

// ---------------------------------------------------------------------------
// SeqProgram

struct SeqProgram::Impl {
  struct Periodic {
    Word period;
  };
  struct Beatty {
    Rational a;
    BeattyParams bp;
  };
  struct Blocks {
    BlockGenerator gen;
  };
  struct Shifted {
    SeqProgram base;
    std::uint64_t m;
  };
  std::variant<Periodic, Beatty, Blocks, Shifted> kind;
};

SeqProgram SeqProgram::periodic(Word period) {
  if (period.empty()) throw InvalidArgument("periodic program needs a non-empty period");
  return SeqProgram(std::make_shared<const Impl>(Impl{Impl::Periodic{std::move(period)}}));
}

SeqProgram SeqProgram::beatty(const Rational& a) {
  return SeqProgram(std::make_shared<const Impl>(Impl{Impl::Beatty{a, beatty_params(a)}}));
}

SeqProgram SeqProgram::blocks(BlockGenerator generator) {
  if (!generator.length || !generator.bit) throw InvalidArgument("incomplete block generator");
  return SeqProgram(std::make_shared<const Impl>(Impl{Impl::Blocks{std::move(generator)}}));
}

SeqProgram SeqProgram::shifted(std::uint64_t m) const {
  if (const auto* s = std::get_if<Impl::Shifted>(&impl_->kind)) {
    return SeqProgram(std::make_shared<const Impl>(Impl{Impl::Shifted{s->base, s->m + m}}));
  }
  return SeqProgram(std::make_shared<const Impl>(Impl{Impl::Shifted{*this, m}}));
}

int SeqProgram::bit(std::uint64_t i) const { return factor(i, 1)[0]; }

Word SeqProgram::factor(std::uint64_t k, std::uint64_t n) const {
  std::vector<std::uint8_t> out;
  out.reserve(n);
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Impl::Periodic>) {
          const std::uint64_t p = v.period.length();
          for (std::uint64_t i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v.period[(k + i) % p]));
        } else if constexpr (std::is_same_v<T, Impl::Beatty>) {
          for (std::uint64_t i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(beatty_bit(v.bp, k + i)));
        } else if constexpr (std::is_same_v<T, Impl::Blocks>) {
          std::uint64_t block = 0;
          std::uint64_t start = 0;
          std::uint64_t len = v.gen.length(0);
          while (start + len <= k) {
            start += len;
            len = v.gen.length(++block);
          }
          std::uint64_t offset = k - start;
          while (out.size() < n) {
            if (offset >= len) {
              offset = 0;
              len = v.gen.length(++block);
              continue;
            }
            out.push_back(static_cast<std::uint8_t>(v.gen.bit(block, offset)));
            ++offset;
          }
        } else {
          Word inner = v.base.factor(k + v.m, n);
          out.assign(inner.bits().begin(), inner.bits().end());
        }
      },
      impl_->kind);
  return Word(std::move(out));
}

nlohmann::json SeqProgram::to_json() const {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Impl::Periodic>) {
          return {{"kind", "periodic"}, {"params", {{"period", v.period.str()}}}};
        } else if constexpr (std::is_same_v<T, Impl::Beatty>) {
          return {{"kind", "beatty"}, {"params", {{"a", to_string(v.a)}}}};
        } else if constexpr (std::is_same_v<T, Impl::Blocks>) {
          return {{"kind", "blocks"},
                  {"params", {{"generator", {{"kind", v.gen.kind}, {"params", v.gen.params}}}}}};
        } else {
          return {{"kind", "shifted"}, {"params", {{"m", v.m}, {"base", v.base.to_json()}}}};
        }
      },
      impl_->kind);
}

SeqProgram SeqProgram::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  const auto& params = j.at("params");
  if (kind == "periodic") return periodic(Word::parse(params.at("period").get<std::string>()));
  if (kind == "beatty") return beatty(parse_rational(params.at("a").get<std::string>()));
  if (kind == "blocks") return blocks(block_generator_from_json(params.at("generator")));
  if (kind == "shifted") return from_json(params.at("base")).shifted(params.at("m").get<std::uint64_t>());
  throw InvalidArgument("unknown SeqProgram kind '" + kind + "'");
}

SeqProgram SeqProgram::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw InvalidArgument("sequence spec needs 'kind:args': " + std::string(spec));
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view args = spec.substr(colon + 1);
  if (kind == "beatty") return beatty_balanced(parse_rational(args));
  if (kind == "periodic") return periodic(Word::parse(args));
  if (kind == "word") return blocks(finite_then_zeros(Word::parse(args)));
  if (kind == "alternating") {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos <= args.size()) {
      const auto comma = args.find(',', pos);
      const auto end = comma == std::string_view::npos ? args.size() : comma;
      parts.push_back(args.substr(pos, end - pos));
      pos = end + 1;
    }
    if (parts.size() != 2 && parts.size() != 4) {
      throw InvalidArgument("alternating spec is low,high[,first,growth]");
    }
    std::uint64_t first = 1;
    std::uint64_t growth = 4;
    if (parts.size() == 4) {
      first = std::stoull(std::string(parts[2]));
      growth = std::stoull(std::string(parts[3]));
    }
    return blocks(alternating_blocks(parse_rational(parts[0]), parse_rational(parts[1]), first, growth));
  }
  throw InvalidArgument("unknown sequence kind '" + std::string(kind) + "'");
}

SeqProgram beatty_balanced(const Rational& a) { return SeqProgram::beatty(a); }

}  // namespace microdim
