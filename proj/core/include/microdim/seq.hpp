#pragma once

// Finite binary words and programs that generate infinite binary sequences.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "microdim/rational.hpp"

namespace microdim {

/// A finite word over {0,1}. Immutable once built; cheap to copy for the word sizes
/// this library deals with (up to a few million bits).
class Word {
 public:
  Word() = default;
  explicit Word(std::vector<std::uint8_t> bits);
  /// From an ASCII string of '0'/'1'.
  static Word parse(std::string_view text);
  static Word zeros(std::size_t n);
  static Word ones(std::size_t n);

  std::size_t length() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  int operator[](std::size_t i) const { return bits_[i]; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }

  /// Number of ones (sigma).
  std::uint64_t ones_count() const noexcept;
  /// sigma / length; rejects the empty word.
  Rational density() const;

  Word prefix(std::size_t n) const;
  Word suffix_from(std::size_t k) const;
  Word append(int bit) const;
  /// Word of length length()-1; rejects the empty word.
  Word parent() const;

  std::string str() const;

  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

Word concat(std::span<const Word> words);
Word concat(const Word& a, const Word& b);

/// True iff for every n <= max_factor_len all length-n factors of w have 1-counts that
/// differ by at most one.
bool is_balanced(const Word& w, std::size_t max_factor_len);

/// Prefix densities sigma(w|n)/n for n = 1..length.
std::vector<Rational> density_profile(const Word& w);

/// Block source for block-concatenation programs: block j has length(j) bits and
/// bit(j, i) gives its i-th bit. `kind`/`params` name a registered generator so the
/// program can round-trip through JSON.
struct BlockGenerator {
  std::string kind;
  nlohmann::json params;
  std::function<std::uint64_t(std::uint64_t)> length;
  std::function<int(std::uint64_t, std::uint64_t)> bit;
};

/// Blocks alternate between prefixes of the balanced sequences of densities `low` and
/// `high`. Block 0 has `first_length` bits; each later block is `growth` times as long
/// as everything before it, so the prefix density swings toward low and high in turn.
BlockGenerator alternating_blocks(const Rational& low, const Rational& high,
                                  std::uint64_t first_length, std::uint64_t growth);
/// Cycles through an explicit list of non-empty words.
BlockGenerator cyclic_blocks(std::vector<Word> words);

/// A deterministic program i -> x(i) for an infinite binary sequence.
class SeqProgram {
 public:
  static SeqProgram periodic(Word period);
  /// The balanced (Sturmian/Beatty) sequence x(i) = floor((i+1)a) - floor(i a).
  static SeqProgram beatty(const Rational& a);
  static SeqProgram blocks(BlockGenerator generator);

  /// T^m applied to this program: index i evaluates as this(i+m).
  SeqProgram shifted(std::uint64_t m) const;

  int bit(std::uint64_t i) const;
  /// The n bits starting at index k.
  Word factor(std::uint64_t k, std::uint64_t n) const;
  Word prefix(std::uint64_t n) const { return factor(0, n); }

  nlohmann::json to_json() const;
  static SeqProgram from_json(const nlohmann::json& j);
  /// Compact spec strings used by the CLI: "beatty:1/3", "periodic:01",
  /// "word:101101" (followed by zeros), "alternating:1/4,3/4[,first,growth]".
  static SeqProgram parse(std::string_view spec);

  struct Impl;

 private:
  explicit SeqProgram(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// The Beatty program of density a; rejects a outside [0,1].
SeqProgram beatty_balanced(const Rational& a);

/// The n bits of p starting at index k.
inline Word factor(const SeqProgram& p, std::uint64_t k, std::uint64_t n) { return p.factor(k, n); }

}  // namespace microdim
