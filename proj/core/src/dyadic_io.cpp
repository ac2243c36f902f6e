#include <bit>
#include <cstring>

#include "microdim/dyadic.hpp"
#include "microdim/errors.hpp"

namespace microdim {

using detail::kNone;
using detail::TreeBuilder;

nlohmann::json to_json(const DyadicSet& a) {
  nlohmann::json leaves = nlohmann::json::array();
  for (const auto& c : a.leaves()) leaves.push_back(c.coords);
  return {{"d", a.dim()}, {"depth", a.depth()}, {"leaves", leaves}};
}

DyadicSet dyadic_from_json(const nlohmann::json& j) {
  const int d = j.at("d").get<int>();
  const int depth = j.at("depth").get<int>();
  std::vector<CubeIdx> leaves;
  for (const auto& item : j.at("leaves")) leaves.push_back({depth, item.get<std::vector<std::uint64_t>>()});
  return DyadicSet::from_leaves(d, depth, leaves);
}

namespace {

constexpr char kMagic[4] = {'D', 'Y', 'S', '1'};
constexpr std::uint64_t kMaxBinaryCubes = std::uint64_t{1} << 28;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw InvalidArgument("binary DyadicSet: truncated header");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(in[pos + i]) << (8 * i);
  pos += sizeof(T);
  return v;
}

}  // namespace

std::vector<std::uint8_t> to_binary(const DyadicSet& a) {
  const int d = a.dim();
  const unsigned fan = 1U << d;
  std::vector<std::uint16_t> masks;
  if (!a.is_empty()) {
    const auto& t = *a.tree();
    std::vector<std::uint32_t> frontier{0};
    for (int l = 0; l < a.depth(); ++l) {
      const auto& lv = t.levels[static_cast<std::size_t>(l)];
      std::vector<std::uint32_t> next;
      for (const auto id : frontier) {
        masks.push_back(lv.mask[id]);
        const auto n = static_cast<std::uint32_t>(std::popcount(static_cast<unsigned>(lv.mask[id])));
        for (std::uint32_t k = 0; k < n; ++k) next.push_back(lv.kids[lv.first[id] + k]);
        if (masks.size() + next.size() > kMaxBinaryCubes) {
          throw ResourceExhausted("binary DyadicSet: too many live cubes to expand");
        }
      }
      frontier = std::move(next);
    }
  }
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.push_back(static_cast<std::uint8_t>(d));
  out.push_back(a.is_empty() ? 1 : 0);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.depth()));
  put_le<std::uint64_t>(out, masks.size());
  const std::size_t bits = masks.size() * fan;
  const std::size_t base = out.size();
  out.resize(base + (bits + 7) / 8, 0);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    for (unsigned c = 0; c < fan; ++c) {
      if (masks[i] & (1U << c)) {
        const std::size_t bit = i * fan + c;
        out[base + bit / 8] |= static_cast<std::uint8_t>(1U << (bit % 8));
      }
    }
  }
  return out;
}

DyadicSet dyadic_from_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw InvalidArgument("binary DyadicSet: bad magic");
  }
  std::size_t pos = 4;
  const int d = get_le<std::uint8_t>(bytes, pos);
  const bool is_empty = get_le<std::uint8_t>(bytes, pos) != 0;
  const int depth = static_cast<int>(get_le<std::uint32_t>(bytes, pos));
  const std::uint64_t count = get_le<std::uint64_t>(bytes, pos);
  if (d < 1 || d > kMaxDim) throw InvalidArgument("binary DyadicSet: bad dimension");
  if (is_empty) return DyadicSet::empty(d, depth);
  if (count > kMaxBinaryCubes) throw ResourceExhausted("binary DyadicSet: too many cubes");
  const unsigned fan = 1U << d;
  if (bytes.size() - pos < (count * fan + 7) / 8) throw InvalidArgument("binary DyadicSet: truncated body");
  auto mask_at = [&](std::uint64_t i) {
    std::uint16_t m = 0;
    for (unsigned c = 0; c < fan; ++c) {
      const std::uint64_t bit = i * fan + c;
      if (bytes[pos + bit / 8] & (1U << (bit % 8))) m |= static_cast<std::uint16_t>(1U << c);
    }
    return m;
  };
  // Split the breadth-first mask stream into levels.
  std::vector<std::vector<std::uint16_t>> levels;
  std::uint64_t next = 0;
  std::uint64_t width = 1;
  for (int l = 0; l < depth; ++l) {
    if (next + width > count) throw InvalidArgument("binary DyadicSet: mask stream too short");
    std::vector<std::uint16_t> lv;
    std::uint64_t below = 0;
    for (std::uint64_t i = 0; i < width; ++i) {
      const auto m = mask_at(next + i);
      if (m == 0) throw InvalidArgument("binary DyadicSet: dead cube in mask stream");
      below += static_cast<std::uint64_t>(std::popcount(static_cast<unsigned>(m)));
      lv.push_back(m);
    }
    next += width;
    width = below;
    levels.push_back(std::move(lv));
  }
  if (next != count) throw InvalidArgument("binary DyadicSet: trailing masks");
  TreeBuilder b(d, depth);
  std::vector<std::int64_t> ids(depth == 0 ? 1 : static_cast<std::size_t>(width), b.leaf());
  for (int l = depth - 1; l >= 0; --l) {
    const auto& lv = levels[static_cast<std::size_t>(l)];
    std::vector<std::int64_t> up;
    up.reserve(lv.size());
    std::size_t k = 0;
    for (const auto m : lv) {
      std::vector<std::int64_t> kids(fan, kNone);
      for (unsigned c = 0; c < fan; ++c) {
        if (m & (1U << c)) kids[c] = ids[k++];
      }
      up.push_back(b.node(l, kids));
    }
    ids = std::move(up);
  }
  return DyadicSet::from_tree(d, depth, b.finish(ids[0]));
}

}  // namespace microdim
