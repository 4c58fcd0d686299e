#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace kadlab {

// Fixed-width identifier. Bit 0 is the most significant bit; bits are stored
// left-aligned in three 64-bit words.
class NodeId {
 public:
  static constexpr int kMaxWidth = 192;
  using Words = std::array<std::uint64_t, 3>;

  NodeId() = default;
  explicit NodeId(int width);
  NodeId(int width, const Words& words);

  static NodeId from_hex(std::string_view hex, int width);
  static NodeId from_bits(std::string_view bits);  // "0101..." of any length

  template <class Rng>
  static NodeId random(int width, Rng& rng) {
    Words w{};
    for (auto& word : w) word = rng();
    return NodeId(width, w);
  }

  int width() const { return width_; }
  const Words& words() const { return words_; }

  bool bit(int i) const { return (words_[i >> 6] >> (63 - (i & 63))) & 1U; }
  void set_bit(int i, bool value);

  // Reads count (<= 64) bits starting at pos as an unsigned integer.
  std::uint64_t bits(int pos, int count) const;
  // Overwrites count (<= 64) bits starting at pos.
  void set_bits(int pos, int count, std::uint64_t value);

  // Keeps the first len bits and zeroes the rest.
  NodeId prefix(int len) const;
  // Sets every bit from pos to the end.
  NodeId fill_ones_from(int pos) const;

  std::string to_hex() const;
  std::string to_bits() const;

  NodeId operator^(const NodeId& other) const;

  friend bool operator==(const NodeId& a, const NodeId& b) {
    return a.width_ == b.width_ && a.words_ == b.words_;
  }
  friend std::strong_ordering operator<=>(const NodeId& a, const NodeId& b) {
    return a.words_ <=> b.words_;
  }

 private:
  void mask_tail();

  Words words_{};
  int width_ = 0;
};

int common_prefix_length(const NodeId& x, const NodeId& y);
int bit_distance(const NodeId& x, const NodeId& y);

// True when xor(x, a) < xor(x, b).
bool closer_to(const NodeId& x, const NodeId& a, const NodeId& b);

struct DiversityDegree {
  int value = 0;
  int max_value = 0;
};

DiversityDegree diversity_degree(std::span<const NodeId> ids, int prefix_len, int q);

struct NodeIdHash {
  std::size_t operator()(const NodeId& id) const noexcept;
};

}  // namespace kadlab
