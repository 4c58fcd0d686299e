#include "kadlab/node_id.hpp"

#include <algorithm>
#include <bit>
#include <vector>

#include "kadlab/errors.hpp"

namespace kadlab {

namespace {

void check_width(int width) {
  require(width >= 1 && width <= NodeId::kMaxWidth, "identifier width out of range");
}

void check_same_width(const NodeId& x, const NodeId& y) {
  require(x.width() == y.width(), "identifier width mismatch");
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

NodeId::NodeId(int width) : width_(width) { check_width(width); }

NodeId::NodeId(int width, const Words& words) : words_(words), width_(width) {
  check_width(width);
  mask_tail();
}

void NodeId::mask_tail() {
  for (int w = 0; w < 3; ++w) {
    const int first_bit = w * 64;
    if (first_bit >= width_) {
      words_[w] = 0;
    } else if (first_bit + 64 > width_) {
      const int keep = width_ - first_bit;
      words_[w] &= ~std::uint64_t{0} << (64 - keep);
    }
  }
}

NodeId NodeId::from_hex(std::string_view hex, int width) {
  check_width(width);
  const int digits = (width + 3) / 4;
  require(static_cast<int>(hex.size()) == digits, "hex identifier has wrong length");
  const int pad = digits * 4 - width;
  NodeId id(width);
  for (int j = 0; j < digits; ++j) {
    const int v = hex_value(hex[j]);
    require(v >= 0, "invalid hex digit");
    for (int t = 0; t < 4; ++t) {
      const int padded_pos = j * 4 + t;
      const bool on = (v >> (3 - t)) & 1;
      if (padded_pos < pad) {
        require(!on, "hex identifier exceeds width");
      } else if (on) {
        id.set_bit(padded_pos - pad, true);
      }
    }
  }
  return id;
}

NodeId NodeId::from_bits(std::string_view bits) {
  NodeId id(static_cast<int>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    require(bits[i] == '0' || bits[i] == '1', "invalid bit character");
    id.set_bit(static_cast<int>(i), bits[i] == '1');
  }
  return id;
}

void NodeId::set_bit(int i, bool value) {
  require(i >= 0 && i < width_, "bit index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (63 - (i & 63));
  if (value) {
    words_[i >> 6] |= mask;
  } else {
    words_[i >> 6] &= ~mask;
  }
}

std::uint64_t NodeId::bits(int pos, int count) const {
  if (count == 0) return 0;
  const int w = pos >> 6;
  const int off = pos & 63;
  std::uint64_t hi = words_[w] << off;
  if (off != 0 && w + 1 < 3) hi |= words_[w + 1] >> (64 - off);
  return hi >> (64 - count);
}

void NodeId::set_bits(int pos, int count, std::uint64_t value) {
  for (int t = 0; t < count; ++t) set_bit(pos + t, (value >> (count - 1 - t)) & 1U);
}

NodeId NodeId::prefix(int len) const {
  NodeId out(*this);
  for (int w = 0; w < 3; ++w) {
    const int first_bit = w * 64;
    if (first_bit >= len) {
      out.words_[w] = 0;
    } else if (first_bit + 64 > len) {
      out.words_[w] &= ~std::uint64_t{0} << (64 - (len - first_bit));
    }
  }
  return out;
}

NodeId NodeId::fill_ones_from(int pos) const {
  NodeId out(*this);
  for (int w = 0; w < 3; ++w) {
    const int first_bit = w * 64;
    if (first_bit >= pos) {
      out.words_[w] = ~std::uint64_t{0};
    } else if (first_bit + 64 > pos) {
      out.words_[w] |= ~std::uint64_t{0} >> (pos - first_bit);
    }
  }
  out.mask_tail();
  return out;
}

std::string NodeId::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const int digits = (width_ + 3) / 4;
  const int pad = digits * 4 - width_;
  std::string out(static_cast<std::size_t>(digits), '0');
  for (int j = 0; j < digits; ++j) {
    int v = 0;
    for (int t = 0; t < 4; ++t) {
      const int pos = j * 4 + t - pad;
      v = (v << 1) | (pos >= 0 && bit(pos) ? 1 : 0);
    }
    out[static_cast<std::size_t>(j)] = kDigits[v];
  }
  return out;
}

std::string NodeId::to_bits() const {
  std::string out(static_cast<std::size_t>(width_), '0');
  for (int i = 0; i < width_; ++i) {
    if (bit(i)) out[static_cast<std::size_t>(i)] = '1';
  }
  return out;
}

NodeId NodeId::operator^(const NodeId& other) const {
  check_same_width(*this, other);
  NodeId out(*this);
  for (int w = 0; w < 3; ++w) out.words_[w] ^= other.words_[w];
  return out;
}

int common_prefix_length(const NodeId& x, const NodeId& y) {
  check_same_width(x, y);
  for (int w = 0; w < 3; ++w) {
    const std::uint64_t diff = x.words()[w] ^ y.words()[w];
    if (diff != 0) return std::min(x.width(), w * 64 + std::countl_zero(diff));
  }
  return x.width();
}

int bit_distance(const NodeId& x, const NodeId& y) {
  return x.width() - common_prefix_length(x, y);
}

bool closer_to(const NodeId& x, const NodeId& a, const NodeId& b) {
  for (int w = 0; w < 3; ++w) {
    const std::uint64_t da = x.words()[w] ^ a.words()[w];
    const std::uint64_t db = x.words()[w] ^ b.words()[w];
    if (da != db) return da < db;
  }
  return false;
}

DiversityDegree diversity_degree(std::span<const NodeId> ids, int prefix_len, int q) {
  require(q >= 1 && q <= 20, "q must be in [1, 20]");
  DiversityDegree out{0, 1 << q};
  if (ids.empty()) return out;
  const NodeId& first = ids.front();
  require(prefix_len >= 0 && prefix_len + q <= first.width(), "prefix_len + q exceeds width");
  std::vector<std::uint64_t> patterns;
  patterns.reserve(ids.size());
  for (const auto& id : ids) {
    require(id.width() == first.width(), "identifier width mismatch");
    require(common_prefix_length(id, first) >= prefix_len, "identifiers do not share the prefix");
    patterns.push_back(id.bits(prefix_len, q));
  }
  std::sort(patterns.begin(), patterns.end());
  out.value = static_cast<int>(std::unique(patterns.begin(), patterns.end()) - patterns.begin());
  return out;
}

std::size_t NodeIdHash::operator()(const NodeId& id) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(id.width());
  for (auto w : id.words()) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace kadlab
