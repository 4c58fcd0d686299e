#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "kadlab/node_id.hpp"

namespace kadlab {

// Sorted set of identifiers with prefix-range and XOR-nearest queries.
class IdIndex {
 public:
  struct Entry {
    NodeId id;
    std::uint64_t handle;
  };
  using Range = std::pair<std::size_t, std::size_t>;

  IdIndex() = default;
  explicit IdIndex(std::vector<Entry> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& operator[](std::size_t i) const { return entries_[i]; }

  void insert(const NodeId& id, std::uint64_t handle);
  bool erase(const NodeId& id);
  bool contains(const NodeId& id) const;
  std::size_t position(const NodeId& id) const;  // size() when absent

  // Entries whose ids start with the first prefix_len bits of prefix.
  Range range(const NodeId& prefix, int prefix_len) const;
  // Up to count entries of the range, XOR-closest to target first.
  std::vector<std::size_t> closest(const NodeId& target, int count, const NodeId& prefix, int prefix_len) const;
  std::vector<std::size_t> closest(const NodeId& target, int count) const;
  // Longest common prefix of entry i with any other entry, -1 if alone.
  int deepest_level(std::size_t i) const;
  int deepest_level(const NodeId& id) const;

 private:
  std::size_t split(std::size_t lo, std::size_t hi, int bit) const;
  void collect(const NodeId& target, std::size_t lo, std::size_t hi, int bit, int count,
               std::vector<std::size_t>& out) const;

  std::vector<Entry> entries_;
};

}  // namespace kadlab
