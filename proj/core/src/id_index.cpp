#include "kadlab/id_index.hpp"

#include <algorithm>

#include "kadlab/errors.hpp"

namespace kadlab {

namespace {

bool id_less(const IdIndex::Entry& e, const NodeId& id) { return e.id < id; }

}  // namespace

IdIndex::IdIndex(std::vector<Entry> entries) : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < entries_.size(); ++i) {
    require(!(entries_[i - 1].id == entries_[i].id), "duplicate identifier");
  }
}

void IdIndex::insert(const NodeId& id, std::uint64_t handle) {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), id, id_less);
  require(it == entries_.end() || !(it->id == id), "duplicate identifier");
  entries_.insert(it, Entry{id, handle});
}

bool IdIndex::erase(const NodeId& id) {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), id, id_less);
  if (it == entries_.end() || !(it->id == id)) return false;
  entries_.erase(it);
  return true;
}

std::size_t IdIndex::position(const NodeId& id) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), id, id_less);
  if (it == entries_.end() || !(it->id == id)) return entries_.size();
  return static_cast<std::size_t>(it - entries_.begin());
}

bool IdIndex::contains(const NodeId& id) const { return position(id) != entries_.size(); }

IdIndex::Range IdIndex::range(const NodeId& prefix, int prefix_len) const {
  const NodeId low = prefix.prefix(prefix_len);
  const NodeId high = low.fill_ones_from(prefix_len);
  const auto lo = std::lower_bound(entries_.begin(), entries_.end(), low, id_less);
  const auto hi = std::upper_bound(lo, entries_.end(), high, [](const NodeId& id, const Entry& e) { return id < e.id; });
  return {static_cast<std::size_t>(lo - entries_.begin()), static_cast<std::size_t>(hi - entries_.begin())};
}

// First index in [lo, hi) whose bit `bit` is set; the range shares all earlier bits.
std::size_t IdIndex::split(std::size_t lo, std::size_t hi, int bit) const {
  const auto first = entries_.begin() + static_cast<std::ptrdiff_t>(lo);
  const auto last = entries_.begin() + static_cast<std::ptrdiff_t>(hi);
  return static_cast<std::size_t>(
      std::partition_point(first, last, [bit](const Entry& e) { return !e.id.bit(bit); }) - entries_.begin());
}

void IdIndex::collect(const NodeId& target, std::size_t lo, std::size_t hi, int bit, int count,
                      std::vector<std::size_t>& out) const {
  while (static_cast<int>(out.size()) < count && lo < hi) {
    if (hi - lo == 1 || bit >= target.width()) {
      for (std::size_t i = lo; i < hi && static_cast<int>(out.size()) < count; ++i) out.push_back(i);
      return;
    }
    const std::size_t mid = split(lo, hi, bit);
    if (mid == lo || mid == hi) {
      ++bit;
      continue;
    }
    if (target.bit(bit)) {
      collect(target, mid, hi, bit + 1, count, out);
      hi = mid;
    } else {
      collect(target, lo, mid, bit + 1, count, out);
      lo = mid;
    }
    ++bit;
  }
}

std::vector<std::size_t> IdIndex::closest(const NodeId& target, int count, const NodeId& prefix,
                                          int prefix_len) const {
  std::vector<std::size_t> out;
  if (count <= 0) return out;
  const auto [lo, hi] = range(prefix, prefix_len);
  collect(target, lo, hi, prefix_len, count, out);
  return out;
}

std::vector<std::size_t> IdIndex::closest(const NodeId& target, int count) const {
  return closest(target, count, target, 0);
}

int IdIndex::deepest_level(std::size_t i) const {
  int best = -1;
  if (i > 0) best = std::max(best, common_prefix_length(entries_[i].id, entries_[i - 1].id));
  if (i + 1 < entries_.size()) best = std::max(best, common_prefix_length(entries_[i].id, entries_[i + 1].id));
  return best;
}

int IdIndex::deepest_level(const NodeId& id) const {
  const auto pos = static_cast<std::size_t>(
      std::lower_bound(entries_.begin(), entries_.end(), id, id_less) - entries_.begin());
  int best = -1;
  const auto consider = [&](std::size_t i) {
    if (i < entries_.size() && !(entries_[i].id == id)) {
      best = std::max(best, common_prefix_length(entries_[i].id, id));
    }
  };
  if (pos > 0) consider(pos - 1);
  consider(pos);
  consider(pos + 1);
  return best;
}

}  // namespace kadlab
