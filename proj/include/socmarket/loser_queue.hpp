#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "socmarket/topology.hpp"

namespace socmarket {

// Indexed binary min-heap over per-agent keys. Ties break toward the lower
// agent id, so top() matches a linear argmin scan exactly.
class LoserQueue {
 public:
  LoserQueue() = default;
  explicit LoserQueue(std::span<const double> keys) { assign(keys); }

  void assign(std::span<const double> keys) {
    key_.assign(keys.begin(), keys.end());
    heap_.resize(key_.size());
    slot_.resize(key_.size());
    for (std::size_t i = 0; i < key_.size(); ++i) {
      heap_[i] = static_cast<AgentId>(i);
      slot_[i] = static_cast<std::uint32_t>(i);
    }
    for (std::size_t k = heap_.size() / 2; k-- > 0;) sift_down(k);
  }

  bool empty() const noexcept { return heap_.empty(); }
  std::size_t size() const noexcept { return heap_.size(); }
  AgentId top() const { return heap_.front(); }
  double key(AgentId i) const { return key_[i]; }

  void update(AgentId i, double key) {
    const double old = key_[i];
    key_[i] = key;
    if (key < old || (key == old)) {
      sift_up(slot_[i]);
    } else {
      sift_down(slot_[i]);
    }
  }

 private:
  bool before(AgentId a, AgentId b) const {
    return key_[a] < key_[b] || (key_[a] == key_[b] && a < b);
  }

  void place(std::size_t k, AgentId id) {
    heap_[k] = id;
    slot_[id] = static_cast<std::uint32_t>(k);
  }

  void sift_up(std::size_t k) {
    const AgentId id = heap_[k];
    while (k > 0) {
      const std::size_t parent = (k - 1) / 2;
      if (!before(id, heap_[parent])) break;
      place(k, heap_[parent]);
      k = parent;
    }
    place(k, id);
  }

  void sift_down(std::size_t k) {
    const AgentId id = heap_[k];
    const std::size_t n = heap_.size();
    for (;;) {
      std::size_t child = 2 * k + 1;
      if (child >= n) break;
      if (child + 1 < n && before(heap_[child + 1], heap_[child])) ++child;
      if (!before(heap_[child], id)) break;
      place(k, heap_[child]);
      k = child;
    }
    place(k, id);
  }

  std::vector<double> key_;
  std::vector<AgentId> heap_;
  std::vector<std::uint32_t> slot_;
};

}  // namespace socmarket
