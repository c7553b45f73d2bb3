#pragma once

#include <cstddef>
#include <deque>
#include <initializer_list>
#include <stdexcept>
#include <utility>

#include "briee/envs/comblock.hpp"
#include "briee/replearn/dataset.hpp"

namespace briee::algo {

// Bounded FIFO of transitions for one step index. Eviction is strictly
// first-in-first-out once the capacity is reached.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay buffer: capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  void push(envs::Transition t) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(t));
  }

  // oldest first
  const envs::Transition& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::deque<envs::Transition> items_;
};

// Materializes the union of buffers as a dense regression batch. Row order is
// deterministic: buffers in argument order, each oldest first.
inline replearn::RepLearnDataset make_batch(std::initializer_list<const ReplayBuffer*> buffers,
                                            int obs_dim, int num_actions) {
  std::size_t total = 0;
  for (const ReplayBuffer* b : buffers) {
    if (b == nullptr) throw std::invalid_argument("make_batch: null buffer");
    total += b->size();
  }
  replearn::RepLearnDataset out;
  out.num_actions = num_actions;
  out.obs.resize(static_cast<Eigen::Index>(total), obs_dim);
  out.actions.resize(static_cast<Eigen::Index>(total));
  out.next_obs.resize(static_cast<Eigen::Index>(total), obs_dim);
  Eigen::Index row = 0;
  for (const ReplayBuffer* b : buffers)
    for (std::size_t i = 0; i < b->size(); ++i, ++row) {
      const envs::Transition& t = (*b)[i];
      if (t.s.size() != obs_dim || t.s_next.size() != obs_dim)
        throw std::invalid_argument("make_batch: transition width mismatch");
      out.obs.row(row) = t.s.transpose();
      out.actions[row] = t.a;
      out.next_obs.row(row) = t.s_next.transpose();
    }
  return out;
}

}  // namespace briee::algo
