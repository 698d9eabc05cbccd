#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "ranla/rng.hpp"
#include "ranla/transition.hpp"

namespace ranla {

/**
 * Proportional prioritized replay over a fixed-capacity ring. Priorities
 * are stored as p^alpha in a binary sum tree, so sampling and priority
 * updates are O(log n). Eviction is strictly FIFO regardless of priority.
 *
 * New items enter at the running maximum priority seen so far (1.0 before
 * any update) so fresh experience is sampled at least once before its TD
 * error is known.
 *
 * Not thread safe: the learner thread owns the buffer and performs all
 * ingestion and sampling itself.
 */
class ReplayBuffer {
 public:
  ReplayBuffer(size_t capacity, double alpha);

  void push(const Transition& t);

  size_t size() const { return m_size; }
  size_t capacity() const { return m_capacity; }
  double max_priority() const { return m_max_priority; }

  const Transition& at(size_t idx) const { return m_items[idx]; }

  struct Batch {
    std::vector<size_t> indices;
    std::vector<const Transition*> items;
    Eigen::VectorXd weights;  // normalized by the batch maximum
  };

  // Proportional sample with importance weights w = (N * P(i))^-beta,
  // normalized by the largest weight in the batch. Throws when empty.
  Batch sample(size_t batch_size, double beta, Rng& rng) const;

  void update_priorities(const std::vector<size_t>& indices, const std::vector<double>& priorities);

 private:
  void tree_set(size_t slot, double value);
  size_t tree_find(double mass) const;

  size_t m_capacity;
  double m_alpha;
  size_t m_leaf_base;  // first leaf index in m_tree
  std::vector<double> m_tree;
  std::vector<Transition> m_items;
  size_t m_next = 0;
  size_t m_size = 0;
  double m_max_priority = 1.0;
};

}  // namespace ranla
