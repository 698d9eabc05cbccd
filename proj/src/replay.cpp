#include "ranla/replay.hpp"

#include <cmath>
#include <stdexcept>

namespace ranla {

ReplayBuffer::ReplayBuffer(size_t capacity, double alpha) : m_capacity(capacity), m_alpha(alpha) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  if (alpha < 0.0) throw std::invalid_argument("ReplayBuffer: alpha must be non-negative");
  m_leaf_base = 1;
  while (m_leaf_base < capacity) m_leaf_base *= 2;
  m_tree.assign(2 * m_leaf_base, 0.0);
  m_items.reserve(capacity);
}

void ReplayBuffer::tree_set(size_t slot, double value) {
  size_t node = m_leaf_base + slot;
  m_tree[node] = value;
  for (node /= 2; node >= 1; node /= 2) m_tree[node] = m_tree[2 * node] + m_tree[2 * node + 1];
}

size_t ReplayBuffer::tree_find(double mass) const {
  size_t node = 1;
  while (node < m_leaf_base) {
    double left = m_tree[2 * node];
    if (mass < left) {
      node = 2 * node;
    } else {
      mass -= left;
      node = 2 * node + 1;
    }
  }
  return node - m_leaf_base;
}

void ReplayBuffer::push(const Transition& t) {
  if (m_size < m_capacity) {
    m_items.push_back(t);
    ++m_size;
  } else {
    m_items[m_next] = t;
  }
  tree_set(m_next, std::pow(m_max_priority, m_alpha));
  m_next = (m_next + 1) % m_capacity;
}

ReplayBuffer::Batch ReplayBuffer::sample(size_t batch_size, double beta, Rng& rng) const {
  if (m_size == 0) throw std::runtime_error("ReplayBuffer::sample: buffer is empty");
  if (batch_size == 0) throw std::invalid_argument("ReplayBuffer::sample: batch_size must be positive");
  const double total = m_tree[1];
  if (!(total > 0.0)) throw std::runtime_error("ReplayBuffer::sample: total priority is zero");

  Batch batch;
  batch.indices.resize(batch_size);
  batch.items.resize(batch_size);
  batch.weights.resize(static_cast<Eigen::Index>(batch_size));

  const double n = static_cast<double>(m_size);
  double max_weight = 0.0;
  for (size_t i = 0; i < batch_size; ++i) {
    size_t idx = tree_find(rng.uniform() * total);
    if (idx >= m_size) idx = m_size - 1;  // guards the edge of the last leaf
    double prob = m_tree[m_leaf_base + idx] / total;
    double w = std::pow(n * prob, -beta);
    batch.indices[i] = idx;
    batch.items[i] = &m_items[idx];
    batch.weights[static_cast<Eigen::Index>(i)] = w;
    if (w > max_weight) max_weight = w;
  }
  if (max_weight > 0.0) batch.weights /= max_weight;
  return batch;
}

void ReplayBuffer::update_priorities(const std::vector<size_t>& indices,
                                     const std::vector<double>& priorities) {
  if (indices.size() != priorities.size())
    throw std::invalid_argument("ReplayBuffer::update_priorities: size mismatch");
  for (size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= m_size)
      throw std::invalid_argument("ReplayBuffer::update_priorities: index out of range");
    double p = priorities[i];
    if (!(p > 0.0) || !std::isfinite(p))
      throw std::invalid_argument("ReplayBuffer::update_priorities: priority must be positive and finite");
    tree_set(indices[i], std::pow(p, m_alpha));
    if (p > m_max_priority) m_max_priority = p;
  }
}

}  // namespace ranla
