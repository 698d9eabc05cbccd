#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>

namespace ranla {

/**
 * Bounded multi-producer single-consumer queue with drop-oldest overflow:
 * producers never block, so a stalled consumer can slow ingestion but can
 * never stall the producers.
 */
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(size_t capacity) : m_capacity(capacity) {
    if (capacity == 0) throw std::invalid_argument("BoundedQueue: capacity must be positive");
  }

  // Returns the number of items dropped to make room (0 or 1).
  size_t push_drop_oldest(T item) {
    size_t dropped = 0;
    {
      std::lock_guard<std::mutex> lock(m_mu);
      if (m_items.size() >= m_capacity) {
        m_items.pop_front();
        dropped = 1;
      }
      m_items.push_back(std::move(item));
    }
    m_cv.notify_one();
    return dropped;
  }

  std::optional<T> try_pop() {
    std::lock_guard<std::mutex> lock(m_mu);
    if (m_items.empty()) return std::nullopt;
    T item = std::move(m_items.front());
    m_items.pop_front();
    return item;
  }

  // Waits up to the timeout for an item; nullopt on timeout or when the
  // queue is closed and drained.
  std::optional<T> pop_wait(std::chrono::milliseconds timeout) {
    std::unique_lock<std::mutex> lock(m_mu);
    m_cv.wait_for(lock, timeout, [&] { return !m_items.empty() || m_closed; });
    if (m_items.empty()) return std::nullopt;
    T item = std::move(m_items.front());
    m_items.pop_front();
    return item;
  }

  void close() {
    {
      std::lock_guard<std::mutex> lock(m_mu);
      m_closed = true;
    }
    m_cv.notify_all();
  }

  bool closed() const {
    std::lock_guard<std::mutex> lock(m_mu);
    return m_closed;
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(m_mu);
    return m_items.size();
  }

 private:
  size_t m_capacity;
  mutable std::mutex m_mu;
  std::condition_variable m_cv;
  std::deque<T> m_items;
  bool m_closed = false;
};

}  // namespace ranla
