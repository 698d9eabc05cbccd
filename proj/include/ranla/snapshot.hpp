#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <mutex>

#include "ranla/features.hpp"
#include "ranla/qnet.hpp"

namespace ranla {

/** Immutable policy snapshot published by the learner. */
struct ModelSnapshot {
  uint64_t version = 0;                              // assigned by the hub
  int state_schema_version = kStateSchemaVersion;    // layout the net was trained on
  QNetConfig arch;
  Eigen::VectorXd params;
  bool rank_control = true;  // mask regime the policy was trained under
  int64_t learner_steps = 0;
};

/**
 * Single-slot snapshot exchange between the learner and the actors.
 * publish() stamps strictly increasing versions starting at 1; pull()
 * returns the latest snapshot or nullptr while none has been published
 * ("no model yet" -- callers fall back to the OLLA baseline).
 */
class ModelHub {
 public:
  uint64_t publish(ModelSnapshot snap) {
    std::lock_guard<std::mutex> lock(m_mu);
    snap.version = m_next_version++;
    auto holder = std::make_shared<const ModelSnapshot>(std::move(snap));
    m_latest = holder;
    return holder->version;
  }

  std::shared_ptr<const ModelSnapshot> pull() const {
    std::lock_guard<std::mutex> lock(m_mu);
    return m_latest;
  }

 private:
  mutable std::mutex m_mu;
  std::shared_ptr<const ModelSnapshot> m_latest;
  uint64_t m_next_version = 1;
};

}  // namespace ranla
