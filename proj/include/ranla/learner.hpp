#pragma once

#include <cstdint>
#include <vector>

#include "ranla/envelope.hpp"
#include "ranla/qnet.hpp"
#include "ranla/replay.hpp"
#include "ranla/snapshot.hpp"

namespace ranla {

struct LearnerConfig {
  int batch_size = 256;
  double gamma = 0.99;
  double lr = 1e-4;
  int hidden = 128;
  int num_omega_samples = 8;  // shared preference samples per TD step
  double beta_start = 0.4;    // importance-sampling exponent annealed to beta_end
  double beta_end = 1.0;
  int64_t beta_anneal_steps = 1;
  int target_sync_period = 500;  // learner steps between target refreshes
  int publish_period = 500;      // learner steps between snapshot publishes
  int64_t min_fill = 10000;      // replay size gating the first step
  uint64_t seed = 0;
  bool rank_control = true;
  // Symmetric per-component bound on bootstrapped TD targets; 0 disables.
  // Bootstrapped estimates can run away under the max operator even though
  // true returns are bounded by max-reward / (1 - gamma); clamping targets
  // to that feasible box removes the runaway fixed points and leaves the
  // true one untouched.
  double target_clip = 0.0;
  // Learner step at which the learning rate drops by lr_decay_factor;
  // 0 disables. Late decay freezes the policy in the converged regime.
  int64_t lr_decay_step = 0;
  double lr_decay_factor = 0.1;
};

struct LossPoint {
  int64_t step = 0;
  double loss = 0.0;
};

/**
 * Owns the online/target networks and the optimization loop. Each step()
 * samples a prioritized batch, applies one envelope TD update, writes the
 * fresh priorities back, and on its period syncs the target network and
 * publishes a policy snapshot. Deterministic given the seed and the
 * replay contents; the caller drives pacing.
 */
class Learner {
 public:
  Learner(const LearnerConfig& cfg, ReplayBuffer* replay, ModelHub* hub);

  bool ready() const { return static_cast<int64_t>(m_replay->size()) >= m_cfg.min_fill; }

  // One TD step; returns the loss. Throws TrainingError on a non-finite
  // loss and std::logic_error when called before the buffer is filled.
  double step();

  int64_t steps() const { return m_steps; }
  double beta() const;
  const QNetwork& online() const { return m_online; }
  QNetwork& online_mutable() { return m_online; }
  const QNetwork& target() const { return m_target; }
  AdamOptimizer& optimizer() { return m_opt; }
  const AdamOptimizer& optimizer() const { return m_opt; }
  const std::vector<LossPoint>& loss_trace() const { return m_loss_trace; }
  int64_t snapshots_published() const { return m_published; }
  const LearnerConfig& config() const { return m_cfg; }

  // Publishes the current online parameters to the hub.
  void publish();

 private:
  LearnerConfig m_cfg;
  ReplayBuffer* m_replay;
  ModelHub* m_hub;
  QNetwork m_online;
  QNetwork m_target;
  AdamOptimizer m_opt;
  int64_t m_steps = 0;
  int64_t m_published = 0;
  std::vector<LossPoint> m_loss_trace;
};

}  // namespace ranla
