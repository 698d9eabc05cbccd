#include "ranla/learner.hpp"

#include <algorithm>
#include <stdexcept>

namespace ranla {

Learner::Learner(const LearnerConfig& cfg, ReplayBuffer* replay, ModelHub* hub)
    : m_cfg(cfg),
      m_replay(replay),
      m_hub(hub),
      m_online(QNetConfig{kStateDim, kNumActions, kNumObjectives, cfg.hidden}),
      m_target(m_online.config()),
      m_opt(m_online.num_params(), cfg.lr) {
  if (replay == nullptr) throw std::invalid_argument("Learner: null replay buffer");
  if (cfg.batch_size < 1) throw std::invalid_argument("Learner: batch_size must be positive");
  if (cfg.num_omega_samples < 0) throw std::invalid_argument("Learner: negative omega sample count");
  Rng init_rng(hash_seed(cfg.seed, static_cast<uint64_t>(stream::kInit)));
  m_online.init_he(init_rng);
  m_target.params() = m_online.params();
}

double Learner::beta() const {
  const double span = m_cfg.beta_end - m_cfg.beta_start;
  const double frac =
      std::min(1.0, static_cast<double>(m_steps) /
                        static_cast<double>(std::max<int64_t>(1, m_cfg.beta_anneal_steps)));
  return m_cfg.beta_start + span * frac;
}

double Learner::step() {
  if (!ready())
    throw std::logic_error("Learner::step: replay below min_fill");

  Rng rng(hash_seed(m_cfg.seed, static_cast<uint64_t>(stream::kLearner),
                    static_cast<uint64_t>(m_steps)));
  ReplayBuffer::Batch batch =
      m_replay->sample(static_cast<size_t>(m_cfg.batch_size), beta(), rng);

  std::vector<PreferenceVector> omega_samples;
  omega_samples.reserve(static_cast<size_t>(m_cfg.num_omega_samples));
  for (int i = 0; i < m_cfg.num_omega_samples; ++i) omega_samples.push_back(sample_preference(rng));

  const bool decayed = m_cfg.lr_decay_step > 0 && m_steps >= m_cfg.lr_decay_step;
  m_opt.set_learning_rate(decayed ? m_cfg.lr * m_cfg.lr_decay_factor : m_cfg.lr);

  TdResult result = td_step(m_online, m_target, m_opt, batch.items, batch.weights, omega_samples,
                            m_cfg.gamma, m_cfg.target_clip);
  m_replay->update_priorities(batch.indices, result.priorities);

  ++m_steps;
  m_loss_trace.push_back(LossPoint{m_steps, result.loss});

  if (m_steps % m_cfg.target_sync_period == 0) m_target.params() = m_online.params();
  if (m_steps % m_cfg.publish_period == 0) publish();
  return result.loss;
}

void Learner::publish() {
  if (m_hub == nullptr) return;
  ModelSnapshot snap;
  snap.arch = m_online.config();
  snap.params = m_online.params();
  snap.rank_control = m_cfg.rank_control;
  snap.learner_steps = m_steps;
  m_hub->publish(std::move(snap));
  ++m_published;
}

}  // namespace ranla
