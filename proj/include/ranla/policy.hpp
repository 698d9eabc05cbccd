#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "ranla/actions.hpp"
#include "ranla/features.hpp"
#include "ranla/olla.hpp"
#include "ranla/preference.hpp"
#include "ranla/qnet.hpp"
#include "ranla/rng.hpp"

namespace ranla {

/**
 * Rank the UE would report for a given post-equalization SINR estimate:
 * the rank r in 1..max_rank that maximizes the spatial-multiplexing sum
 * rate r * log2(1 + linear(per-layer SINR)). Ties break toward the lower
 * rank.
 */
int reported_rank_for_sinr(double sinr_db, int max_rank);

// Same, but starting from a quantized CQI report.
int reported_rank_from_cqi(int cqi, int max_rank);

/**
 * Index of the allowed action maximizing omega . Q(s, a); throws if the
 * mask allows nothing. Scalarization makes this invariant to positive
 * rescaling of omega.
 */
int greedy_action(const Eigen::MatrixXd& q, const PreferenceVector& omega, const ActionMask& mask);

/**
 * Epsilon-greedy over the masked action set: with probability epsilon a
 * uniform draw over allowed actions, otherwise the scalarized greedy
 * choice. Never returns a masked action.
 */
int rl_select(const QNetwork& net, const StateVector& state, const PreferenceVector& omega,
              double epsilon, const ActionMask& mask, Rng& rng);

/** Link adaptation decision source for one UE-TTI grant. */
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action select(const FeatureContext& ctx, const StateVector& state,
                        const ActionMask& mask, int ue_id, int tti) = 0;
};

/**
 * Outer-loop baseline: MCS from the CQI report plus the per-UE OLLA
 * offset, rank pinned to the UE report.
 */
class OllaPolicy : public Policy {
 public:
  Action select(const FeatureContext& ctx, const StateVector& state, const ActionMask& mask,
                int ue_id, int tti) override;
};

/**
 * Greedy/exploratory policy over a Q network at a fixed preference.
 * Exploration draws are keyed by (seed, ue, tti) so paired runs stay
 * reproducible regardless of scheduling order.
 */
class RlPolicy : public Policy {
 public:
  RlPolicy(const QNetwork* net, PreferenceVector omega, double epsilon, uint64_t seed);

  Action select(const FeatureContext& ctx, const StateVector& state, const ActionMask& mask,
                int ue_id, int tti) override;

  const PreferenceVector& omega() const { return m_omega; }
  double epsilon() const { return m_epsilon; }

 private:
  const QNetwork* m_net;
  PreferenceVector m_omega;
  double m_epsilon;
  uint64_t m_seed;
};

}  // namespace ranla
