#include "ranla/policy.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ranla {

int reported_rank_for_sinr(double sinr_db, int max_rank) {
  if (max_rank < 1 || max_rank > kMaxRank)
    throw std::invalid_argument("reported_rank_for_sinr: max_rank out of range");
  int best_rank = 1;
  double best_rate = -1.0;
  for (int r = 1; r <= max_rank; ++r) {
    double layer_snr = std::pow(10.0, per_layer_sinr_db(sinr_db, r) / 10.0);
    double rate = r * std::log2(1.0 + layer_snr);
    if (rate > best_rate) {
      best_rate = rate;
      best_rank = r;
    }
  }
  return best_rank;
}

int reported_rank_from_cqi(int cqi, int max_rank) {
  return reported_rank_for_sinr(cqi_to_sinr_db(cqi), max_rank);
}

int greedy_action(const Eigen::MatrixXd& q, const PreferenceVector& omega, const ActionMask& mask) {
  if (q.rows() != kNumActions || q.cols() != kNumObjectives)
    throw std::invalid_argument("greedy_action: Q matrix shape mismatch");
  int best = -1;
  double best_value = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    if (!mask.allowed(a)) continue;
    double value = omega.dot(q.row(a));
    if (best < 0 || value > best_value) {
      best = a;
      best_value = value;
    }
  }
  if (best < 0) throw std::invalid_argument("greedy_action: mask allows no action");
  return best;
}

int rl_select(const QNetwork& net, const StateVector& state, const PreferenceVector& omega,
              double epsilon, const ActionMask& mask, Rng& rng) {
  if (mask.count_allowed() == 0) throw std::invalid_argument("rl_select: mask allows no action");
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    std::vector<int> allowed;
    allowed.reserve(kNumActions);
    for (int a = 0; a < kNumActions; ++a)
      if (mask.allowed(a)) allowed.push_back(a);
    return rng.pick(allowed);
  }
  return greedy_action(net.q_values(state, omega), omega, mask);
}

Action OllaPolicy::select(const FeatureContext& ctx, const StateVector& state,
                          const ActionMask& mask, int ue_id, int tti) {
  (void)state;
  (void)mask;
  (void)ue_id;
  (void)tti;
  int mcs = olla_select_mcs(ctx.cqi, ctx.olla_offset_db);
  int rank = reported_rank_from_cqi(ctx.cqi, ctx.ue_num_antennas);
  return Action{mcs, rank};
}

RlPolicy::RlPolicy(const QNetwork* net, PreferenceVector omega, double epsilon, uint64_t seed)
    : m_net(net), m_omega(omega), m_epsilon(epsilon), m_seed(seed) {
  if (net == nullptr) throw std::invalid_argument("RlPolicy: null network");
}

Action RlPolicy::select(const FeatureContext& ctx, const StateVector& state,
                        const ActionMask& mask, int ue_id, int tti) {
  (void)ctx;
  Rng rng(hash_seed(m_seed, stream::kPolicy, static_cast<uint64_t>(ue_id),
                    static_cast<uint64_t>(tti)));
  int idx = rl_select(*m_net, state, m_omega, m_epsilon, mask, rng);
  return action_from_index(idx);
}

}  // namespace ranla
