#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ranla/policy.hpp"
#include "ranla/queues.hpp"
#include "ranla/simcore.hpp"
#include "ranla/snapshot.hpp"
#include "ranla/transition.hpp"

namespace ranla {

struct VersionError : std::runtime_error {
  explicit VersionError(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Exploration rate for actor i of W: eps_i = 0.4^(1 + 7*i/(W-1)), i.e. a
 * geometric ladder from 0.4 down to 0.4^8. A single actor explores at 0.4.
 */
double ladder_epsilon(int actor_index, int num_actors);

/** Deterministic per-UE 1-in-k thinning of emitted transitions. */
class Decimator {
 public:
  explicit Decimator(int k);
  bool accept(int ue_id);
  int k() const { return m_k; }

 private:
  int m_k;
  std::unordered_map<int, int64_t> m_counts;
};

/** Callbacks threaded through an episode; all optional. */
struct EpisodeHooks {
  std::function<void(Transition&&)> emit;  // resolved experience, per-UE FIFO order
  std::function<void()> on_env_step;       // after every link adaptation decision
  std::function<bool()> should_stop;       // polled each TTI; true ends the episode early
};

struct EpisodeOptions {
  bool rank_control = true;
  int decimation_k = 1;
  int actor_id = 0;
  PreferenceVector omega{0.5, 0.5};  // behavior preference tagged on transitions
  std::ostream* trace = nullptr;
};

struct EpisodeOutcome {
  KpiReport kpis;
  int ttis_run = 0;
  int64_t decisions = 0;
  int64_t emitted = 0;
  int64_t dropped_unresolved = 0;
};

/**
 * Runs one scenario episode under the given policy.
 *
 * Every new-transport-block grant is one environment step: the runner
 * builds the state and feasibility mask, asks the policy for an action,
 * and remembers the decision. A decision's transition is emitted once its
 * HARQ outcome is known and the UE's next decision has provided the
 * successor state; emission preserves per-UE decision order. Decisions
 * still unresolved at episode end are dropped, except resolved tail
 * decisions, which are emitted as terminal.
 */
EpisodeOutcome run_episode(const ScenarioConfig& scenario, Policy& policy,
                           const EpisodeOptions& opts, const EpisodeHooks& hooks = {});

/**
 * Policy wrapper giving an actor its learner-coupled behavior: it serves
 * OLLA decisions until a model snapshot exists, then greedy/exploratory
 * decisions from the latest snapshot, re-pulling every pull_period
 * decisions. A snapshot whose state schema or mask regime does not match
 * raises VersionError (the actor halts rather than feed the network
 * misaligned inputs). In safe mode the learned policy is never used.
 */
class ActorPolicy : public Policy {
 public:
  ActorPolicy(ModelHub* hub, PreferenceVector omega, double epsilon, uint64_t policy_seed,
              bool rank_control, int pull_period, bool safe_mode);

  Action select(const FeatureContext& ctx, const StateVector& state, const ActionMask& mask,
                int ue_id, int tti) override;

  uint64_t model_version() const { return m_version; }
  int64_t fallback_decisions() const { return m_fallback_decisions; }
  int64_t learned_decisions() const { return m_learned_decisions; }

 private:
  void pull();

  ModelHub* m_hub;
  PreferenceVector m_omega;
  double m_epsilon;
  uint64_t m_policy_seed;
  bool m_rank_control;
  int m_pull_period;
  bool m_safe_mode;

  OllaPolicy m_olla;
  std::unique_ptr<QNetwork> m_net;
  std::unique_ptr<RlPolicy> m_rl;
  uint64_t m_version = 0;
  int64_t m_decisions_since_pull = -1;  // forces a pull on the first decision
  int64_t m_fallback_decisions = 0;
  int64_t m_learned_decisions = 0;
};

struct ActorConfig {
  int actor_index = 0;
  int num_actors = 1;
  uint64_t seed = 0;
  RandomizationSpace space;
  bool rank_control = true;
  int decimation_k = 1;
  int snapshot_pull_period = 200;
  bool safe_mode = false;
  int wire_batch = 64;  // transitions per encoded queue entry
};

/** Shared endpoints between the actor threads and the learner. */
struct ActorSharedState {
  ModelHub* hub = nullptr;
  BoundedQueue<std::vector<uint8_t>>* queue = nullptr;
  std::atomic<int64_t>* env_steps = nullptr;  // global decision counter
  int64_t env_step_budget = 0;
  std::atomic<bool>* stop = nullptr;
};

struct ActorReport {
  int64_t episodes = 0;
  int64_t decisions = 0;
  int64_t emitted = 0;
  int64_t batches = 0;
  int64_t queue_drops = 0;
  std::string halt_reason;  // empty = stopped at budget / external stop
};

/**
 * Actor main loop: sample a scenario, draw an episode preference, run the
 * episode at this actor's ladder epsilon, serialize emitted transitions
 * into wire batches, and repeat until the shared decision budget is spent.
 * Producers never block on the queue (drop-oldest), so a slow learner
 * cannot stall experience generation.
 */
ActorReport run_actor(const ActorConfig& cfg, const ActorSharedState& shared);

}  // namespace ranla
