#include "ranla/actor.hpp"

#include <cmath>
#include <deque>
#include <map>

#include "ranla/features.hpp"

namespace ranla {

double ladder_epsilon(int actor_index, int num_actors) {
  if (num_actors < 1) throw std::invalid_argument("ladder_epsilon: num_actors must be positive");
  if (actor_index < 0 || actor_index >= num_actors)
    throw std::invalid_argument("ladder_epsilon: actor_index out of range");
  if (num_actors == 1) return 0.4;
  double exponent = 1.0 + 7.0 * static_cast<double>(actor_index) / (num_actors - 1);
  return std::pow(0.4, exponent);
}

Decimator::Decimator(int k) : m_k(k) {
  if (k < 1) throw std::invalid_argument("Decimator: k must be >= 1");
}

bool Decimator::accept(int ue_id) {
  int64_t n = ++m_counts[ue_id];
  return n % m_k == 0;
}

namespace {

struct PendingDecision {
  int decision_tti = 0;
  int cell_id = 0;
  StateVector state{};
  ActionMask mask{};
  int action = 0;
  bool has_next = false;
  StateVector next_state{};
  ActionMask next_mask{};
  bool resolved = false;
  Eigen::Vector2d reward{0.0, 0.0};
};

}  // namespace

EpisodeOutcome run_episode(const ScenarioConfig& scenario, Policy& policy,
                           const EpisodeOptions& opts, const EpisodeHooks& hooks) {
  Simulator sim(scenario, opts.trace);
  Decimator decimator(opts.decimation_k);
  EpisodeOutcome outcome;

  std::unordered_map<int, std::deque<PendingDecision>> pending;

  auto emit_one = [&](PendingDecision& d, int ue_id, bool done) {
    if (!hooks.emit) return;
    if (!decimator.accept(ue_id)) return;
    Transition t;
    t.state = d.state;
    t.action = d.action;
    t.reward = d.reward;
    t.next_state = done ? d.state : d.next_state;
    t.next_mask = done ? d.mask : d.next_mask;
    t.done = done;
    t.omega_behavior = opts.omega;
    t.meta.scenario_seed = scenario.seed;
    t.meta.actor_id = opts.actor_id;
    t.meta.cell_id = d.cell_id;
    t.meta.ue_id = ue_id;
    t.meta.tti = d.decision_tti;
    hooks.emit(std::move(t));
    ++outcome.emitted;
  };

  auto flush_ready = [&](int ue_id) {
    auto& q = pending[ue_id];
    while (!q.empty() && q.front().resolved && q.front().has_next) {
      emit_one(q.front(), ue_id, /*done=*/false);
      q.pop_front();
    }
  };

  for (int tti = 0; tti < scenario.duration_ttis; ++tti) {
    if (hooks.should_stop && hooks.should_stop()) break;

    std::vector<Grant> grants = sim.prepare_tti(tti);
    std::map<int, Action> actions;
    for (const Grant& g : grants) {
      if (!g.needs_action) continue;
      FeatureContext ctx = make_feature_context(sim, g.ue_id, tti);
      int max_rank = ctx.ue_num_antennas;
      int reported = reported_rank_from_cqi(ctx.cqi, max_rank);
      ActionMask mask = make_action_mask(opts.rank_control, max_rank, reported);
      StateVector state = build_state(ctx);

      Action a = policy.select(ctx, state, mask, g.ue_id, tti);
      actions[g.ue_id] = a;

      auto& q = pending[g.ue_id];
      if (!q.empty() && !q.back().has_next) {
        q.back().next_state = state;
        q.back().next_mask = mask;
        q.back().has_next = true;
      }
      PendingDecision d;
      d.decision_tti = tti;
      d.cell_id = g.cell_id;
      d.state = state;
      d.mask = mask;
      d.action = action_index(a);
      q.push_back(std::move(d));

      ++outcome.decisions;
      if (hooks.on_env_step) hooks.on_env_step();
      flush_ready(g.ue_id);
    }

    TtiResult result = sim.step(tti, actions);
    outcome.ttis_run = tti + 1;
    for (const TbResolution& res : result.resolutions) {
      auto it = pending.find(res.ue_id);
      if (it == pending.end()) continue;
      for (PendingDecision& d : it->second) {
        if (d.decision_tti == res.first_tx_tti && !d.resolved) {
          d.resolved = true;
          Reward r = make_reward(res.delivered, res.tb_bits, res.prbs_per_tx, res.tx_count,
                                 sim.cell(res.cell_id).cfg.num_subbands);
          d.reward = Eigen::Vector2d(r.bits, r.resource);
          break;
        }
      }
      flush_ready(res.ue_id);
    }
  }

  // Episode boundary: resolved tail decisions become terminal transitions;
  // decisions whose HARQ outcome never arrived are dropped.
  for (auto& [ue_id, q] : pending) {
    for (PendingDecision& d : q) {
      if (d.resolved && !d.has_next) {
        emit_one(d, ue_id, /*done=*/true);
      } else if (!d.resolved) {
        ++outcome.dropped_unresolved;
      } else {
        emit_one(d, ue_id, /*done=*/false);
      }
    }
  }

  if (outcome.ttis_run > 0) outcome.kpis = sim.kpi_report();
  return outcome;
}

ActorPolicy::ActorPolicy(ModelHub* hub, PreferenceVector omega, double epsilon,
                         uint64_t policy_seed, bool rank_control, int pull_period, bool safe_mode)
    : m_hub(hub),
      m_omega(omega),
      m_epsilon(epsilon),
      m_policy_seed(policy_seed),
      m_rank_control(rank_control),
      m_pull_period(pull_period),
      m_safe_mode(safe_mode) {
  if (hub == nullptr) throw std::invalid_argument("ActorPolicy: null hub");
  if (pull_period < 1) throw std::invalid_argument("ActorPolicy: pull_period must be >= 1");
}

void ActorPolicy::pull() {
  std::shared_ptr<const ModelSnapshot> snap = m_hub->pull();
  if (!snap || snap->version == m_version) return;
  if (snap->state_schema_version != kStateSchemaVersion)
    throw VersionError("actor: snapshot state schema " +
                       std::to_string(snap->state_schema_version) + " does not match runtime schema " +
                       std::to_string(kStateSchemaVersion));
  if (snap->rank_control != m_rank_control)
    throw VersionError("actor: snapshot mask regime does not match actor configuration");
  if (!m_net || !(m_net->config() == snap->arch)) {
    m_net = std::make_unique<QNetwork>(snap->arch);
    m_rl = std::make_unique<RlPolicy>(m_net.get(), m_omega, m_epsilon, m_policy_seed);
  }
  m_net->params() = snap->params;
  m_version = snap->version;
}

Action ActorPolicy::select(const FeatureContext& ctx, const StateVector& state,
                           const ActionMask& mask, int ue_id, int tti) {
  if (m_decisions_since_pull < 0 || ++m_decisions_since_pull >= m_pull_period) {
    pull();
    m_decisions_since_pull = 0;
  }
  if (!m_safe_mode && m_rl) {
    ++m_learned_decisions;
    return m_rl->select(ctx, state, mask, ue_id, tti);
  }
  ++m_fallback_decisions;
  return m_olla.select(ctx, state, mask, ue_id, tti);
}

ActorReport run_actor(const ActorConfig& cfg, const ActorSharedState& shared) {
  ActorReport report;
  if (shared.hub == nullptr || shared.queue == nullptr || shared.env_steps == nullptr ||
      shared.stop == nullptr)
    throw std::invalid_argument("run_actor: incomplete shared state");

  const double epsilon = ladder_epsilon(cfg.actor_index, cfg.num_actors);
  std::vector<Transition> buffer;
  buffer.reserve(static_cast<size_t>(cfg.wire_batch));

  auto ship = [&]() {
    if (buffer.empty()) return;
    report.queue_drops +=
        static_cast<int64_t>(shared.queue->push_drop_oldest(encode_batch(buffer)));
    ++report.batches;
    buffer.clear();
  };

  try {
    for (int64_t episode = 0;; ++episode) {
      if (shared.stop->load() || shared.env_steps->load() >= shared.env_step_budget) break;

      const uint64_t a = static_cast<uint64_t>(cfg.actor_index);
      const uint64_t e = static_cast<uint64_t>(episode);
      ScenarioConfig scenario = sample_scenario(
          hash_seed(cfg.seed, static_cast<uint64_t>(stream::kScenario), a, e), cfg.space);
      Rng pref_rng(hash_seed(cfg.seed, static_cast<uint64_t>(stream::kPreference), a, e));
      PreferenceVector omega = sample_preference(pref_rng);

      ActorPolicy policy(shared.hub, omega, epsilon, hash_seed(cfg.seed, a, e), cfg.rank_control,
                         cfg.snapshot_pull_period, cfg.safe_mode);

      EpisodeOptions opts;
      opts.rank_control = cfg.rank_control;
      opts.decimation_k = cfg.decimation_k;
      opts.actor_id = cfg.actor_index;
      opts.omega = omega;

      EpisodeHooks hooks;
      hooks.emit = [&](Transition&& t) {
        buffer.push_back(std::move(t));
        if (static_cast<int>(buffer.size()) >= cfg.wire_batch) ship();
      };
      hooks.on_env_step = [&]() { shared.env_steps->fetch_add(1); };
      hooks.should_stop = [&]() {
        return shared.stop->load() || shared.env_steps->load() >= shared.env_step_budget;
      };

      EpisodeOutcome out = run_episode(scenario, policy, opts, hooks);
      ++report.episodes;
      report.decisions += out.decisions;
      report.emitted += out.emitted;
      ship();
    }
  } catch (const VersionError& e) {
    report.halt_reason = e.what();
    ship();
  }
  return report;
}

}  // namespace ranla
