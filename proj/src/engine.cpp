#include "ranla/engine.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <thread>

#include <json.hpp>

#include "ranla/checkpoint.hpp"
#include "ranla/ratelimit.hpp"
#include "ranla/transition.hpp"

namespace ranla {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

RandomizationSpace space_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"bandwidth_mhz", "num_subbands", "dl_tx_power_w", "cell_radius_m",
                       "site_types", "fb_ue_counts", "mbb_ue_counts", "fb_speeds_mps",
                       "mbb_speeds_mps", "indoor_probabilities", "ue_antennas", "receiver_types",
                       "duration_ttis"},
                      "space");
  RandomizationSpace space;
  if (j.contains("bandwidth_mhz")) space.bandwidth_mhz = j.at("bandwidth_mhz").get<std::vector<double>>();
  if (j.contains("num_subbands")) space.num_subbands = j.at("num_subbands").get<std::vector<int>>();
  if (j.contains("dl_tx_power_w")) space.dl_tx_power_w = j.at("dl_tx_power_w").get<std::vector<double>>();
  if (j.contains("cell_radius_m")) space.cell_radius_m = j.at("cell_radius_m").get<std::vector<double>>();
  if (j.contains("site_types")) {
    space.site_types.clear();
    for (const auto& name : j.at("site_types").get<std::vector<std::string>>())
      space.site_types.push_back(site_type_from_string(name));
  }
  if (j.contains("fb_ue_counts")) space.fb_ue_counts = j.at("fb_ue_counts").get<std::vector<int>>();
  if (j.contains("mbb_ue_counts")) space.mbb_ue_counts = j.at("mbb_ue_counts").get<std::vector<int>>();
  if (j.contains("fb_speeds_mps")) space.fb_speeds_mps = j.at("fb_speeds_mps").get<std::vector<double>>();
  if (j.contains("mbb_speeds_mps"))
    space.mbb_speeds_mps = j.at("mbb_speeds_mps").get<std::vector<double>>();
  if (j.contains("indoor_probabilities"))
    space.indoor_probabilities = j.at("indoor_probabilities").get<std::vector<double>>();
  if (j.contains("ue_antennas")) space.ue_antennas = j.at("ue_antennas").get<std::vector<int>>();
  if (j.contains("receiver_types")) space.receiver_types = j.at("receiver_types").get<std::vector<int>>();
  if (j.contains("duration_ttis")) space.duration_ttis = j.at("duration_ttis").get<int>();
  return space;
}

json space_to_json(const RandomizationSpace& s) {
  ordered_json j;
  j["bandwidth_mhz"] = s.bandwidth_mhz;
  j["num_subbands"] = s.num_subbands;
  j["dl_tx_power_w"] = s.dl_tx_power_w;
  j["cell_radius_m"] = s.cell_radius_m;
  std::vector<std::string> site_types;
  for (SiteType t : s.site_types) site_types.push_back(to_string(t));
  j["site_types"] = site_types;
  j["fb_ue_counts"] = s.fb_ue_counts;
  j["mbb_ue_counts"] = s.mbb_ue_counts;
  j["fb_speeds_mps"] = s.fb_speeds_mps;
  j["mbb_speeds_mps"] = s.mbb_speeds_mps;
  j["indoor_probabilities"] = s.indoor_probabilities;
  j["ue_antennas"] = s.ue_antennas;
  j["receiver_types"] = s.receiver_types;
  j["duration_ttis"] = s.duration_ttis;
  return j;
}

LearnerConfig learner_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"batch_size", "gamma", "lr", "hidden", "num_omega_samples", "beta_start",
                       "beta_end", "beta_anneal_steps", "target_sync_period", "publish_period",
                       "min_fill"},
                      "learner");
  LearnerConfig c;
  if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
  if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
  if (j.contains("lr")) c.lr = j.at("lr").get<double>();
  if (j.contains("hidden")) c.hidden = j.at("hidden").get<int>();
  if (j.contains("num_omega_samples")) c.num_omega_samples = j.at("num_omega_samples").get<int>();
  if (j.contains("beta_start")) c.beta_start = j.at("beta_start").get<double>();
  if (j.contains("beta_end")) c.beta_end = j.at("beta_end").get<double>();
  if (j.contains("beta_anneal_steps")) c.beta_anneal_steps = j.at("beta_anneal_steps").get<int64_t>();
  if (j.contains("target_sync_period")) c.target_sync_period = j.at("target_sync_period").get<int>();
  if (j.contains("publish_period")) c.publish_period = j.at("publish_period").get<int>();
  if (j.contains("min_fill")) c.min_fill = j.at("min_fill").get<int64_t>();
  return c;
}

json learner_to_json(const LearnerConfig& c) {
  ordered_json j;
  j["batch_size"] = c.batch_size;
  j["gamma"] = c.gamma;
  j["lr"] = c.lr;
  j["hidden"] = c.hidden;
  j["num_omega_samples"] = c.num_omega_samples;
  j["beta_start"] = c.beta_start;
  j["beta_end"] = c.beta_end;
  j["beta_anneal_steps"] = c.beta_anneal_steps;
  j["target_sync_period"] = c.target_sync_period;
  j["publish_period"] = c.publish_period;
  j["min_fill"] = c.min_fill;
  return j;
}

/** Shared bookkeeping across both training modes. */
struct TrainRun {
  const TrainConfig& cfg;
  ModelHub hub;
  ReplayBuffer replay;
  Learner learner;
  TokenBucket bucket;
  IngestStats ingest;
  std::ofstream stats_out;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  int64_t next_checkpoint_at = 0;
  std::vector<std::string> outputs;

  explicit TrainRun(const TrainConfig& c)
      : cfg(c),
        replay(c.replay_capacity, /*alpha=*/0.6),
        learner(make_learner_config(c), &replay, &hub),
        bucket(c.ingest_rate_per_s, c.ingest_burst > 0
                                        ? c.ingest_burst
                                        : std::max(1.0, 0.05 * c.ingest_rate_per_s)) {
    if (!c.outdir.empty()) {
      stats_out.open(c.outdir + "/stats.jsonl", std::ios::trunc);
      if (!stats_out) throw ConfigError("train: cannot write to outdir " + c.outdir);
      outputs.push_back(c.outdir + "/stats.jsonl");
    }
    if (c.checkpoint_period > 0) next_checkpoint_at = c.checkpoint_period;
  }

  static LearnerConfig make_learner_config(const TrainConfig& c) {
    LearnerConfig lc = c.learner;
    lc.seed = c.seed;
    lc.rank_control = c.rank_control;
    if (lc.beta_anneal_steps <= 1) lc.beta_anneal_steps = std::max<int64_t>(1, c.target_learner_steps());
    // Returns are bounded by max-|reward| / (1 - gamma); a decision costs at
    // most kMaxHarqTx PRB-normalized resource units, so that is the widest
    // reward component. Clamp bootstrapped targets to the feasible box.
    if (lc.target_clip == 0.0 && lc.gamma < 1.0)
      lc.target_clip = static_cast<double>(kMaxHarqTx) / (1.0 - lc.gamma);
    // Drop the learning rate for the tail of the run so the policy settles
    // instead of chasing bootstrap noise.
    if (lc.lr_decay_step == 0)
      lc.lr_decay_step = (c.target_learner_steps() * 3) / 5;
    return lc;
  }

  void ingest_wire_batch(const std::vector<uint8_t>& bytes, double now_s) {
    std::vector<Transition> batch = decode_batch(bytes);
    ingest.offered += static_cast<int64_t>(batch.size());
    int64_t grant = bucket.admit(static_cast<int64_t>(batch.size()), now_s);
    for (int64_t i = 0; i < grant; ++i) replay.push(batch[static_cast<size_t>(i)]);
    ingest.admitted += grant;
    ingest.rejected += static_cast<int64_t>(batch.size()) - grant;
  }

  std::string write_checkpoint(const std::string& name) {
    if (cfg.outdir.empty()) return "";
    Checkpoint ckpt;
    ckpt.arch = learner.online().config();
    ckpt.params = learner.online().params();
    ckpt.adam_m = learner.optimizer().first_moment();
    ckpt.adam_v = learner.optimizer().second_moment();
    ckpt.adam_t = learner.optimizer().steps_taken();
    ckpt.learner_steps = learner.steps();
    ckpt.rank_control = cfg.rank_control;
    std::string path = cfg.outdir + "/" + name;
    save_checkpoint(ckpt, path);
    outputs.push_back(path);
    return path;
  }

  void maybe_periodic_checkpoint() {
    if (cfg.checkpoint_period <= 0 || learner.steps() < next_checkpoint_at) return;
    char name[64];
    std::snprintf(name, sizeof(name), "checkpoint_step_%lld.bin",
                  static_cast<long long>(learner.steps()));
    write_checkpoint(name);
    next_checkpoint_at += cfg.checkpoint_period;
  }

  void emit_stats_line(int64_t env_steps, double loss) {
    if (!stats_out.is_open()) return;
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ordered_json j;
    j["step"] = learner.steps();
    j["loss"] = loss;
    j["beta"] = learner.beta();
    j["replay_size"] = replay.size();
    j["env_steps"] = env_steps;
    j["offered"] = ingest.offered;
    j["admitted"] = ingest.admitted;
    j["rejected"] = ingest.rejected;
    j["queue_drops"] = ingest.queue_drops;
    j["snapshots_published"] = learner.snapshots_published();
    j["elapsed_s"] = elapsed;
    stats_out << j.dump() << "\n";
    stats_out.flush();
  }

  // One paced learner step; returns false once the quota is reached or the
  // replay is not ready yet.
  bool step_if_allowed(int64_t env_steps, int64_t allowed_by_pacing) {
    if (learner.steps() >= std::min(cfg.target_learner_steps(), allowed_by_pacing)) return false;
    if (!learner.ready()) return false;
    double loss = learner.step();
    if (learner.steps() % 1000 == 0) emit_stats_line(env_steps, loss);
    maybe_periodic_checkpoint();
    return true;
  }
};

void write_loss_trace(const std::string& path, const std::vector<LossPoint>& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("train: cannot write " + path);
  out << "step,loss\n";
  char buf[64];
  for (const LossPoint& p : trace) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g\n", static_cast<long long>(p.step), p.loss);
    out << buf;
  }
}

FeatureStats replay_reference_stats(const ReplayBuffer& replay) {
  FeatureStats stats;
  for (size_t i = 0; i < replay.size(); ++i) stats.add(replay.at(i).state);
  return stats;
}

TrainResult finish(TrainRun& run, const TrainConfig& cfg, TrainResult result) {
  result.learner_steps = run.learner.steps();
  result.target_learner_steps = cfg.target_learner_steps();
  result.ingest = run.ingest;
  result.loss_trace = run.learner.loss_trace();
  result.reference = replay_reference_stats(run.replay);
  if (!cfg.outdir.empty()) {
    if (run.learner.steps() > 0 || result.halted_on_error)
      result.final_checkpoint = run.write_checkpoint("checkpoint_final.bin");
    std::string loss_path = cfg.outdir + "/loss_trace.csv";
    write_loss_trace(loss_path, result.loss_trace);
    run.outputs.push_back(loss_path);
    std::string ref_path = cfg.outdir + "/training_reference.json";
    std::ofstream ref(ref_path, std::ios::trunc);
    ref << feature_stats_to_json(result.reference);
    run.outputs.push_back(ref_path);
    std::string cfg_path = cfg.outdir + "/train_config.json";
    std::ofstream cfg_out(cfg_path, std::ios::trunc);
    cfg_out << train_config_to_json(cfg);
    run.outputs.push_back(cfg_path);

    // First scenario draw of actor 0, for provenance and reproducibility
    // spot checks against other runs of the same seed.
    RandomizationSpace space = cfg.space;
    space.duration_ttis = cfg.episode_ttis;
    std::string scen_path = cfg.outdir + "/scenario_sample.json";
    save_scenario(
        sample_scenario(hash_seed(cfg.seed, static_cast<uint64_t>(stream::kScenario),
                                  uint64_t{0}, uint64_t{0}),
                        space),
        scen_path);
    run.outputs.push_back(scen_path);
  }
  run.emit_stats_line(result.env_steps, result.loss_trace.empty() ? 0.0 : result.loss_trace.back().loss);
  result.outputs = run.outputs;
  return result;
}

TrainResult train_deterministic(const TrainConfig& cfg) {
  TrainRun run(cfg);
  TrainResult result;

  std::vector<Transition> buffer;
  buffer.reserve(static_cast<size_t>(cfg.wire_batch));
  int64_t env_steps = 0;

  // The limiter clock ticks in simulated time: one second per thousand
  // environment steps.
  auto sim_now = [&]() { return static_cast<double>(env_steps) / 1000.0; };
  auto ship = [&]() {
    if (buffer.empty()) return;
    run.ingest_wire_batch(encode_batch(buffer), sim_now());
    buffer.clear();
  };

  RandomizationSpace space = cfg.space;
  space.duration_ttis = cfg.episode_ttis;

  try {
    for (int64_t global_ep = 0; env_steps < cfg.env_step_budget; ++global_ep) {
      const uint64_t a = static_cast<uint64_t>(global_ep % cfg.actors);
      const uint64_t e = static_cast<uint64_t>(global_ep / cfg.actors);
      ScenarioConfig scenario = sample_scenario(
          hash_seed(cfg.seed, static_cast<uint64_t>(stream::kScenario), a, e), space);
      Rng pref_rng(hash_seed(cfg.seed, static_cast<uint64_t>(stream::kPreference), a, e));
      PreferenceVector omega = sample_preference(pref_rng);

      ActorPolicy policy(&run.hub, omega, ladder_epsilon(static_cast<int>(a), cfg.actors),
                         hash_seed(cfg.seed, a, e), cfg.rank_control, cfg.snapshot_pull_period,
                         cfg.safe_mode);

      EpisodeOptions opts;
      opts.rank_control = cfg.rank_control;
      opts.decimation_k = cfg.decimation_k;
      opts.actor_id = static_cast<int>(a);
      opts.omega = omega;

      EpisodeHooks hooks;
      hooks.emit = [&](Transition&& t) {
        buffer.push_back(std::move(t));
        if (static_cast<int>(buffer.size()) >= cfg.wire_batch) ship();
      };
      hooks.on_env_step = [&]() {
        ++env_steps;
        ship();  // keep ingestion ahead of the pacing check
        while (run.step_if_allowed(env_steps, static_cast<int64_t>(static_cast<double>(env_steps) /
                                                                   cfg.replay_ratio))) {
        }
      };
      hooks.should_stop = [&]() { return env_steps >= cfg.env_step_budget; };

      EpisodeOutcome out = run_episode(scenario, policy, opts, hooks);
      ship();
      ++result.episodes;
      result.env_steps = env_steps;
      (void)out;
    }
    // Actors are done; the learner finishes its quota offline.
    while (run.step_if_allowed(env_steps, cfg.target_learner_steps())) {
    }
  } catch (const TrainingError& e) {
    result.halted_on_error = true;
    result.halt_reason = e.what();
  }
  result.env_steps = env_steps;
  return finish(run, cfg, std::move(result));
}

TrainResult train_threaded(const TrainConfig& cfg) {
  TrainRun run(cfg);
  TrainResult result;

  BoundedQueue<std::vector<uint8_t>> queue(cfg.queue_capacity);
  std::atomic<int64_t> env_steps{0};
  std::atomic<bool> stop{false};
  std::atomic<int> actors_running{cfg.actors};

  RandomizationSpace space = cfg.space;
  space.duration_ttis = cfg.episode_ttis;

  std::vector<ActorReport> reports(static_cast<size_t>(cfg.actors));
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(cfg.actors));
  for (int i = 0; i < cfg.actors; ++i) {
    threads.emplace_back([&, i]() {
      ActorConfig ac;
      ac.actor_index = i;
      ac.num_actors = cfg.actors;
      ac.seed = cfg.seed;
      ac.space = space;
      ac.rank_control = cfg.rank_control;
      ac.decimation_k = cfg.decimation_k;
      ac.snapshot_pull_period = cfg.snapshot_pull_period;
      ac.safe_mode = cfg.safe_mode;
      ac.wire_batch = cfg.wire_batch;
      ActorSharedState shared{&run.hub, &queue, &env_steps, cfg.env_step_budget, &stop};
      reports[static_cast<size_t>(i)] = run_actor(ac, shared);
      actors_running.fetch_sub(1);
    });
  }

  auto wall_now = [&]() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - run.t0).count();
  };

  try {
    while (true) {
      if (auto bytes = queue.pop_wait(std::chrono::milliseconds(5))) {
        try {
          run.ingest_wire_batch(*bytes, wall_now());
        } catch (const WireError&) {
          // A malformed batch is shed, never fatal to the learner.
        }
      }
      int64_t pacing = static_cast<int64_t>(static_cast<double>(env_steps.load()) / cfg.replay_ratio);
      if (actors_running.load() == 0 && queue.size() == 0) pacing = cfg.target_learner_steps();
      if (!run.step_if_allowed(env_steps.load(), pacing)) {
        bool done = actors_running.load() == 0 && queue.size() == 0 &&
                    (run.learner.steps() >= cfg.target_learner_steps() || !run.learner.ready());
        if (done) break;
      }
    }
  } catch (const TrainingError& e) {
    result.halted_on_error = true;
    result.halt_reason = e.what();
    stop.store(true);
  }

  stop.store(true);
  queue.close();
  for (std::thread& t : threads) t.join();
  for (ActorReport& r : reports) {
    run.ingest.queue_drops += r.queue_drops;
    if (!r.halt_reason.empty() && result.halt_reason.empty()) {
      result.halted_on_error = true;
      result.halt_reason = r.halt_reason;
    }
  }
  result.actor_reports = std::move(reports);
  result.env_steps = env_steps.load();
  for (auto& r : result.actor_reports) result.episodes += r.episodes;
  return finish(run, cfg, std::move(result));
}

}  // namespace

TrainConfig train_config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: invalid JSON: ") + e.what());
  }
  try {
    reject_unknown_keys(
        j, {"seed", "actors", "env_step_budget", "replay_ratio", "deterministic", "rank_control",
            "episode_ttis", "space", "learner", "replay_capacity", "ingest_rate_per_s",
            "ingest_burst", "decimation_k", "safe_mode", "queue_capacity", "snapshot_pull_period",
            "wire_batch", "checkpoint_period"},
        "train config");
    TrainConfig cfg;
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
    if (j.contains("actors")) cfg.actors = j.at("actors").get<int>();
    if (j.contains("env_step_budget")) cfg.env_step_budget = j.at("env_step_budget").get<int64_t>();
    if (j.contains("replay_ratio")) cfg.replay_ratio = j.at("replay_ratio").get<double>();
    if (j.contains("deterministic")) cfg.deterministic = j.at("deterministic").get<bool>();
    if (j.contains("rank_control")) cfg.rank_control = j.at("rank_control").get<bool>();
    if (j.contains("episode_ttis")) cfg.episode_ttis = j.at("episode_ttis").get<int>();
    if (j.contains("space")) cfg.space = space_from_json(j.at("space"));
    if (j.contains("learner")) cfg.learner = learner_from_json(j.at("learner"));
    if (j.contains("replay_capacity")) cfg.replay_capacity = j.at("replay_capacity").get<size_t>();
    if (j.contains("ingest_rate_per_s")) cfg.ingest_rate_per_s = j.at("ingest_rate_per_s").get<double>();
    if (j.contains("ingest_burst")) cfg.ingest_burst = j.at("ingest_burst").get<double>();
    if (j.contains("decimation_k")) cfg.decimation_k = j.at("decimation_k").get<int>();
    if (j.contains("safe_mode")) cfg.safe_mode = j.at("safe_mode").get<bool>();
    if (j.contains("queue_capacity")) cfg.queue_capacity = j.at("queue_capacity").get<size_t>();
    if (j.contains("snapshot_pull_period"))
      cfg.snapshot_pull_period = j.at("snapshot_pull_period").get<int>();
    if (j.contains("wire_batch")) cfg.wire_batch = j.at("wire_batch").get<int>();
    if (j.contains("checkpoint_period")) cfg.checkpoint_period = j.at("checkpoint_period").get<int>();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
}

std::string train_config_to_json(const TrainConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["actors"] = cfg.actors;
  j["env_step_budget"] = cfg.env_step_budget;
  j["replay_ratio"] = cfg.replay_ratio;
  j["deterministic"] = cfg.deterministic;
  j["rank_control"] = cfg.rank_control;
  j["episode_ttis"] = cfg.episode_ttis;
  j["space"] = space_to_json(cfg.space);
  j["learner"] = learner_to_json(cfg.learner);
  j["replay_capacity"] = cfg.replay_capacity;
  j["ingest_rate_per_s"] = cfg.ingest_rate_per_s;
  j["ingest_burst"] = cfg.ingest_burst;
  j["decimation_k"] = cfg.decimation_k;
  j["safe_mode"] = cfg.safe_mode;
  j["queue_capacity"] = cfg.queue_capacity;
  j["snapshot_pull_period"] = cfg.snapshot_pull_period;
  j["wire_batch"] = cfg.wire_batch;
  j["checkpoint_period"] = cfg.checkpoint_period;
  return j.dump(2) + "\n";
}

TrainResult train(const TrainConfig& cfg) {
  if (cfg.actors < 1) throw ConfigError("train: actors must be >= 1");
  if (cfg.env_step_budget < 0) throw ConfigError("train: negative env_step_budget");
  if (!(cfg.replay_ratio > 0)) throw ConfigError("train: replay_ratio must be positive");
  if (cfg.episode_ttis < 1) throw ConfigError("train: episode_ttis must be >= 1");
  if (cfg.deterministic) return train_deterministic(cfg);
  return train_threaded(cfg);
}

}  // namespace ranla
