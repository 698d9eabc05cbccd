#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ranla/actor.hpp"
#include "ranla/drift.hpp"
#include "ranla/learner.hpp"
#include "ranla/scenario.hpp"

namespace ranla {

/**
 * Full training pipeline configuration. The environment step budget
 * counts link adaptation decisions across all actors; the learner runs
 * one TD step per replay_ratio environment steps and finishes its quota
 * offline once the actors stop.
 */
struct TrainConfig {
  uint64_t seed = 0;
  int actors = 1;
  int64_t env_step_budget = 200000;
  double replay_ratio = 12.0;
  bool deterministic = false;
  bool rank_control = true;
  int episode_ttis = 600;
  RandomizationSpace space;
  LearnerConfig learner;

  size_t replay_capacity = 300000;
  double ingest_rate_per_s = 1e6;
  double ingest_burst = 0;  // 0 -> 5% of one second's tokens
  int decimation_k = 1;
  bool safe_mode = false;
  size_t queue_capacity = 256;
  int snapshot_pull_period = 200;
  int wire_batch = 64;
  int checkpoint_period = 0;  // learner steps between periodic checkpoints; 0 = final only
  std::string outdir;         // empty = keep everything in memory

  int64_t target_learner_steps() const {
    return static_cast<int64_t>(static_cast<double>(env_step_budget) / replay_ratio);
  }
};

TrainConfig train_config_from_json(const std::string& text);
std::string train_config_to_json(const TrainConfig& cfg);

struct IngestStats {
  int64_t offered = 0;    // transitions decoded from actor batches
  int64_t admitted = 0;   // passed the rate limiter into replay
  int64_t rejected = 0;   // shed by the rate limiter
  int64_t queue_drops = 0;
};

struct TrainResult {
  int64_t env_steps = 0;
  int64_t learner_steps = 0;
  int64_t target_learner_steps = 0;
  int64_t episodes = 0;
  IngestStats ingest;
  std::vector<LossPoint> loss_trace;
  FeatureStats reference;  // feature statistics of the final replay contents
  std::string final_checkpoint;
  std::vector<std::string> outputs;  // files written under outdir
  std::vector<ActorReport> actor_reports;
  bool halted_on_error = false;
  std::string halt_reason;
};

/**
 * Runs actors and learner to completion. Deterministic mode interleaves
 * episode generation and TD steps on one thread with all randomness keyed
 * to the seed; threaded mode runs one thread per actor against the
 * drop-oldest queue while the learner ingests and trains. A non-finite
 * loss checkpoints the current parameters and halts with the error
 * recorded instead of continuing to train on garbage.
 */
TrainResult train(const TrainConfig& cfg);

}  // namespace ranla
