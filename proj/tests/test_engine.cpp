#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ranla/checkpoint.hpp"
#include "ranla/engine.hpp"
#include "ranla/evalrun.hpp"
#include "ranla/manifest.hpp"

using namespace ranla;
namespace fs = std::filesystem;

namespace {

// Narrow randomization space + short episodes so a full training run
// finishes in seconds while still exercising every pipeline stage.
TrainConfig tiny_train_config(uint64_t seed) {
  TrainConfig cfg;
  cfg.seed = seed;
  cfg.actors = 1;
  cfg.env_step_budget = 3000;
  cfg.replay_ratio = 12.0;
  cfg.deterministic = true;
  cfg.episode_ttis = 150;
  cfg.space.bandwidth_mhz = {20};
  cfg.space.num_subbands = {20};
  cfg.space.dl_tx_power_w = {20};
  cfg.space.cell_radius_m = {300};
  cfg.space.site_types = {SiteType::kMimo};
  cfg.space.fb_ue_counts = {2};
  cfg.space.mbb_ue_counts = {0};
  cfg.space.fb_speeds_mps = {10};
  cfg.space.mbb_speeds_mps = {1.5};
  cfg.space.indoor_probabilities = {0.2};
  cfg.space.ue_antennas = {4};
  cfg.space.receiver_types = {0};
  cfg.learner.batch_size = 32;
  cfg.learner.hidden = 16;
  cfg.learner.num_omega_samples = 2;
  cfg.learner.min_fill = 500;
  cfg.learner.target_sync_period = 50;
  cfg.learner.publish_period = 50;
  cfg.learner.beta_anneal_steps = 200;
  cfg.learner.lr = 1e-3;
  cfg.learner.seed = seed;
  return cfg;
}

std::string fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("ranla_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir.string();
}

bool lists(const std::vector<std::string>& haystack, const std::string& suffix) {
  for (const auto& p : haystack) {
    if (p.size() >= suffix.size() && p.compare(p.size() - suffix.size(), suffix.size(), suffix) == 0)
      return true;
  }
  return false;
}

QNetwork random_net(int hidden, uint64_t seed) {
  QNetConfig qc;
  qc.hidden = hidden;
  QNetwork net(qc);
  Rng rng(seed);
  net.init_he(rng);
  return net;
}

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("deterministic training reproduces bit-identical traces") {
  const TrainConfig cfg = tiny_train_config(11);
  const TrainResult a = train(cfg);
  const TrainResult b = train(cfg);

  CHECK_FALSE(a.halted_on_error);
  CHECK(a.env_steps >= cfg.env_step_budget);
  CHECK(a.learner_steps == a.target_learner_steps);
  CHECK(a.episodes > 1);

  CHECK(a.env_steps == b.env_steps);
  CHECK(a.episodes == b.episodes);
  CHECK(a.learner_steps == b.learner_steps);
  CHECK(a.ingest.offered == b.ingest.offered);
  CHECK(a.ingest.admitted == b.ingest.admitted);
  REQUIRE(a.loss_trace.size() == b.loss_trace.size());
  for (size_t i = 0; i < a.loss_trace.size(); ++i) {
    CHECK(a.loss_trace[i].step == b.loss_trace[i].step);
    CHECK(a.loss_trace[i].loss == b.loss_trace[i].loss);  // exact, not approximate
  }
  CHECK(a.reference.count == b.reference.count);
  for (int f = 0; f < kStateDim; ++f) {
    CHECK(a.reference.mean[static_cast<std::size_t>(f)] ==
          b.reference.mean[static_cast<std::size_t>(f)]);
  }
}

TEST_CASE("a zero environment budget trains nothing") {
  TrainConfig cfg = tiny_train_config(12);
  cfg.env_step_budget = 0;
  const TrainResult r = train(cfg);
  CHECK(r.env_steps == 0);
  CHECK(r.episodes == 0);
  CHECK(r.learner_steps == 0);
  CHECK(r.target_learner_steps == 0);
  CHECK(r.loss_trace.empty());
  CHECK(r.ingest.offered == 0);
  CHECK(r.final_checkpoint.empty());
}

TEST_CASE("sustained ingestion is admitted in full when capacity allows") {
  const TrainConfig cfg = tiny_train_config(13);
  const TrainResult r = train(cfg);
  CHECK(r.ingest.offered > cfg.learner.min_fill);
  CHECK(r.ingest.admitted == r.ingest.offered);
  CHECK(r.ingest.rejected == 0);
  CHECK(r.ingest.queue_drops == 0);
  // Replay never evicted, so the reference stats cover every admission.
  CHECK(r.reference.count == r.ingest.admitted);
}

TEST_CASE("training writes its full artifact set under outdir") {
  const std::string outdir = fresh_dir("train_artifacts");
  TrainConfig cfg = tiny_train_config(14);
  cfg.outdir = outdir;
  cfg.checkpoint_period = 100;
  const TrainResult r = train(cfg);

  for (const char* suffix :
       {"/stats.jsonl", "/loss_trace.csv", "/training_reference.json", "/train_config.json",
        "/scenario_sample.json", "/checkpoint_final.bin", "/checkpoint_step_100.bin",
        "/checkpoint_step_200.bin"}) {
    CHECK(lists(r.outputs, suffix));
    CHECK(fs::exists(outdir + suffix));
  }
  CHECK(r.final_checkpoint == outdir + "/checkpoint_final.bin");

  // The final checkpoint restores the trained network.
  const Checkpoint ckpt = load_checkpoint(r.final_checkpoint);
  CHECK(ckpt.arch.hidden == cfg.learner.hidden);
  CHECK(ckpt.learner_steps == r.learner_steps);
  CHECK(ckpt.rank_control == cfg.rank_control);
  CHECK(ckpt.state_schema_version == kStateSchemaVersion);
  const QNetwork net = network_from_checkpoint(ckpt);
  CHECK(net.num_params() == ckpt.params.size());
  const Eigen::MatrixXd q = net.q_values(StateVector{}, PreferenceVector(0.5, 0.5));
  CHECK(q.allFinite());

  // Companion files parse back with the library's own readers.
  std::ifstream cfg_in(outdir + "/train_config.json");
  std::stringstream cfg_text;
  cfg_text << cfg_in.rdbuf();
  const TrainConfig round = train_config_from_json(cfg_text.str());
  CHECK(round.seed == cfg.seed);
  CHECK(round.env_step_budget == cfg.env_step_budget);
  CHECK(round.learner.hidden == cfg.learner.hidden);

  std::ifstream ref_in(outdir + "/training_reference.json");
  std::stringstream ref_text;
  ref_text << ref_in.rdbuf();
  CHECK(feature_stats_from_json(ref_text.str()).count == r.reference.count);

  std::ifstream scen_in(outdir + "/scenario_sample.json");
  std::stringstream scen_text;
  scen_text << scen_in.rdbuf();
  const ScenarioConfig scen = scenario_from_json(scen_text.str());
  CHECK(scen.duration_ttis == cfg.episode_ttis);
  fs::remove_all(outdir);
}

TEST_CASE("checkpoints round trip exactly and reject corruption") {
  QNetConfig qc;
  qc.hidden = 8;
  Checkpoint ckpt;
  ckpt.arch = qc;
  Rng rng(21);
  QNetwork net(qc);
  net.init_he(rng);
  ckpt.params = net.params();
  ckpt.adam_m = Eigen::VectorXd::Random(net.num_params());
  ckpt.adam_v = Eigen::VectorXd::Random(net.num_params()).cwiseAbs();
  ckpt.adam_t = 7;
  ckpt.learner_steps = 123;
  ckpt.rank_control = false;

  const std::string dir = fresh_dir("ckpt");
  const std::string path = dir + "/model.bin";
  save_checkpoint(ckpt, path);

  const Checkpoint back = load_checkpoint(path);
  CHECK(back.arch == ckpt.arch);
  CHECK((back.params - ckpt.params).norm() == 0.0);
  CHECK((back.adam_m - ckpt.adam_m).norm() == 0.0);
  CHECK((back.adam_v - ckpt.adam_v).norm() == 0.0);
  CHECK(back.adam_t == 7);
  CHECK(back.learner_steps == 123);
  CHECK(back.rank_control == false);
  CHECK(back.state_schema_version == kStateSchemaVersion);

  SUBCASE("corrupt magic") {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(0);
    f.put('\x00');
    f.close();
    CHECK_THROWS_AS((void)load_checkpoint(path), CheckpointError);
  }
  SUBCASE("truncated file") {
    fs::resize_file(path, 10);
    CHECK_THROWS_AS((void)load_checkpoint(path), CheckpointError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS((void)load_checkpoint(dir + "/nope.bin"), CheckpointError);
  }
  SUBCASE("schema mismatch refuses to build a network") {
    Checkpoint wrong = ckpt;
    wrong.state_schema_version = kStateSchemaVersion + 1;
    CHECK_THROWS_AS((void)network_from_checkpoint(wrong), CheckpointError);
  }
  SUBCASE("parameter size mismatch refuses to build a network") {
    Checkpoint wrong = ckpt;
    wrong.params = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS((void)network_from_checkpoint(wrong), CheckpointError);
  }
  fs::remove_all(dir);
}

TEST_CASE("the baseline evaluated against itself shows exactly zero deltas") {
  EvalConfig cfg;
  cfg.benchmark = BenchmarkId::kMimoFb;
  cfg.num_seeds = 3;
  const EvalResult r = run_eval(nullptr, cfg);

  CHECK(r.rows.size() == 3 * 6);  // seeds x UEs on this benchmark
  for (const EvalRow& row : r.rows) {
    CHECK(row.agent.throughput_bps == row.olla.throughput_bps);
    CHECK(row.agent.spectral_efficiency_bps_hz == row.olla.spectral_efficiency_bps_hz);
    CHECK(row.agent.bler_first_tx == row.olla.bler_first_tx);
    CHECK(row.agent.throughput_bps > 0);
  }
  CHECK(r.summary.num_seeds == 3);
  CHECK(r.summary.tput_delta_mean == 0.0);
  CHECK(r.summary.tput_delta_ci95 == 0.0);
  CHECK(r.summary.tput_paired_t == 0.0);
  CHECK(r.agent_tput_by_seed == r.olla_tput_by_seed);
}

TEST_CASE("evaluation pairs both policies on common randomness") {
  const QNetwork net = random_net(8, 31);
  EvalConfig cfg;
  cfg.benchmark = BenchmarkId::kMimoFb;
  cfg.num_seeds = 2;

  const EvalResult with_net = run_eval(&net, cfg);
  const EvalResult again = run_eval(&net, cfg);
  const EvalResult baseline = run_eval(nullptr, cfg);

  // Deterministic end to end.
  CHECK(with_net.agent_tput_by_seed == again.agent_tput_by_seed);
  CHECK(with_net.olla_tput_by_seed == again.olla_tput_by_seed);
  // The baseline column is the same run regardless of the agent under test.
  CHECK(with_net.olla_tput_by_seed == baseline.olla_tput_by_seed);

  // Files land under outdir when requested.
  const std::string outdir = fresh_dir("eval");
  EvalConfig writing = cfg;
  writing.outdir = outdir;
  const EvalResult written = run_eval(&net, writing);
  CHECK_FALSE(written.outputs.empty());
  CHECK(fs::exists(outdir + "/kpi.csv"));
  fs::remove_all(outdir);

  EvalConfig bad = cfg;
  bad.omega_scalar = 1.5;
  CHECK_THROWS_AS((void)run_eval(&net, bad), ConfigError);
  bad.omega_scalar = 0.5;
  bad.num_seeds = 0;
  CHECK_THROWS_AS((void)run_eval(&net, bad), ConfigError);
}

TEST_CASE("preference sweeps validate, deduplicate, and order the grid") {
  const QNetwork net = random_net(8, 32);
  const std::vector<ParetoRow> rows =
      run_pareto(net, BenchmarkId::kMimoFb, {1.0, 0.5, 0.5, 0.0}, 2, true, "");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].omega_scalar == 0.0);
  CHECK(rows[1].omega_scalar == 0.5);
  CHECK(rows[2].omega_scalar == 1.0);
  for (const ParetoRow& row : rows) {
    CHECK(row.tput_mean > 0);
    CHECK(std::isfinite(row.bler_mean));
  }

  CHECK_THROWS_AS((void)run_pareto(net, BenchmarkId::kMimoFb, {}, 2, true, ""), ConfigError);
  CHECK_THROWS_AS((void)run_pareto(net, BenchmarkId::kMimoFb, {-0.1}, 2, true, ""), ConfigError);
  CHECK_THROWS_AS((void)run_pareto(net, BenchmarkId::kMimoFb, {1.5}, 2, true, ""), ConfigError);
}

TEST_CASE("train configs round trip through JSON and reject unknown keys") {
  TrainConfig cfg = tiny_train_config(41);
  cfg.actors = 3;
  cfg.deterministic = false;
  cfg.rank_control = false;
  cfg.decimation_k = 4;
  cfg.checkpoint_period = 250;
  const TrainConfig round = train_config_from_json(train_config_to_json(cfg));
  CHECK(round.seed == cfg.seed);
  CHECK(round.actors == 3);
  CHECK(round.env_step_budget == cfg.env_step_budget);
  CHECK(round.replay_ratio == cfg.replay_ratio);
  CHECK(round.deterministic == false);
  CHECK(round.rank_control == false);
  CHECK(round.episode_ttis == cfg.episode_ttis);
  CHECK(round.decimation_k == 4);
  CHECK(round.checkpoint_period == 250);
  CHECK(round.learner.batch_size == cfg.learner.batch_size);
  CHECK(round.learner.hidden == cfg.learner.hidden);
  CHECK(round.learner.min_fill == cfg.learner.min_fill);
  CHECK(round.space.bandwidth_mhz == cfg.space.bandwidth_mhz);
  CHECK(round.space.fb_ue_counts == cfg.space.fb_ue_counts);
  CHECK(round.space.site_types == cfg.space.site_types);

  CHECK_THROWS_AS((void)train_config_from_json("{\"bogus\": 1}"), ConfigError);
  CHECK_THROWS_AS((void)train_config_from_json("{\"learner\": {\"bogus\": 1}}"), ConfigError);
  CHECK_THROWS_AS((void)train_config_from_json("{not json"), ConfigError);
}

TEST_CASE("manifests record provenance and finalize in place") {
  const std::string outdir = fresh_dir("manifest");
  RunManifest m;
  m.command = "train";
  m.git_sha = "abc123";
  m.seed = 7;
  m.outdir = outdir;
  m.started_at = iso8601_utc_now();

  REQUIRE(m.started_at.size() == 20);
  CHECK(m.started_at[4] == '-');
  CHECK(m.started_at[10] == 'T');
  CHECK(m.started_at.back() == 'Z');

  const std::string path = write_manifest(m);
  CHECK(path == outdir + "/manifest.json");
  REQUIRE(fs::exists(path));

  m.finished_at = iso8601_utc_now();
  m.outputs = {outdir + "/loss_trace.csv"};
  CHECK(write_manifest(m) == path);

  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str().find("\"command\": \"train\"") != std::string::npos);
  CHECK(text.str().find("abc123") != std::string::npos);
  CHECK(text.str().find("loss_trace.csv") != std::string::npos);
  fs::remove_all(outdir);
}

TEST_CASE("threaded training meets its budget and reports per actor") {
  TrainConfig cfg = tiny_train_config(51);
  cfg.deterministic = false;
  cfg.actors = 2;
  cfg.env_step_budget = 1200;
  cfg.learner.min_fill = 200;
  cfg.learner.batch_size = 16;
  cfg.learner.hidden = 8;
  const TrainResult r = train(cfg);

  CHECK_FALSE(r.halted_on_error);
  CHECK(r.env_steps >= cfg.env_step_budget);
  CHECK(r.learner_steps == r.target_learner_steps);
  REQUIRE(r.actor_reports.size() == 2);
  // On a single hardware thread one actor can legitimately consume the
  // whole budget before the other is scheduled, so assert the pooled
  // totals rather than per-actor fairness.
  int64_t episodes = 0;
  int64_t decisions = 0;
  for (const ActorReport& rep : r.actor_reports) {
    episodes += rep.episodes;
    decisions += rep.decisions;
    CHECK(rep.halt_reason.empty());
  }
  CHECK(episodes >= 1);
  CHECK(decisions >= cfg.env_step_budget);
  CHECK(r.ingest.offered > 0);
  CHECK(r.ingest.admitted > cfg.learner.min_fill);
  for (const LossPoint& p : r.loss_trace) CHECK(std::isfinite(p.loss));
}

}  // TEST_SUITE
