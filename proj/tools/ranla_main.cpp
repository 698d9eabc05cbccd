#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ranla/checkpoint.hpp"
#include "ranla/engine.hpp"
#include "ranla/evalrun.hpp"
#include "ranla/manifest.hpp"

#ifndef RANLA_GIT_SHA
#define RANLA_GIT_SHA "unknown"
#endif

namespace {

namespace fs = std::filesystem;
using namespace ranla;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

/** Claims the output directory, refusing to reuse one without --force. */
void claim_outdir(const std::string& outdir, bool force) {
  if (outdir.empty()) throw ConfigError("--out is required");
  if (fs::exists(outdir) && !force)
    throw ConfigError("output directory " + outdir + " already exists (use --force to overwrite)");
  fs::create_directories(outdir);
}

RunManifest start_manifest(const std::string& command, uint64_t seed, const std::string& config_path,
                           const std::string& outdir) {
  RunManifest m;
  m.command = command;
  m.git_sha = RANLA_GIT_SHA;
  m.seed = seed;
  m.config_path = config_path;
  m.outdir = outdir;
  m.started_at = iso8601_utc_now();
  write_manifest(m);
  return m;
}

void finish_manifest(RunManifest& m, std::vector<std::string> outputs) {
  m.finished_at = iso8601_utc_now();
  m.outputs = std::move(outputs);
  write_manifest(m);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      grid.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("invalid preference grid entry \"" + item + "\"");
    }
  }
  if (grid.empty()) throw ConfigError("empty preference grid");
  return grid;
}

struct TrainCli {
  std::string config_path, outdir;
  uint64_t seed = 0;
  int actors = 1;
  int64_t steps = 200000;
  bool deterministic = false;
  bool force = false;
  bool no_rank_control = false;
};

int cmd_train(const TrainCli& cli, const CLI::App& sub) {
  TrainConfig cfg;
  if (!cli.config_path.empty()) cfg = train_config_from_json(read_file(cli.config_path));
  if (sub.count("--seed")) cfg.seed = cli.seed;
  if (sub.count("--actors")) cfg.actors = cli.actors;
  if (sub.count("--steps")) cfg.env_step_budget = cli.steps;
  if (sub.count("--deterministic")) cfg.deterministic = true;
  if (sub.count("--no-rank-control")) cfg.rank_control = false;
  cfg.outdir = cli.outdir;

  claim_outdir(cli.outdir, cli.force);
  RunManifest manifest = start_manifest("train", cfg.seed, cli.config_path, cli.outdir);

  TrainResult result = train(cfg);
  finish_manifest(manifest, result.outputs);

  std::cout << "train: " << result.env_steps << " env steps, " << result.learner_steps << "/"
            << result.target_learner_steps << " learner steps, " << result.episodes
            << " episodes\n";
  std::cout << "train: replay admitted " << result.ingest.admitted << "/" << result.ingest.offered
            << " transitions";
  if (result.ingest.queue_drops > 0) std::cout << " (" << result.ingest.queue_drops << " batches dropped)";
  std::cout << "\n";
  if (!result.final_checkpoint.empty())
    std::cout << "train: checkpoint " << result.final_checkpoint << "\n";
  if (result.halted_on_error) {
    std::cerr << "train: halted: " << result.halt_reason << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

struct EvalCli {
  std::string checkpoint, benchmark, outdir, trace_path;
  int seeds = 20;
  double omega = 0.5;
  bool force = false;
};

int cmd_eval(const EvalCli& cli) {
  BenchmarkId benchmark = benchmark_from_string(cli.benchmark);
  Checkpoint ckpt = load_checkpoint(cli.checkpoint);
  QNetwork net = network_from_checkpoint(ckpt);

  claim_outdir(cli.outdir, cli.force);
  RunManifest manifest = start_manifest("eval", static_cast<uint64_t>(cli.seeds), cli.checkpoint,
                                        cli.outdir);

  std::ofstream trace;
  EvalConfig cfg;
  cfg.benchmark = benchmark;
  cfg.num_seeds = cli.seeds;
  cfg.omega_scalar = cli.omega;
  cfg.rank_control = ckpt.rank_control;
  cfg.outdir = cli.outdir;
  if (!cli.trace_path.empty()) {
    trace.open(cli.trace_path, std::ios::trunc);
    if (!trace) throw ConfigError("cannot write trace file " + cli.trace_path);
    cfg.trace = &trace;
  }

  EvalResult result = run_eval(&net, cfg);
  std::vector<std::string> outputs = result.outputs;
  if (!cli.trace_path.empty()) outputs.push_back(cli.trace_path);
  finish_manifest(manifest, std::move(outputs));

  std::cout << "eval: " << to_string(benchmark) << " over " << cli.seeds << " seeds\n";
  std::cout << "eval: agent " << result.summary.agent_tput_mean << " bps vs olla "
            << result.summary.olla_tput_mean << " bps (delta " << result.summary.tput_delta_mean
            << " +/- " << result.summary.tput_delta_ci95 << ")\n";
  return kExitOk;
}

struct ParetoCli {
  std::string checkpoint, benchmark, outdir;
  std::string grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  int seeds = 5;
  bool force = false;
};

int cmd_pareto(const ParetoCli& cli) {
  BenchmarkId benchmark = benchmark_from_string(cli.benchmark);
  Checkpoint ckpt = load_checkpoint(cli.checkpoint);
  QNetwork net = network_from_checkpoint(ckpt);
  std::vector<double> grid = parse_grid(cli.grid);

  claim_outdir(cli.outdir, cli.force);
  RunManifest manifest = start_manifest("pareto", static_cast<uint64_t>(cli.seeds), cli.checkpoint,
                                        cli.outdir);

  std::vector<std::string> outputs;
  std::vector<ParetoRow> rows =
      run_pareto(net, benchmark, grid, cli.seeds, ckpt.rank_control, cli.outdir, &outputs);
  finish_manifest(manifest, std::move(outputs));

  std::cout << "pareto: " << rows.size() << " preference points on " << to_string(benchmark)
            << "\n";
  for (const ParetoRow& r : rows)
    std::cout << "  omega=" << r.omega_scalar << " tput=" << r.tput_mean
              << " bler=" << r.bler_mean << "\n";
  return kExitOk;
}

struct BaselineCli {
  std::string benchmark, outdir, trace_path;
  int seeds = 20;
  bool force = false;
};

int cmd_baseline(const BaselineCli& cli) {
  BenchmarkId benchmark = benchmark_from_string(cli.benchmark);
  claim_outdir(cli.outdir, cli.force);
  RunManifest manifest = start_manifest("baseline", static_cast<uint64_t>(cli.seeds), "",
                                        cli.outdir);

  std::ofstream trace;
  EvalConfig cfg;
  cfg.benchmark = benchmark;
  cfg.num_seeds = cli.seeds;
  cfg.outdir = cli.outdir;
  if (!cli.trace_path.empty()) {
    trace.open(cli.trace_path, std::ios::trunc);
    if (!trace) throw ConfigError("cannot write trace file " + cli.trace_path);
    cfg.trace = &trace;
  }

  EvalResult result = run_eval(nullptr, cfg);
  std::vector<std::string> outputs = result.outputs;
  if (!cli.trace_path.empty()) outputs.push_back(cli.trace_path);
  finish_manifest(manifest, std::move(outputs));

  std::cout << "baseline: " << to_string(benchmark) << " olla throughput "
            << result.summary.olla_tput_mean << " bps over " << cli.seeds << " seeds\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale cellular downlink simulator with RL link adaptation"};
  app.require_subcommand(1);

  TrainCli train_cli;
  CLI::App* train_cmd = app.add_subcommand("train", "train a link adaptation policy");
  train_cmd->add_option("--config", train_cli.config_path, "training config JSON");
  train_cmd->add_option("--seed", train_cli.seed, "master seed");
  train_cmd->add_option("--actors", train_cli.actors, "number of experience actors");
  train_cmd->add_option("--steps", train_cli.steps, "environment step budget");
  train_cmd->add_option("--out", train_cli.outdir, "output directory")->required();
  train_cmd->add_flag("--deterministic", train_cli.deterministic,
                      "single-threaded bit-reproducible mode");
  train_cmd->add_flag("--no-rank-control", train_cli.no_rank_control,
                      "pin rank to the UE report; agent only picks MCS");
  train_cmd->add_flag("--force", train_cli.force, "overwrite an existing output directory");

  EvalCli eval_cli;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint against the baseline");
  eval_cmd->add_option("--checkpoint", eval_cli.checkpoint, "policy checkpoint")->required();
  eval_cmd->add_option("--benchmark", eval_cli.benchmark, "benchmark name")->required();
  eval_cmd->add_option("--seeds", eval_cli.seeds, "number of paired evaluation seeds");
  eval_cmd->add_option("--omega", eval_cli.omega, "throughput preference in [0,1]");
  eval_cmd->add_option("--out", eval_cli.outdir, "output directory")->required();
  eval_cmd->add_option("--trace", eval_cli.trace_path, "per-TTI trace CSV (agent, seed 0)");
  eval_cmd->add_flag("--force", eval_cli.force, "overwrite an existing output directory");

  ParetoCli pareto_cli;
  CLI::App* pareto_cmd = app.add_subcommand("pareto", "sweep the preference trade-off");
  pareto_cmd->add_option("--checkpoint", pareto_cli.checkpoint, "policy checkpoint")->required();
  pareto_cmd->add_option("--benchmark", pareto_cli.benchmark, "benchmark name")->required();
  pareto_cmd->add_option("--omega", pareto_cli.grid, "comma-separated preference grid");
  pareto_cmd->add_option("--seeds", pareto_cli.seeds, "seeds per preference point");
  pareto_cmd->add_option("--out", pareto_cli.outdir, "output directory")->required();
  pareto_cmd->add_flag("--force", pareto_cli.force, "overwrite an existing output directory");

  BaselineCli baseline_cli;
  CLI::App* baseline_cmd = app.add_subcommand("baseline", "run the OLLA baseline alone");
  baseline_cmd->add_option("--benchmark", baseline_cli.benchmark, "benchmark name")->required();
  baseline_cmd->add_option("--seeds", baseline_cli.seeds, "number of evaluation seeds");
  baseline_cmd->add_option("--out", baseline_cli.outdir, "output directory")->required();
  baseline_cmd->add_option("--trace", baseline_cli.trace_path, "per-TTI trace CSV (seed 0)");
  baseline_cmd->add_flag("--force", baseline_cli.force, "overwrite an existing output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_cli, *train_cmd);
    if (eval_cmd->parsed()) return cmd_eval(eval_cli);
    if (pareto_cmd->parsed()) return cmd_pareto(pareto_cli);
    if (baseline_cmd->parsed()) return cmd_baseline(baseline_cli);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
