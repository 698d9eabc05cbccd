#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ranla/qnet.hpp"
#include "ranla/scenario.hpp"
#include "ranla/simcore.hpp"

namespace ranla {

/**
 * Benchmark evaluation: for each seed the agent and the OLLA baseline run
 * the exact same scenario draw, so channel, traffic, and block error
 * randomness are common between the two policies and per-seed deltas are
 * paired.
 */
struct EvalConfig {
  BenchmarkId benchmark = BenchmarkId::kMimoFb;
  int num_seeds = 20;
  double omega_scalar = 0.5;  // mapped to (w, 1-w)
  bool rank_control = true;
  std::string outdir;          // empty = no files written
  std::ostream* trace = nullptr;  // per-TTI trace of the agent run on seed 0
};

struct EvalRow {
  int seed = 0;
  int ue_id = 0;
  TrafficType traffic = TrafficType::kFullBuffer;
  UeKpi agent;
  UeKpi olla;
};

struct EvalSummary {
  int num_seeds = 0;
  double agent_tput_mean = 0, olla_tput_mean = 0;
  double tput_delta_mean = 0, tput_delta_ci95 = 0;  // per-seed paired deltas
  double tput_paired_t = 0;
  double agent_se_mean = 0, olla_se_mean = 0;
  double agent_bler_mean = 0, olla_bler_mean = 0;
  double agent_latency_mean = 0, olla_latency_mean = 0;  // NaN without MBB traffic
};

struct EvalResult {
  std::vector<EvalRow> rows;
  EvalSummary summary;
  std::vector<double> agent_tput_by_seed;
  std::vector<double> olla_tput_by_seed;
  std::vector<std::string> outputs;
};

// net == nullptr evaluates the baseline against itself (both columns OLLA).
EvalResult run_eval(const QNetwork* net, const EvalConfig& cfg);

/** One preference sweep point of a trade-off scan. */
struct ParetoRow {
  double omega_scalar = 0;
  double tput_mean = 0;
  double se_mean = 0;
  double bler_mean = 0;
  double latency_mean = 0;
};

/**
 * Evaluates the agent across a preference grid (deduplicated, ascending)
 * on one benchmark; writes pareto.csv under outdir when given.
 */
std::vector<ParetoRow> run_pareto(const QNetwork& net, BenchmarkId benchmark,
                                  std::vector<double> omega_grid, int num_seeds,
                                  bool rank_control, const std::string& outdir,
                                  std::vector<std::string>* outputs = nullptr);

}  // namespace ranla
