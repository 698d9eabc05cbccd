#include "ranla/evalrun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "ranla/actor.hpp"
#include "ranla/policy.hpp"
#include "ranla/stats.hpp"

namespace ranla {

namespace {

// Mean over finite values; NaN when none (e.g. latency without MBB UEs).
double finite_mean(const std::vector<double>& xs) {
  double sum = 0.0;
  int n = 0;
  for (double x : xs) {
    if (std::isfinite(x)) {
      sum += x;
      ++n;
    }
  }
  return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

KpiReport run_one(const ScenarioConfig& scenario, Policy& policy, bool rank_control,
                  std::ostream* trace) {
  EpisodeOptions opts;
  opts.rank_control = rank_control;
  opts.trace = trace;
  return run_episode(scenario, policy, opts).kpis;
}

void write_kpi_csv(const std::string& path, const std::vector<EvalRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("run_eval: cannot write " + path);
  out << "policy,seed,ue_id,traffic,throughput_bps,spectral_efficiency_bps_hz,"
         "bler_first_tx,mean_latency_ttis,delivered_bits,generated_bits,dropped_bits\n";
  char buf[512];
  auto emit = [&](const char* policy, const EvalRow& r, const UeKpi& k) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%lld,%lld,%lld\n",
                  policy, r.seed, r.ue_id, r.traffic == TrafficType::kFullBuffer ? "FB" : "MBB",
                  k.throughput_bps, k.spectral_efficiency_bps_hz, k.bler_first_tx,
                  k.mean_latency_ttis, static_cast<long long>(k.delivered_bits),
                  static_cast<long long>(k.generated_bits),
                  static_cast<long long>(k.dropped_bits));
    out << buf;
  };
  for (const EvalRow& r : rows) {
    emit("agent", r, r.agent);
    emit("olla", r, r.olla);
  }
}

void write_summary(const std::string& path, const EvalConfig& cfg, const EvalSummary& s) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("run_eval: cannot write " + path);
  char buf[256];
  out << "benchmark: " << to_string(cfg.benchmark) << "\n";
  out << "seeds: " << s.num_seeds << "\n";
  std::snprintf(buf, sizeof(buf), "omega: %.6g\n", cfg.omega_scalar);
  out << buf;
  std::snprintf(buf, sizeof(buf), "agent throughput mean [bps]: %.6g\n", s.agent_tput_mean);
  out << buf;
  std::snprintf(buf, sizeof(buf), "olla  throughput mean [bps]: %.6g\n", s.olla_tput_mean);
  out << buf;
  std::snprintf(buf, sizeof(buf), "throughput delta mean +/- ci95: %.6g +/- %.6g\n",
                s.tput_delta_mean, s.tput_delta_ci95);
  out << buf;
  std::snprintf(buf, sizeof(buf), "throughput paired t: %.6g\n", s.tput_paired_t);
  out << buf;
  std::snprintf(buf, sizeof(buf), "agent/olla spectral efficiency: %.6g / %.6g\n", s.agent_se_mean,
                s.olla_se_mean);
  out << buf;
  std::snprintf(buf, sizeof(buf), "agent/olla first-tx bler: %.6g / %.6g\n", s.agent_bler_mean,
                s.olla_bler_mean);
  out << buf;
  std::snprintf(buf, sizeof(buf), "agent/olla latency [ttis]: %.6g / %.6g\n", s.agent_latency_mean,
                s.olla_latency_mean);
  out << buf;
}

}  // namespace

EvalResult run_eval(const QNetwork* net, const EvalConfig& cfg) {
  if (cfg.num_seeds < 1) throw ConfigError("run_eval: num_seeds must be >= 1");
  if (!(cfg.omega_scalar >= 0.0 && cfg.omega_scalar <= 1.0))
    throw ConfigError("run_eval: omega outside [0,1]");

  EvalResult result;
  PreferenceVector omega = preference_from_scalar(cfg.omega_scalar);

  std::vector<double> agent_se, olla_se, agent_bler, olla_bler, agent_lat, olla_lat;
  for (int seed = 0; seed < cfg.num_seeds; ++seed) {
    ScenarioConfig scenario = benchmark_scenario(cfg.benchmark, static_cast<uint64_t>(seed));

    KpiReport agent_kpis;
    if (net != nullptr) {
      RlPolicy agent(net, omega, /*epsilon=*/0.0, /*seed=*/0);
      agent_kpis = run_one(scenario, agent, cfg.rank_control, seed == 0 ? cfg.trace : nullptr);
    } else {
      OllaPolicy agent;
      agent_kpis = run_one(scenario, agent, /*rank_control=*/false, seed == 0 ? cfg.trace : nullptr);
    }
    OllaPolicy baseline;
    KpiReport olla_kpis = run_one(scenario, baseline, /*rank_control=*/false, nullptr);

    std::vector<double> a_tput, o_tput;
    std::map<int, TrafficType> traffic;
    for (const UEConfig& ue : scenario.ues) traffic[ue.ue_id] = ue.traffic;
    for (size_t i = 0; i < agent_kpis.ues.size(); ++i) {
      const UeKpi& a = agent_kpis.ues[i];
      const UeKpi& o = olla_kpis.ues[i];
      EvalRow row;
      row.seed = seed;
      row.ue_id = a.ue_id;
      row.traffic = traffic.at(a.ue_id);
      row.agent = a;
      row.olla = o;
      result.rows.push_back(row);
      a_tput.push_back(a.throughput_bps);
      o_tput.push_back(o.throughput_bps);
      agent_se.push_back(a.spectral_efficiency_bps_hz);
      olla_se.push_back(o.spectral_efficiency_bps_hz);
      agent_bler.push_back(a.bler_first_tx);
      olla_bler.push_back(o.bler_first_tx);
      agent_lat.push_back(a.mean_latency_ttis);
      olla_lat.push_back(o.mean_latency_ttis);
    }
    result.agent_tput_by_seed.push_back(mean_of(a_tput));
    result.olla_tput_by_seed.push_back(mean_of(o_tput));
  }

  EvalSummary& s = result.summary;
  s.num_seeds = cfg.num_seeds;
  s.agent_tput_mean = mean_of(result.agent_tput_by_seed);
  s.olla_tput_mean = mean_of(result.olla_tput_by_seed);
  std::vector<double> deltas(result.agent_tput_by_seed.size());
  for (size_t i = 0; i < deltas.size(); ++i)
    deltas[i] = result.agent_tput_by_seed[i] - result.olla_tput_by_seed[i];
  s.tput_delta_mean = mean_of(deltas);
  if (deltas.size() >= 2) {
    s.tput_delta_ci95 = ci95_halfwidth(deltas);
    s.tput_paired_t = paired_t_stat(result.agent_tput_by_seed, result.olla_tput_by_seed);
  }
  s.agent_se_mean = finite_mean(agent_se);
  s.olla_se_mean = finite_mean(olla_se);
  s.agent_bler_mean = finite_mean(agent_bler);
  s.olla_bler_mean = finite_mean(olla_bler);
  s.agent_latency_mean = finite_mean(agent_lat);
  s.olla_latency_mean = finite_mean(olla_lat);

  if (!cfg.outdir.empty()) {
    std::string kpi_path = cfg.outdir + "/kpi.csv";
    write_kpi_csv(kpi_path, result.rows);
    result.outputs.push_back(kpi_path);
    std::string summary_path = cfg.outdir + "/summary.txt";
    write_summary(summary_path, cfg, s);
    result.outputs.push_back(summary_path);
    std::string scen_path = cfg.outdir + "/scenario_seed0.json";
    save_scenario(benchmark_scenario(cfg.benchmark, 0), scen_path);
    result.outputs.push_back(scen_path);
  }
  return result;
}

std::vector<ParetoRow> run_pareto(const QNetwork& net, BenchmarkId benchmark,
                                  std::vector<double> omega_grid, int num_seeds,
                                  bool rank_control, const std::string& outdir,
                                  std::vector<std::string>* outputs) {
  if (omega_grid.empty()) throw ConfigError("run_pareto: empty preference grid");
  for (double w : omega_grid)
    if (!(w >= 0.0 && w <= 1.0)) throw ConfigError("run_pareto: preference outside [0,1]");
  std::sort(omega_grid.begin(), omega_grid.end());
  omega_grid.erase(std::unique(omega_grid.begin(), omega_grid.end()), omega_grid.end());

  std::vector<ParetoRow> rows;
  for (double w : omega_grid) {
    PreferenceVector omega = preference_from_scalar(w);
    std::vector<double> tput, se, bler, lat;
    for (int seed = 0; seed < num_seeds; ++seed) {
      ScenarioConfig scenario = benchmark_scenario(benchmark, static_cast<uint64_t>(seed));
      RlPolicy agent(&net, omega, 0.0, 0);
      KpiReport kpis = run_one(scenario, agent, rank_control, nullptr);
      for (const UeKpi& k : kpis.ues) {
        tput.push_back(k.throughput_bps);
        se.push_back(k.spectral_efficiency_bps_hz);
        bler.push_back(k.bler_first_tx);
        lat.push_back(k.mean_latency_ttis);
      }
    }
    ParetoRow row;
    row.omega_scalar = w;
    row.tput_mean = finite_mean(tput);
    row.se_mean = finite_mean(se);
    row.bler_mean = finite_mean(bler);
    row.latency_mean = finite_mean(lat);
    rows.push_back(row);
  }

  if (!outdir.empty()) {
    std::string path = outdir + "/pareto.csv";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("run_pareto: cannot write " + path);
    out << "omega,throughput_bps,spectral_efficiency_bps_hz,bler_first_tx,mean_latency_ttis\n";
    char buf[256];
    for (const ParetoRow& r : rows) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.omega_scalar,
                    r.tput_mean, r.se_mean, r.bler_mean, r.latency_mean);
      out << buf;
    }
    if (outputs) outputs->push_back(path);
  }
  return rows;
}

}  // namespace ranla
