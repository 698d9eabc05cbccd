#include "ranla/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ranla {

double path_loss_db(double distance_m) {
  double d = std::max(distance_m, kMinLinkDistanceM);
  return 128.1 + 37.6 * std::log10(d / 1000.0);
}

double antenna_gain_db(SiteType t) {
  return t == SiteType::kMimo ? kMimoAntennaGainDb : kMassiveMimoAntennaGainDb;
}

double receiver_type_offset_db(int receiver_type) {
  static constexpr double kOffsets[4] = {0.0, -1.0, -2.0, 1.0};
  if (receiver_type < 0 || receiver_type > 3) throw SimError("receiver_type out of range");
  return kOffsets[receiver_type];
}

double noise_power_dbm(int prbs) {
  if (prbs < 1) throw SimError("noise_power_dbm: prbs must be >= 1");
  return kNoiseDensityDbmHz + 10.0 * std::log10(prbs * kPrbBandwidthHz) + kNoiseFigureDb;
}

double combine_sinr_db(double signal_dbm, const std::vector<double>& interference_dbm,
                       double noise_dbm) {
  double denom_mw = std::pow(10.0, noise_dbm / 10.0);
  for (double i_dbm : interference_dbm) denom_mw += std::pow(10.0, i_dbm / 10.0);
  return signal_dbm - 10.0 * std::log10(denom_mw);
}

namespace {

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts * 1000.0); }

double distance_m(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

}  // namespace

Simulator::Simulator(const ScenarioConfig& cfg, std::ostream* trace)
    : m_cfg(cfg), m_seed(cfg.seed), m_trace(trace) {
  if (cfg.sites.empty()) throw SimError("scenario has no sites");
  if (cfg.duration_ttis <= 0) throw SimError("duration_ttis must be > 0");

  // Cells and UEs are indexed by their ids; require dense 0..n-1 ids.
  int num_cells = cfg.num_cells();
  m_cells.resize(num_cells);
  std::vector<bool> seen_cell(num_cells, false);
  for (const auto& site : cfg.sites) {
    if (site.site_id < 0 || site.site_id >= static_cast<int>(cfg.sites.size()))
      throw SimError("site ids must be dense 0..N-1");
    for (const auto& c : site.cells) {
      if (c.cell_id < 0 || c.cell_id >= num_cells || seen_cell[c.cell_id])
        throw SimError("cell ids must be dense 0..N-1 and unique");
      seen_cell[c.cell_id] = true;
      CellRuntime& cell = m_cells[c.cell_id];
      cell.cfg = c;
      cell.site_id = site.site_id;
      cell.site_type = site.site_type;
      cell.site_x = site.x_m;
      cell.site_y = site.y_m;
    }
  }

  int num_ues = static_cast<int>(cfg.ues.size());
  m_ues.resize(num_ues);
  std::vector<bool> seen_ue(num_ues, false);
  for (const auto& uc : cfg.ues) {
    if (uc.ue_id < 0 || uc.ue_id >= num_ues || seen_ue[uc.ue_id])
      throw SimError("ue ids must be dense 0..N-1 and unique");
    seen_ue[uc.ue_id] = true;
    if (uc.serving_cell_id < 0 || uc.serving_cell_id >= num_cells)
      throw SimError("ue " + std::to_string(uc.ue_id) + " references missing cell");
    UeRuntime& u = m_ues[uc.ue_id];
    u.cfg = uc;
    u.x_m = uc.x_m;
    u.y_m = uc.y_m;
    u.heading_rad = Rng(hash_seed(m_seed, stream::kDirection, uc.ue_id)).uniform(0.0, 6.283185307179586);
    u.fading_rho = std::exp(-kFadingRatePerMps * uc.speed_mps);
    u.shadow_db.resize(cfg.sites.size());
    for (size_t s = 0; s < cfg.sites.size(); ++s)
      u.shadow_db[s] = kShadowingSigmaDb * Rng(hash_seed(m_seed, stream::kShadow, uc.ue_id, s)).normal();
    u.fading_db = kFadingSigmaDb * Rng(hash_seed(m_seed, stream::kFading, uc.ue_id)).normal();
    m_cells[uc.serving_cell_id].attached_ues.push_back(uc.ue_id);
  }
  for (auto& cell : m_cells) std::sort(cell.attached_ues.begin(), cell.attached_ues.end());

  // Static neighborhood: the two strongest non-serving cells at drop time.
  for (auto& u : m_ues) {
    double best[2] = {-std::numeric_limits<double>::infinity(),
                      -std::numeric_limits<double>::infinity()};
    for (const auto& cell : m_cells) {
      if (cell.cfg.cell_id == u.cfg.serving_cell_id) continue;
      double p = link_budget_dbm(u.cfg.ue_id, cell.cfg.cell_id);
      if (p > best[0]) {
        best[1] = best[0];
        u.neighbor_present[1] = u.neighbor_present[0];
        u.neighbor_type[1] = u.neighbor_type[0];
        best[0] = p;
        u.neighbor_present[0] = true;
        u.neighbor_type[0] = cell.site_type;
      } else if (p > best[1]) {
        best[1] = p;
        u.neighbor_present[1] = true;
        u.neighbor_type[1] = cell.site_type;
      }
    }
  }

  // Boot CQI: interference-free estimate at the drop position.
  for (auto& u : m_ues) {
    const CellRuntime& cell = m_cells[u.cfg.serving_cell_id];
    double sinr0 = serving_signal_dbm(u) - noise_power_dbm(cell.cfg.num_subbands);
    u.cqi = quantize_cqi(sinr0 + receiver_type_offset_db(u.cfg.receiver_type));
    u.cqi_measured_tti = 0;
    u.last_sinr_db = sinr0;
  }

  m_cqi_in_flight.resize(num_ues);

  if (m_trace) *m_trace << "tti,cell,ue,mcs,rank,sinr,ack,bits,prbs\n";
}

double Simulator::serving_signal_dbm(const UeRuntime& u) const {
  const CellRuntime& cell = m_cells[u.cfg.serving_cell_id];
  double d = distance_m(u.x_m, u.y_m, cell.site_x, cell.site_y);
  double p = watts_to_dbm(cell.cfg.dl_tx_power_w) + antenna_gain_db(cell.site_type) -
             path_loss_db(d) - u.shadow_db[cell.site_id] + u.fading_db;
  if (u.cfg.indoor) p -= kPenetrationLossDb;
  return p;
}

double Simulator::link_budget_dbm(int ue_id, int cell_id) const {
  const UeRuntime& u = m_ues.at(ue_id);
  const CellRuntime& cell = m_cells.at(cell_id);
  const CellRuntime& serving = m_cells.at(u.cfg.serving_cell_id);
  double d = distance_m(u.x_m, u.y_m, cell.site_x, cell.site_y);
  double p = watts_to_dbm(cell.cfg.dl_tx_power_w) + antenna_gain_db(cell.site_type) -
             path_loss_db(d) - u.shadow_db[cell.site_id];
  if (u.cfg.indoor) p -= kPenetrationLossDb;
  if (cell.cfg.cell_id != serving.cfg.cell_id && cell.site_id == serving.site_id)
    p -= kSectorIsolationDb;
  return p;
}

double Simulator::interference_power_mw(const UeRuntime& u, int tti) const {
  double sum_mw = 0.0;
  for (const auto& cell : m_cells) {
    if (!cell.active || cell.cfg.cell_id == u.cfg.serving_cell_id) continue;
    if (cell.site_type == SiteType::kMassiveMimo) {
      // Narrow-beam interferer: hits only on a beam collision.
      double draw = Rng(hash_seed(m_seed, stream::kCollision, u.cfg.ue_id,
                                  cell.cfg.cell_id, tti))
                        .uniform();
      if (draw >= kBeamCollisionProb) continue;
    }
    sum_mw += std::pow(10.0, link_budget_dbm(u.cfg.ue_id, cell.cfg.cell_id) / 10.0);
  }
  return sum_mw;
}

void Simulator::advance_traffic(int tti) {
  for (auto& u : m_ues) {
    if (u.cfg.traffic != TrafficType::kMbb) continue;
    Rng rng(hash_seed(m_seed, stream::kTraffic, u.cfg.ue_id, tti));
    int arrivals = rng.poisson(kMbbArrivalRatePerTti);
    for (int j = 0; j < arrivals; ++j) {
      double bits = std::exp(kMbbPacketLogMeanBits + kMbbPacketLogSigma * rng.normal());
      int64_t b = std::max<int64_t>(1, std::llround(bits));
      u.packet_queue.push_back(Packet{tti, b});
      u.backlog_bits += b;
      u.generated_bits += b;
    }
  }
}

void Simulator::advance_channel(int tti) {
  for (auto& u : m_ues) {
    u.x_m += u.cfg.speed_mps * 1e-3 * std::cos(u.heading_rad);
    u.y_m += u.cfg.speed_mps * 1e-3 * std::sin(u.heading_rad);
    double noise = Rng(hash_seed(m_seed, stream::kFading, u.cfg.ue_id, tti)).normal();
    double rho = u.fading_rho;
    u.fading_db = rho * u.fading_db + std::sqrt(1.0 - rho * rho) * kFadingSigmaDb * noise;
  }
}

void Simulator::deliver_cqi_reports(int tti) {
  for (auto& u : m_ues) {
    auto& q = m_cqi_in_flight[u.cfg.ue_id];
    while (!q.empty() && q.front().deliver_tti <= tti) {
      u.cqi = q.front().cqi;
      u.cqi_measured_tti = q.front().measured_tti;
      q.pop_front();
    }
  }
}

void Simulator::deliver_feedback(int tti) {
  for (auto& u : m_ues) {
    CellRuntime& cell = m_cells[u.cfg.serving_cell_id];
    for (int pid = 0; pid < kMaxHarqProcesses; ++pid) {
      HarqProcess& h = u.harq[pid];
      if (!h.busy || h.pending_feedback_tti != tti) continue;
      bool ack = h.pending_ack;
      bool first_tx = h.tx_count == 1;

      m_pending.feedback.push_back(
          TtiFeedback{u.cfg.ue_id, ack, first_tx, ack ? h.tb_bits : 0, h.prbs_used, tti});

      if (first_tx) {
        u.olla.on_first_tx(ack);
        u.ack_history[u.ack_history_head] = ack ? 1 : 0;
        u.ack_history_head = (u.ack_history_head + 1) % kAckHistoryLen;
        u.ack_history_size = std::min(u.ack_history_size + 1, kAckHistoryLen);
        u.recent_bler_ewma = 0.9 * u.recent_bler_ewma + 0.1 * (ack ? 0.0 : 1.0);
        u.first_tx_total++;
        cell.first_tx_total++;
        if (ack) {
          u.first_tx_acks++;
          cell.first_tx_acks++;
        }
      }

      if (ack || h.tx_count >= kMaxHarqTx) {
        // Transport block resolved: delivered, or dropped after the cap.
        if (ack) {
          u.delivered_bits += h.tb_bits;
          cell.delivered_bits += h.tb_bits;
          for (const auto& span : h.packet_spans) {
            if (span.final_bits) {
              u.latency_sum_ttis += tti - span.arrival_tti;
              u.latency_count++;
            }
          }
        } else {
          u.dropped_bits += h.tb_bits;
        }
        Reward r = make_reward(ack, h.tb_bits, h.prbs_used, h.tx_count, cell.cfg.num_subbands);
        u.last_reward_bits = r.bits;
        u.last_reward_resource = r.resource;
        m_pending.resolutions.push_back(TbResolution{
            u.cfg.ue_id, cell.cfg.cell_id, ack, h.tb_bits, h.mcs, h.rank, h.tx_count,
            h.prbs_used, h.prbs_used * h.tx_count, h.first_tx_tti, tti});
        h = HarqProcess{};
      } else {
        h.awaiting_retx = true;
        h.pending_feedback_tti = -1;
      }
    }
  }
}

int Simulator::free_harq_pid(const UeRuntime& u) const {
  for (int pid = 0; pid < kMaxHarqProcesses; ++pid)
    if (!u.harq[pid].busy) return pid;
  return -1;
}

bool Simulator::has_awaiting_retx(const UeRuntime& u) const {
  for (const auto& h : u.harq)
    if (h.busy && h.awaiting_retx) return true;
  return false;
}

std::vector<Grant> Simulator::run_scheduler(int tti) {
  (void)tti;
  std::vector<Grant> grants;
  for (auto& cell : m_cells) {
    cell.active = false;
    cell.scheduled_ue = -1;
    size_t n = cell.attached_ues.size();
    for (size_t i = 0; i < n; ++i) {
      size_t idx = (cell.rr_cursor + i) % n;
      UeRuntime& u = m_ues[cell.attached_ues[idx]];
      Grant g;
      g.cell_id = cell.cfg.cell_id;
      g.ue_id = u.cfg.ue_id;
      if (has_awaiting_retx(u)) {
        // Pending retransmissions outrank new data.
        int best_pid = -1;
        for (int pid = 0; pid < kMaxHarqProcesses; ++pid) {
          const HarqProcess& h = u.harq[pid];
          if (h.busy && h.awaiting_retx &&
              (best_pid < 0 || h.first_tx_tti < u.harq[best_pid].first_tx_tti))
            best_pid = pid;
        }
        g.needs_action = false;
        g.harq_pid = best_pid;
      } else {
        bool backlogged = u.cfg.traffic == TrafficType::kFullBuffer || u.backlog_bits > 0;
        if (!backlogged || free_harq_pid(u) < 0) continue;
        g.needs_action = true;
      }
      cell.rr_cursor = (idx + 1) % n;
      cell.active = true;
      cell.scheduled_ue = u.cfg.ue_id;
      grants.push_back(g);
      break;
    }
  }
  return grants;
}

std::vector<Grant> Simulator::prepare_tti(int tti) {
  if (tti != m_current_tti + 1)
    throw SimError("prepare_tti: TTIs must advance one at a time from 0");
  if (m_prepared_tti == tti) throw SimError("prepare_tti called twice for one TTI");
  m_prepared_tti = tti;
  m_pending = TtiResult{};
  advance_traffic(tti);
  advance_channel(tti);
  deliver_cqi_reports(tti);
  deliver_feedback(tti);
  m_grants = run_scheduler(tti);
  return m_grants;
}

void Simulator::execute_grant(const Grant& g, const Action* action, int tti) {
  UeRuntime& u = m_ues[g.ue_id];
  CellRuntime& cell = m_cells[g.cell_id];
  u.scheduled_ttis++;
  cell.active_ttis++;
  u.last_grant_tti = tti;

  int pid;
  if (!g.needs_action) {
    pid = g.harq_pid;
    HarqProcess& h = u.harq[pid];
    h.tx_count++;
    h.awaiting_retx = false;
  } else {
    Action a = *action;
    if (!valid_mcs(a.mcs)) throw SimError("action mcs out of range");
    if (a.rank < 1 || a.rank > u.cfg.max_rank)
      throw SimError("action rank exceeds UE capability");
    pid = free_harq_pid(u);
    if (pid < 0) throw SimError("scheduler granted a UE with no free HARQ process");
    HarqProcess& h = u.harq[pid];
    h = HarqProcess{};
    h.busy = true;
    h.mcs = a.mcs;
    h.rank = a.rank;
    h.tx_count = 1;
    h.first_tx_tti = tti;
    int64_t full_tbs = transport_block_size(a.mcs, a.rank, cell.cfg.num_subbands);
    if (u.cfg.traffic == TrafficType::kFullBuffer) {
      h.tb_bits = full_tbs;
      h.prbs_used = cell.cfg.num_subbands;
    } else {
      h.tb_bits = std::min<int64_t>(full_tbs, u.backlog_bits);
      double bits_per_prb =
          kMcsSpectralEfficiency[a.mcs] * kSymbolsPerPrbTti * kDataRatio * a.rank;
      h.prbs_used = std::clamp<int>(
          static_cast<int>(std::ceil(static_cast<double>(h.tb_bits) / bits_per_prb)), 1,
          cell.cfg.num_subbands);
      // Drain the packet queue FIFO into this transport block.
      int64_t need = h.tb_bits;
      while (need > 0) {
        Packet& p = u.packet_queue.front();
        int64_t take = std::min(need, p.bits_left);
        p.bits_left -= take;
        need -= take;
        u.backlog_bits -= take;
        h.packet_spans.push_back(HarqProcess::PacketSpan{p.arrival_tti, take, p.bits_left == 0});
        if (p.bits_left == 0) u.packet_queue.pop_front();
      }
    }
    u.last_mcs = a.mcs;
    u.last_rank = a.rank;
  }

  HarqProcess& h = u.harq[pid];
  double sinr_eff = harq_effective_sinr_db(per_layer_sinr_db(u.last_sinr_db, h.rank), h.tx_count);
  double p_err = block_error_probability(sinr_eff, h.mcs);
  double draw = Rng(hash_seed(m_seed, stream::kBlock, u.cfg.ue_id, tti)).uniform();
  h.pending_ack = draw >= p_err;
  h.pending_feedback_tti = tti + kHarqRttTtis;

  if (m_trace) {
    char line[160];
    std::snprintf(line, sizeof(line), "%d,%d,%d,%d,%d,%.6f,%d,%lld,%d\n", tti, g.cell_id,
                  g.ue_id, h.mcs, h.rank, u.last_sinr_db, h.pending_ack ? 1 : 0,
                  static_cast<long long>(h.tb_bits), h.prbs_used);
    *m_trace << line;
  }
}

TtiResult Simulator::step(int tti, const std::map<int, Action>& actions) {
  if (tti != m_prepared_tti || tti != m_current_tti + 1)
    throw SimError("step: call prepare_tti(t) before step(t)");

  // Channel quality realized this TTI, given which cells transmit.
  for (auto& u : m_ues) {
    const CellRuntime& cell = m_cells[u.cfg.serving_cell_id];
    double i_mw = interference_power_mw(u, tti);
    double n_mw = std::pow(10.0, noise_power_dbm(cell.cfg.num_subbands) / 10.0);
    u.last_sinr_db = serving_signal_dbm(u) - 10.0 * std::log10(i_mw + n_mw);

    u.interference_samples++;
    double delta = i_mw - u.interference_mean_mw;
    u.interference_mean_mw += delta / u.interference_samples;
    u.interference_m2 += delta * (i_mw - u.interference_mean_mw);
    u.interference_activity =
        0.95 * u.interference_activity + 0.05 * (i_mw > n_mw ? 1.0 : 0.0);

    if ((tti + u.cfg.ue_id) % kCqiPeriodTtis == 0) {
      int cqi = quantize_cqi(u.last_sinr_db + receiver_type_offset_db(u.cfg.receiver_type));
      m_cqi_in_flight[u.cfg.ue_id].push_back(
          CqiReport{tti + kCqiDelayTtis, tti, cqi});
    }
  }

  // Validate the action map against this TTI's grants.
  std::map<int, const Grant*> needs_action;
  for (const auto& g : m_grants)
    if (g.needs_action) needs_action[g.ue_id] = &g;
  for (const auto& [ue_id, a] : actions) {
    (void)a;
    if (needs_action.find(ue_id) == needs_action.end())
      throw SimError("action provided for UE " + std::to_string(ue_id) +
                     " which has no new-data grant this TTI");
  }
  for (const auto& [ue_id, g] : needs_action) {
    (void)g;
    if (actions.find(ue_id) == actions.end())
      throw SimError("missing action for scheduled UE " + std::to_string(ue_id));
  }

  for (const auto& g : m_grants) {
    const Action* a = g.needs_action ? &actions.at(g.ue_id) : nullptr;
    execute_grant(g, a, tti);
  }

  m_current_tti = tti;
  TtiResult out = std::move(m_pending);
  m_pending = TtiResult{};
  return out;
}

double Simulator::interference_variance_mw2(int ue_id) const {
  const UeRuntime& u = m_ues.at(ue_id);
  if (u.interference_samples < 2) return 0.0;
  return u.interference_m2 / static_cast<double>(u.interference_samples - 1);
}

void Simulator::reset_kpi_window() {
  for (auto& u : m_ues) {
    u.generated_bits = u.delivered_bits = u.dropped_bits = 0;
    u.first_tx_acks = u.first_tx_total = 0;
    u.scheduled_ttis = 0;
    u.latency_sum_ttis = 0;
    u.latency_count = 0;
  }
  for (auto& cell : m_cells) {
    cell.delivered_bits = 0;
    cell.first_tx_acks = cell.first_tx_total = 0;
    cell.active_ttis = 0;
  }
  m_window_start_tti = m_current_tti + 1;
}

KpiReport Simulator::kpi_report() const {
  if (m_current_tti < m_window_start_tti) throw SimError("kpi_report: empty window");
  KpiReport rep;
  rep.window_seconds = (m_current_tti - m_window_start_tti + 1) * 1e-3;
  for (const auto& u : m_ues) {
    const CellRuntime& cell = m_cells[u.cfg.serving_cell_id];
    UeKpi k;
    k.ue_id = u.cfg.ue_id;
    k.throughput_bps = static_cast<double>(u.delivered_bits) / rep.window_seconds;
    k.spectral_efficiency_bps_hz =
        u.scheduled_ttis == 0
            ? 0.0
            : static_cast<double>(u.delivered_bits) /
                  (cell.cfg.num_subbands * kPrbBandwidthHz * u.scheduled_ttis * 1e-3);
    k.bler_first_tx = u.first_tx_total == 0
                          ? 0.0
                          : 1.0 - static_cast<double>(u.first_tx_acks) / u.first_tx_total;
    k.mean_latency_ttis = u.latency_count == 0
                              ? std::numeric_limits<double>::quiet_NaN()
                              : u.latency_sum_ttis / u.latency_count;
    k.delivered_bits = u.delivered_bits;
    k.generated_bits = u.generated_bits;
    k.dropped_bits = u.dropped_bits;
    rep.ues.push_back(k);
  }
  for (const auto& cell : m_cells) {
    CellKpi k;
    k.cell_id = cell.cfg.cell_id;
    k.throughput_bps = static_cast<double>(cell.delivered_bits) / rep.window_seconds;
    k.spectral_efficiency_bps_hz =
        cell.active_ttis == 0
            ? 0.0
            : static_cast<double>(cell.delivered_bits) /
                  (cell.cfg.num_subbands * kPrbBandwidthHz * cell.active_ttis * 1e-3);
    k.bler_first_tx =
        cell.first_tx_total == 0
            ? 0.0
            : 1.0 - static_cast<double>(cell.first_tx_acks) / cell.first_tx_total;
    rep.cells.push_back(k);
  }
  return rep;
}

}  // namespace ranla
