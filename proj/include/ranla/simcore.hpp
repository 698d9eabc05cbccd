#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ranla/actions.hpp"
#include "ranla/mcs_table.hpp"
#include "ranla/olla.hpp"
#include "ranla/reward.hpp"
#include "ranla/rng.hpp"
#include "ranla/scenario.hpp"

namespace ranla {

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Radio model constants.
inline constexpr double kNoiseDensityDbmHz = -174.0;
inline constexpr double kNoiseFigureDb = 9.0;
inline constexpr double kPenetrationLossDb = 20.0;  // indoor UEs, all links
inline constexpr double kShadowingSigmaDb = 6.0;    // lognormal, per UE-site link
inline constexpr double kFadingSigmaDb = 3.0;       // stationary AR(1) std dev
inline constexpr double kFadingRatePerMps = 0.05;   // rho = exp(-rate * speed)
inline constexpr double kMimoAntennaGainDb = 9.0;
inline constexpr double kMassiveMimoAntennaGainDb = 17.0;
// Sectors of the same site are separated by antenna front-to-back/side
// attenuation, abstracted as a flat inter-sector coupling loss.
inline constexpr double kSectorIsolationDb = 20.0;
// An active mMIMO interferer hits the victim only when its narrow beam
// points at it; MIMO sectors radiate wide and always hit when active.
inline constexpr double kBeamCollisionProb = 0.2;
inline constexpr double kMinLinkDistanceM = 10.0;
inline constexpr int kHarqRttTtis = 4;
inline constexpr int kMaxHarqProcesses = 8;
inline constexpr int kAckHistoryLen = 50;
// MBB traffic: Poisson packet arrivals, lognormal packet sizes
// (median 10 kB = 80000 bits).
inline constexpr double kMbbArrivalRatePerTti = 0.02;
inline constexpr double kMbbPacketLogMeanBits = 11.289781913656018;  // ln(80000)
inline constexpr double kMbbPacketLogSigma = 1.0;

// 128.1 + 37.6 log10(d_km); distance floored at kMinLinkDistanceM.
double path_loss_db(double distance_m);
double antenna_gain_db(SiteType t);
// Receiver-hardware quality offset applied to the SINR entering CQI
// quantization: types 0..3 -> {0, -1, -2, +1} dB.
double receiver_type_offset_db(int receiver_type);
double noise_power_dbm(int prbs);
// S/(I+N) combining in dB domain.
double combine_sinr_db(double signal_dbm, const std::vector<double>& interference_dbm,
                       double noise_dbm);

struct HarqProcess {
  bool busy = false;
  int64_t tb_bits = 0;
  int mcs = 0;
  int rank = 1;
  int tx_count = 0;  // 1..5 while busy
  int prbs_used = 0; // per transmission
  int first_tx_tti = -1;
  int pending_feedback_tti = -1;  // -1 when waiting for a retransmission slot
  bool pending_ack = false;       // outcome drawn at transmission time
  bool awaiting_retx = false;     // NACKed, not yet rescheduled
  struct PacketSpan {
    int arrival_tti;
    int64_t bits;
    bool final_bits;  // true when this span completes its packet
  };
  std::vector<PacketSpan> packet_spans;  // MBB accounting
};

// One scheduling decision. Retransmissions carry their own MCS/rank and
// take no action; new transport blocks require one.
struct Grant {
  int cell_id = -1;
  int ue_id = -1;
  bool needs_action = false;
  int harq_pid = -1;  // the retransmitting process when !needs_action
};

struct TtiFeedback {
  int ue_id = -1;
  bool ack = false;
  bool first_tx = false;
  int64_t delivered_bits = 0;
  int prb_ttis_used = 0;  // PRBs of the transmission being acknowledged
  int tti = -1;
};

// Terminal outcome of one transport block: delivered or dropped after
// the transmission cap. Drives reward computation and KPI accounting.
struct TbResolution {
  int ue_id = -1;
  int cell_id = -1;
  bool delivered = false;
  int64_t tb_bits = 0;
  int mcs = 0;
  int rank = 1;
  int tx_count = 0;
  int prbs_per_tx = 0;
  int total_prb_ttis = 0;  // prbs_per_tx * tx_count
  int first_tx_tti = -1;
  int tti = -1;  // resolution TTI
};

struct TtiResult {
  std::vector<TtiFeedback> feedback;
  std::vector<TbResolution> resolutions;
};

struct UeKpi {
  int ue_id = -1;
  double throughput_bps = 0;
  double spectral_efficiency_bps_hz = 0;
  double bler_first_tx = 0;
  double mean_latency_ttis = 0;  // NaN unless MBB with delivered packets
  int64_t delivered_bits = 0;
  int64_t generated_bits = 0;
  int64_t dropped_bits = 0;
};

struct CellKpi {
  int cell_id = -1;
  double throughput_bps = 0;
  double spectral_efficiency_bps_hz = 0;
  double bler_first_tx = 0;
};

struct KpiReport {
  double window_seconds = 0;
  std::vector<UeKpi> ues;
  std::vector<CellKpi> cells;
};

struct Packet {
  int arrival_tti = 0;
  int64_t bits_left = 0;
};

struct UeRuntime {
  UEConfig cfg;
  // Mobility: constant speed, fixed random heading.
  double x_m = 0, y_m = 0, heading_rad = 0;
  double fading_rho = 0;
  std::vector<double> shadow_db;  // per site
  double fading_db = 0;           // serving-link AR(1) state
  // Two strongest non-serving cells at drop time (static neighborhood).
  bool neighbor_present[2] = {false, false};
  SiteType neighbor_type[2] = {SiteType::kMimo, SiteType::kMimo};

  int cqi = 7;
  int cqi_measured_tti = 0;
  int64_t backlog_bits = 0;  // MBB only; FB is infinite
  std::deque<Packet> packet_queue;
  std::array<HarqProcess, kMaxHarqProcesses> harq;
  OllaState olla;

  // First-transmission outcome ring (1 = ACK).
  std::array<int8_t, kAckHistoryLen> ack_history{};
  int ack_history_size = 0;
  int ack_history_head = 0;
  double recent_bler_ewma = 0;
  double interference_activity = 0;  // EWMA of interference-above-noise
  int last_mcs = 0;
  int last_rank = 1;
  double last_reward_bits = 0;
  double last_reward_resource = 0;
  int last_grant_tti = -1000;
  double last_sinr_db = 0;

  // KPI window counters.
  int64_t generated_bits = 0, delivered_bits = 0, dropped_bits = 0;
  int64_t first_tx_acks = 0, first_tx_total = 0;
  int64_t scheduled_ttis = 0;
  double latency_sum_ttis = 0;
  int64_t latency_count = 0;

  // Per-TTI interference power stats (linear mW, Welford).
  int64_t interference_samples = 0;
  double interference_mean_mw = 0;
  double interference_m2 = 0;

  double ack_ratio() const {
    if (ack_history_size == 0) return 1.0;
    int acks = 0;
    for (int i = 0; i < ack_history_size; ++i) acks += ack_history[i];
    return static_cast<double>(acks) / ack_history_size;
  }
  int active_retx_count() const {
    int n = 0;
    for (const auto& h : harq) n += (h.busy && h.tx_count >= 2) ? 1 : 0;
    return n;
  }
};

struct CellRuntime {
  CellConfig cfg;
  int site_id = -1;
  SiteType site_type = SiteType::kMimo;
  double site_x = 0, site_y = 0;
  std::vector<int> attached_ues;  // ascending ue_id
  size_t rr_cursor = 0;
  bool active = false;      // transmitting this TTI
  int scheduled_ue = -1;

  // KPI window counters.
  int64_t delivered_bits = 0;
  int64_t first_tx_acks = 0, first_tx_total = 0;
  int64_t active_ttis = 0;
};

/**
 * TTI-driven downlink simulator for one scenario. Single-threaded; run
 * many instances in parallel workers for throughput.
 *
 * Per-TTI protocol:
 *   grants = sim.prepare_tti(t);   // arrivals, mobility, fading, CQI and
 *                                  // HARQ feedback delivery, scheduling
 *   ... caller picks an Action for every grant with needs_action ...
 *   result = sim.step(t, actions); // transmissions + events resolved at t
 *
 * All randomness is drawn from counter-based streams keyed by
 * (seed, purpose, entity, tti), so runs are reproducible and two policy
 * runs on the same scenario see identical channels, arrivals, and
 * block-error draws (common random numbers).
 */
class Simulator {
 public:
  explicit Simulator(const ScenarioConfig& cfg, std::ostream* trace = nullptr);

  std::vector<Grant> prepare_tti(int tti);
  TtiResult step(int tti, const std::map<int, Action>& actions);

  const ScenarioConfig& config() const { return m_cfg; }
  int num_ues() const { return static_cast<int>(m_ues.size()); }
  int num_cells() const { return static_cast<int>(m_cells.size()); }
  const UeRuntime& ue(int ue_id) const { return m_ues.at(ue_id); }
  const CellRuntime& cell(int cell_id) const { return m_cells.at(cell_id); }

  // Long-term received power (no fast fading): tx power + antenna gain
  // - path loss - penetration - shadowing - inter-sector isolation.
  double link_budget_dbm(int ue_id, int cell_id) const;
  // Serving-link SINR as of the last executed step().
  double current_sinr_db(int ue_id) const { return m_ues.at(ue_id).last_sinr_db; }
  // Sample variance of per-TTI interference power (mW) seen by this UE.
  double interference_variance_mw2(int ue_id) const;

  void reset_kpi_window();
  KpiReport kpi_report() const;  // over the current window

 private:
  double serving_signal_dbm(const UeRuntime& u) const;
  double interference_power_mw(const UeRuntime& u, int tti) const;
  void deliver_feedback(int tti);
  void deliver_cqi_reports(int tti);
  void advance_traffic(int tti);
  void advance_channel(int tti);
  std::vector<Grant> run_scheduler(int tti);
  void execute_grant(const Grant& g, const Action* action, int tti);
  int free_harq_pid(const UeRuntime& u) const;
  bool has_awaiting_retx(const UeRuntime& u) const;

  ScenarioConfig m_cfg;
  uint64_t m_seed;
  std::vector<UeRuntime> m_ues;    // index == ue_id
  std::vector<CellRuntime> m_cells;  // index == cell_id
  std::vector<Grant> m_grants;
  struct CqiReport {
    int deliver_tti;
    int measured_tti;
    int cqi;
  };
  std::vector<std::deque<CqiReport>> m_cqi_in_flight;
  TtiResult m_pending;  // events resolved during prepare, returned by step
  int m_current_tti = -1;
  int m_prepared_tti = -1;
  int m_window_start_tti = 0;
  std::ostream* m_trace = nullptr;
};

}  // namespace ranla
