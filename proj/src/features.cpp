#include "ranla/features.hpp"

#include <algorithm>
#include <cmath>

namespace ranla {

StateVector build_state(const FeatureContext& ctx) {
  StateVector v{};
  int i = 0;
  auto put = [&v, &i](double x) { v[i++] = static_cast<float>(std::clamp(x, -1.0, 2.0)); };

  // Static block (16).
  put(ctx.serving_site_type == SiteType::kMimo ? 1.0 : 0.0);
  put(ctx.serving_site_type == SiteType::kMassiveMimo ? 1.0 : 0.0);
  put(ctx.bandwidth_mhz / 100.0);
  put(ctx.dl_tx_power_w / 100.0);
  put(ctx.cell_radius_m / 1200.0);
  for (int n = 0; n < 2; ++n) {
    put(ctx.neighbor_present[n] ? 1.0 : 0.0);
    put(ctx.neighbor_present[n] && ctx.neighbor_type[n] == SiteType::kMimo ? 1.0 : 0.0);
    put(ctx.neighbor_present[n] && ctx.neighbor_type[n] == SiteType::kMassiveMimo ? 1.0 : 0.0);
  }
  put(ctx.ue_num_antennas / 4.0);
  for (int t = 0; t < 4; ++t) put(ctx.receiver_type == t ? 1.0 : 0.0);

  // Dynamic block (14).
  put(ctx.cqi / 15.0);
  put(ctx.cqi_age_ttis / 10.0);
  put((ctx.pathloss_db - 60.0) / 80.0);
  put(ctx.olla_offset_db / 10.0);
  put(ctx.ack_ratio);
  put(ctx.recent_first_tx_bler);
  put(std::log10(ctx.buffer_bits + 1.0) / 8.0);
  put(ctx.last_mcs / 27.0);
  put(ctx.last_rank / 4.0);
  put(ctx.active_harq_retx / 4.0);
  put(ctx.last_reward_bits);
  put(ctx.last_reward_resource / static_cast<double>(kMaxHarqTx));
  put(ctx.interference_activity);
  put(ctx.ttis_since_last_grant / 100.0);

  return v;
}

FeatureContext make_feature_context(const Simulator& sim, int ue_id, int tti) {
  const UeRuntime& u = sim.ue(ue_id);
  const CellRuntime& cell = sim.cell(u.cfg.serving_cell_id);

  FeatureContext ctx;
  ctx.serving_site_type = cell.site_type;
  ctx.bandwidth_mhz = cell.cfg.bandwidth_mhz;
  ctx.dl_tx_power_w = cell.cfg.dl_tx_power_w;
  ctx.cell_radius_m = cell.cfg.cell_radius_m;
  for (int n = 0; n < 2; ++n) {
    ctx.neighbor_present[n] = u.neighbor_present[n];
    ctx.neighbor_type[n] = u.neighbor_type[n];
  }
  ctx.ue_num_antennas = u.cfg.num_antennas;
  ctx.receiver_type = u.cfg.receiver_type;

  ctx.cqi = u.cqi;
  ctx.cqi_age_ttis = std::max(0, tti - u.cqi_measured_tti);
  // Long-term serving-link loss: tx power + antenna gain - received power.
  double budget = sim.link_budget_dbm(ue_id, u.cfg.serving_cell_id);
  double tx_dbm = 10.0 * std::log10(cell.cfg.dl_tx_power_w * 1000.0);
  ctx.pathloss_db = tx_dbm + antenna_gain_db(cell.site_type) - budget;
  ctx.olla_offset_db = u.olla.offset_db();
  ctx.ack_ratio = u.ack_ratio();
  ctx.recent_first_tx_bler = u.recent_bler_ewma;
  ctx.buffer_bits = u.cfg.traffic == TrafficType::kFullBuffer
                        ? 1e16
                        : static_cast<double>(u.backlog_bits);
  ctx.last_mcs = u.last_mcs;
  ctx.last_rank = u.last_rank;
  ctx.active_harq_retx = u.active_retx_count();
  ctx.last_reward_bits = u.last_reward_bits;
  ctx.last_reward_resource = u.last_reward_resource;
  ctx.interference_activity = u.interference_activity;
  ctx.ttis_since_last_grant = std::min(1000, tti - u.last_grant_tti);
  return ctx;
}

}  // namespace ranla
