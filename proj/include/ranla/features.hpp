#pragma once

#include <array>

#include "ranla/scenario.hpp"
#include "ranla/simcore.hpp"

namespace ranla {

// Bumped whenever the feature layout below changes; carried by model
// snapshots and checkpoints so stale policies are rejected loudly.
inline constexpr int kStateSchemaVersion = 1;
inline constexpr int kStateDim = 30;
inline constexpr int kStaticBlockLen = 16;
inline constexpr int kDynamicBlockLen = 14;

using StateVector = std::array<float, kStateDim>;

/**
 * Everything the state builder needs about one UE, decoupled from the
 * simulator so tests can synthesize contexts directly.
 */
struct FeatureContext {
  // Static deployment block.
  SiteType serving_site_type = SiteType::kMimo;
  double bandwidth_mhz = 50;
  double dl_tx_power_w = 50;
  double cell_radius_m = 600;
  bool neighbor_present[2] = {false, false};
  SiteType neighbor_type[2] = {SiteType::kMimo, SiteType::kMimo};
  int ue_num_antennas = 4;
  int receiver_type = 0;

  // Dynamic radio/traffic block.
  int cqi = 7;
  int cqi_age_ttis = 0;
  double pathloss_db = 100;  // serving link, penetration + shadowing included
  double olla_offset_db = 0;
  double ack_ratio = 1.0;          // last 50 first transmissions
  double recent_first_tx_bler = 0; // exponentially weighted
  double buffer_bits = 0;
  int last_mcs = 0;
  int last_rank = 1;
  int active_harq_retx = 0;
  double last_reward_bits = 0;
  double last_reward_resource = 0;  // in [-5, 0]
  double interference_activity = 0;
  int ttis_since_last_grant = 0;
};

/**
 * Fixed 30-element layout: static deployment descriptors first (16),
 * then dynamic link/traffic features (14). All elements are clamped to
 * [-1, 2]; absent neighbors zero-fill their one-hot with presence 0.
 * The full element-by-element layout is documented in
 * docs/state_layout.md.
 */
StateVector build_state(const FeatureContext& ctx);

// Snapshot the context for one UE out of a live simulator.
FeatureContext make_feature_context(const Simulator& sim, int ue_id, int tti);

}  // namespace ranla
