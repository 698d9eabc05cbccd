#pragma once

#include <algorithm>
#include <cmath>

#include "ranla/mcs_table.hpp"

namespace ranla {

// 4-bit wideband CQI reporting.
inline constexpr int kCqiMax = 15;
inline constexpr int kCqiPeriodTtis = 5;
inline constexpr int kCqiDelayTtis = 5;
inline constexpr double kCqiStepDb = 2.0;
inline constexpr double kCqiFloorDb = -8.0;  // cqi 0 maps to sinr <= -7 dB

inline int quantize_cqi(double sinr_db) {
  int q = static_cast<int>(std::lround((sinr_db - kCqiFloorDb) / kCqiStepDb));
  return std::clamp(q, 0, kCqiMax);
}

// Midpoint of the reported CQI bin, the receiver-side SINR estimate.
inline double cqi_to_sinr_db(int cqi) {
  return kCqiFloorDb + kCqiStepDb * std::clamp(cqi, 0, kCqiMax);
}

/**
 * Outer-loop link adaptation: a per-UE SINR offset nudged on every
 * first-transmission ACK/NACK so that the realized BLER converges to the
 * target. NACKs push the offset down by delta_down, ACKs push it up by
 * delta_up, with delta_down/delta_up = (1 - target)/target; the fixed
 * point of the drift is BLER = target.
 */
class OllaState {
 public:
  explicit OllaState(double target_bler = 0.1, double delta_up_db = 0.01)
      : m_target(target_bler), m_up(delta_up_db),
        m_down(delta_up_db * (1.0 - target_bler) / target_bler) {}

  // First-transmission outcome only; retransmissions do not drive the loop.
  void on_first_tx(bool ack) {
    m_offset += ack ? m_up : -m_down;
    m_offset = std::clamp(m_offset, -kOffsetClampDb, kOffsetClampDb);
  }

  double offset_db() const { return m_offset; }
  double target_bler() const { return m_target; }

  static constexpr double kOffsetClampDb = 10.0;

 private:
  double m_target;
  double m_up;
  double m_down;
  double m_offset = 0.0;
};

/**
 * Baseline MCS choice: highest MCS whose decoding threshold is at or
 * below the offset-adjusted CQI SINR estimate. Falls back to MCS 0 when
 * even the lowest threshold is above the estimate.
 */
inline int olla_select_mcs(int cqi, double offset_db) {
  double est = cqi_to_sinr_db(cqi) + offset_db;
  int best = 0;
  for (int mcs = 0; mcs < kNumMcs; ++mcs) {
    if (kMcsSinrThresholdDb[mcs] <= est) best = mcs;
  }
  return best;
}

}  // namespace ranla
