#pragma once

#include <cstdint>

#include "ranla/mcs_table.hpp"

namespace ranla {

inline constexpr int kNumObjectives = 2;

/**
 * Two-objective reward emitted once per transport block, at HARQ
 * resolution (ACK, or drop after the transmission cap):
 *
 *   bits      delivered_bits / tbs(max mcs, max rank, cell prbs),
 *             i.e. throughput normalized by the cell's peak TB — 0 on drop;
 *   resource  -(prbs used summed over all transmissions) / cell prbs,
 *             always negative, one cell-TTI of PRBs costs -1 per tx.
 */
struct Reward {
  double bits = 0.0;
  double resource = 0.0;
};

inline int64_t max_transport_block_size(int cell_prbs) {
  return transport_block_size(kNumMcs - 1, kMaxRank, cell_prbs);
}

inline Reward make_reward(bool delivered, int64_t tb_bits, int prbs_per_tx,
                          int tx_count, int cell_prbs) {
  Reward r;
  r.bits = delivered
               ? static_cast<double>(tb_bits) /
                     static_cast<double>(max_transport_block_size(cell_prbs))
               : 0.0;
  r.resource = -static_cast<double>(prbs_per_tx) * tx_count /
               static_cast<double>(cell_prbs);
  return r;
}

}  // namespace ranla
