#pragma once

#include <bitset>
#include <cstdint>
#include <stdexcept>

#include "ranla/mcs_table.hpp"

namespace ranla {

/**
 * Flat action space over (mcs, rank): index = mcs * 4 + (rank - 1).
 * 28 MCS x 4 ranks = 112 actions.
 */
inline constexpr int kNumActions = kNumMcs * kMaxRank;

struct Action {
  int mcs = 0;   // 0..27
  int rank = 1;  // 1..4
};

inline int action_index(const Action& a) {
  if (!valid_mcs(a.mcs)) throw std::invalid_argument("action_index: mcs out of range");
  if (a.rank < 1 || a.rank > kMaxRank) throw std::invalid_argument("action_index: rank out of range");
  return a.mcs * kMaxRank + (a.rank - 1);
}

inline Action action_from_index(int idx) {
  if (idx < 0 || idx >= kNumActions) throw std::invalid_argument("action_from_index: index out of range");
  return Action{idx / kMaxRank, idx % kMaxRank + 1};
}

/**
 * Per-action feasibility mask; allowed[i] == true means action i may be
 * selected. Greedy selection and target bootstrapping both restrict their
 * argmax to allowed actions.
 */
struct ActionMask {
  std::bitset<kNumActions> bits{};

  bool allowed(int idx) const { return bits.test(static_cast<size_t>(idx)); }
  void set_allowed(int idx, bool ok = true) { bits.set(static_cast<size_t>(idx), ok); }
  int count_allowed() const { return static_cast<int>(bits.count()); }
  bool operator==(const ActionMask& o) const { return bits == o.bits; }
};

/**
 * Mask for a UE whose hardware supports ranks 1..max_rank.
 *
 * With rank control enabled the agent may pick any rank up to max_rank;
 * with it disabled the rank is pinned to the UE-reported value and only
 * the 28 MCS choices remain.
 */
inline ActionMask make_action_mask(bool rank_control, int max_rank, int reported_rank) {
  if (max_rank < 1 || max_rank > kMaxRank) throw std::invalid_argument("make_action_mask: max_rank out of range");
  if (reported_rank < 1 || reported_rank > max_rank)
    throw std::invalid_argument("make_action_mask: reported_rank out of range");
  ActionMask m;
  for (int mcs = 0; mcs < kNumMcs; ++mcs) {
    for (int rank = 1; rank <= kMaxRank; ++rank) {
      bool ok = rank_control ? rank <= max_rank : rank == reported_rank;
      m.set_allowed(mcs * kMaxRank + (rank - 1), ok);
    }
  }
  return m;
}

}  // namespace ranla
