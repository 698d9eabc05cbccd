#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ranla/actions.hpp"
#include "ranla/features.hpp"
#include "ranla/preference.hpp"

namespace ranla {

struct WireError : std::runtime_error {
  explicit WireError(const std::string& what) : std::runtime_error(what) {}
};

/** Provenance of one transition, for ingestion accounting and debugging. */
struct TransitionMeta {
  uint64_t scenario_seed = 0;
  int32_t actor_id = 0;
  int32_t cell_id = 0;
  int32_t ue_id = 0;
  int32_t tti = 0;

  bool operator==(const TransitionMeta&) const = default;
};

/**
 * One link adaptation experience. next_mask records which actions were
 * feasible at the successor decision, so target bootstrapping never
 * credits an action the behavior policy could not have taken.
 */
struct Transition {
  StateVector state{};
  int32_t action = 0;
  Eigen::Vector2d reward{0.0, 0.0};
  StateVector next_state{};
  bool done = false;
  PreferenceVector omega_behavior{0.5, 0.5};
  ActionMask next_mask{};
  double priority = 1.0;
  TransitionMeta meta{};
};

/**
 * Actor-to-learner batch framing: a fixed header (magic, codec version,
 * state schema version, record count) followed by length-prefixed records
 * with float32 payload fields. Decoding rejects unknown magic, codec or
 * schema versions, and truncated buffers.
 */
inline constexpr uint32_t kWireMagic = 0x42584C52u;  // "RLXB" little-endian
inline constexpr uint16_t kWireVersion = 1;

std::vector<uint8_t> encode_batch(const std::vector<Transition>& batch);
std::vector<Transition> decode_batch(const std::vector<uint8_t>& buf);

}  // namespace ranla
