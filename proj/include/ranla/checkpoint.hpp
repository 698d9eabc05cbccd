#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "ranla/features.hpp"
#include "ranla/qnet.hpp"

namespace ranla {

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

/**
 * Everything needed to resume or deploy a trained policy: architecture,
 * flat parameters, Adam state, and the state schema / mask regime the
 * network was trained under.
 */
struct Checkpoint {
  QNetConfig arch;
  Eigen::VectorXd params;
  Eigen::VectorXd adam_m;
  Eigen::VectorXd adam_v;
  int64_t adam_t = 0;
  int64_t learner_steps = 0;
  bool rank_control = true;
  int state_schema_version = kStateSchemaVersion;
};

inline constexpr uint32_t kCheckpointMagic = 0x4B434C52u;  // "RLCK" little-endian
inline constexpr uint16_t kCheckpointVersion = 1;

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Rebuilds a network from a checkpoint, refusing schema mismatches.
QNetwork network_from_checkpoint(const Checkpoint& ckpt);

}  // namespace ranla
