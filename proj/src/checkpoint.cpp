#include "ranla/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <vector>

namespace ranla {

namespace {

void write_bytes(std::ofstream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void write_pod(std::ofstream& out, T v) {
  write_bytes(out, &v, sizeof(v));
}

template <typename T>
T read_pod(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw CheckpointError("checkpoint truncated");
  return v;
}

void write_vector(std::ofstream& out, const Eigen::VectorXd& v) {
  write_bytes(out, v.data(), static_cast<size_t>(v.size()) * sizeof(double));
}

Eigen::VectorXd read_vector(std::ifstream& in, int64_t n) {
  Eigen::VectorXd v(n);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw CheckpointError("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const int64_t n = ckpt.params.size();
  if (ckpt.adam_m.size() != n || ckpt.adam_v.size() != n)
    throw CheckpointError("save_checkpoint: optimizer state size mismatch");

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("save_checkpoint: cannot open " + path);
  write_pod(out, kCheckpointMagic);
  write_pod(out, kCheckpointVersion);
  write_pod(out, static_cast<uint16_t>(ckpt.state_schema_version));
  write_pod(out, static_cast<int32_t>(ckpt.arch.state_dim));
  write_pod(out, static_cast<int32_t>(ckpt.arch.num_actions));
  write_pod(out, static_cast<int32_t>(ckpt.arch.num_objectives));
  write_pod(out, static_cast<int32_t>(ckpt.arch.hidden));
  write_pod(out, static_cast<uint8_t>(ckpt.rank_control ? 1 : 0));
  write_pod(out, ckpt.learner_steps);
  write_pod(out, ckpt.adam_t);
  write_pod(out, static_cast<int64_t>(n));
  write_vector(out, ckpt.params);
  write_vector(out, ckpt.adam_m);
  write_vector(out, ckpt.adam_v);
  if (!out) throw CheckpointError("save_checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("load_checkpoint: cannot open " + path);
  if (read_pod<uint32_t>(in) != kCheckpointMagic)
    throw CheckpointError("load_checkpoint: bad magic in " + path);
  if (read_pod<uint16_t>(in) != kCheckpointVersion)
    throw CheckpointError("load_checkpoint: unsupported checkpoint version");

  Checkpoint ckpt;
  ckpt.state_schema_version = read_pod<uint16_t>(in);
  ckpt.arch.state_dim = read_pod<int32_t>(in);
  ckpt.arch.num_actions = read_pod<int32_t>(in);
  ckpt.arch.num_objectives = read_pod<int32_t>(in);
  ckpt.arch.hidden = read_pod<int32_t>(in);
  uint8_t rc = read_pod<uint8_t>(in);
  if (rc > 1) throw CheckpointError("load_checkpoint: bad mask regime flag");
  ckpt.rank_control = rc == 1;
  ckpt.learner_steps = read_pod<int64_t>(in);
  ckpt.adam_t = read_pod<int64_t>(in);
  int64_t n = read_pod<int64_t>(in);
  QNetwork probe(ckpt.arch);  // validates dimensions
  if (n != probe.num_params())
    throw CheckpointError("load_checkpoint: parameter count does not match architecture");
  ckpt.params = read_vector(in, n);
  ckpt.adam_m = read_vector(in, n);
  ckpt.adam_v = read_vector(in, n);
  char extra;
  if (in.read(&extra, 1)) throw CheckpointError("load_checkpoint: trailing bytes in " + path);
  return ckpt;
}

QNetwork network_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.state_schema_version != kStateSchemaVersion)
    throw CheckpointError("checkpoint state schema " + std::to_string(ckpt.state_schema_version) +
                          " does not match runtime schema " + std::to_string(kStateSchemaVersion));
  QNetwork net(ckpt.arch);
  if (ckpt.params.size() != net.num_params())
    throw CheckpointError("checkpoint holds " + std::to_string(ckpt.params.size()) +
                          " parameters but the architecture needs " +
                          std::to_string(net.num_params()));
  net.params() = ckpt.params;
  return net;
}

}  // namespace ranla
