#include "ranla/transition.hpp"

#include <cstring>

namespace ranla {

namespace {

constexpr size_t kMaskBytes = (kNumActions + 7) / 8;

// Fields are serialized little-endian regardless of host order.
void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
}

void put_i32(std::vector<uint8_t>& out, int32_t v) { put_u32(out, static_cast<uint32_t>(v)); }

void put_f32(std::vector<uint8_t>& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

struct Reader {
  const std::vector<uint8_t>& buf;
  size_t pos = 0;

  void need(size_t n) const {
    if (pos + n > buf.size()) throw WireError("wire batch truncated");
  }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(buf[pos] | (buf[pos + 1] << 8));
    pos += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf[pos + i]) << (8 * i);
    pos += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[pos + i]) << (8 * i);
    pos += 8;
    return v;
  }
  int32_t i32() { return static_cast<int32_t>(u32()); }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }
  uint8_t u8() {
    need(1);
    return buf[pos++];
  }
};

void encode_record(std::vector<uint8_t>& out, const Transition& t) {
  std::vector<uint8_t> rec;
  rec.reserve(304);
  for (float f : t.state) put_f32(rec, f);
  put_i32(rec, t.action);
  put_f32(rec, static_cast<float>(t.reward[0]));
  put_f32(rec, static_cast<float>(t.reward[1]));
  for (float f : t.next_state) put_f32(rec, f);
  rec.push_back(t.done ? 1 : 0);
  put_f32(rec, static_cast<float>(t.omega_behavior[0]));
  put_f32(rec, static_cast<float>(t.omega_behavior[1]));
  for (size_t byte = 0; byte < kMaskBytes; ++byte) {
    uint8_t b = 0;
    for (int bit = 0; bit < 8; ++bit) {
      int idx = static_cast<int>(byte) * 8 + bit;
      if (idx < kNumActions && t.next_mask.allowed(idx)) b |= static_cast<uint8_t>(1u << bit);
    }
    rec.push_back(b);
  }
  put_f32(rec, static_cast<float>(t.priority));
  put_u64(rec, t.meta.scenario_seed);
  put_i32(rec, t.meta.actor_id);
  put_i32(rec, t.meta.cell_id);
  put_i32(rec, t.meta.ue_id);
  put_i32(rec, t.meta.tti);

  put_u16(out, static_cast<uint16_t>(rec.size()));
  out.insert(out.end(), rec.begin(), rec.end());
}

Transition decode_record(Reader& r) {
  uint16_t len = r.u16();
  size_t end = r.pos + len;
  r.need(len);

  Transition t;
  for (float& f : t.state) f = r.f32();
  t.action = r.i32();
  if (t.action < 0 || t.action >= kNumActions) throw WireError("wire record: action out of range");
  t.reward[0] = r.f32();
  t.reward[1] = r.f32();
  for (float& f : t.next_state) f = r.f32();
  uint8_t done = r.u8();
  if (done > 1) throw WireError("wire record: bad done flag");
  t.done = done == 1;
  t.omega_behavior[0] = r.f32();
  t.omega_behavior[1] = r.f32();
  for (size_t byte = 0; byte < kMaskBytes; ++byte) {
    uint8_t b = r.u8();
    for (int bit = 0; bit < 8; ++bit) {
      int idx = static_cast<int>(byte) * 8 + bit;
      if (idx < kNumActions) t.next_mask.set_allowed(idx, (b >> bit) & 1u);
    }
  }
  t.priority = r.f32();
  t.meta.scenario_seed = r.u64();
  t.meta.actor_id = r.i32();
  t.meta.cell_id = r.i32();
  t.meta.ue_id = r.i32();
  t.meta.tti = r.i32();

  if (r.pos != end) throw WireError("wire record: length prefix mismatch");
  return t;
}

}  // namespace

std::vector<uint8_t> encode_batch(const std::vector<Transition>& batch) {
  std::vector<uint8_t> out;
  out.reserve(12 + batch.size() * 306);
  put_u32(out, kWireMagic);
  put_u16(out, kWireVersion);
  put_u16(out, static_cast<uint16_t>(kStateSchemaVersion));
  put_u32(out, static_cast<uint32_t>(batch.size()));
  for (const Transition& t : batch) encode_record(out, t);
  return out;
}

std::vector<Transition> decode_batch(const std::vector<uint8_t>& buf) {
  Reader r{buf};
  if (r.u32() != kWireMagic) throw WireError("wire batch: bad magic");
  uint16_t version = r.u16();
  if (version != kWireVersion) throw WireError("wire batch: unsupported codec version");
  uint16_t schema = r.u16();
  if (schema != static_cast<uint16_t>(kStateSchemaVersion))
    throw WireError("wire batch: state schema version mismatch");
  uint32_t count = r.u32();
  std::vector<Transition> out;
  out.reserve(count);
  for (uint32_t i = 0; i < count; ++i) out.push_back(decode_record(r));
  if (r.pos != buf.size()) throw WireError("wire batch: trailing bytes");
  return out;
}

}  // namespace ranla
