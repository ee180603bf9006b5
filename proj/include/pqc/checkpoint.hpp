#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pqc/tensor.hpp"

// Checkpoint container. Little-endian binary layout:
//   magic "PQCK", version u16, entry count u16, then per entry:
//     name length u16 + UTF-8 name
//     rank u32 + extents u32 each
//     raw float32 values
//     has_mask u8; if 1: filter-mask bitset, one bit per output filter
//     (bit set = kept), LSB first, padded to whole bytes.

namespace pqc {

struct CheckpointEntry {
  std::string name;
  Tensor tensor;
  bool has_mask = false;
  std::vector<uint8_t> mask;  // per output filter, 1 = kept
};

struct Checkpoint {
  std::vector<CheckpointEntry> entries;

  const CheckpointEntry* find(const std::string& name) const {
    for (const auto& e : entries) {
      if (e.name == name) return &e;
    }
    return nullptr;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.name);
    return out;
  }
};

namespace detail {

inline void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

struct Reader {
  const uint8_t* p;
  const uint8_t* end;

  void need(size_t n, const char* what) const {
    if (static_cast<size_t>(end - p) < n) {
      throw std::runtime_error(std::string("checkpoint: truncated while reading ") + what);
    }
  }
  uint16_t u16(const char* what) {
    need(2, what);
    uint16_t v = static_cast<uint16_t>(p[0] | (p[1] << 8));
    p += 2;
    return v;
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    p += 4;
    return v;
  }
  uint8_t u8(const char* what) {
    need(1, what);
    return *p++;
  }
};

}  // namespace detail

inline constexpr uint16_t kCheckpointVersion = 1;

inline std::string serialize_checkpoint(const Checkpoint& ck) {
  std::string out;
  out += "PQCK";
  detail::put_u16(out, kCheckpointVersion);
  if (ck.entries.size() > 0xffff) throw std::invalid_argument("checkpoint: too many entries");
  detail::put_u16(out, static_cast<uint16_t>(ck.entries.size()));
  for (const auto& e : ck.entries) {
    if (e.name.size() > 0xffff) throw std::invalid_argument("checkpoint: name too long");
    detail::put_u16(out, static_cast<uint16_t>(e.name.size()));
    out += e.name;
    detail::put_u32(out, static_cast<uint32_t>(e.tensor.rank()));
    for (int64_t d : e.tensor.shape) detail::put_u32(out, static_cast<uint32_t>(d));
    static_assert(sizeof(float) == 4);
    const size_t byte_count = e.tensor.data.size() * 4;
    const size_t at = out.size();
    out.resize(at + byte_count);
    std::memcpy(out.data() + at, e.tensor.data.data(), byte_count);
    out.push_back(e.has_mask ? 1 : 0);
    if (e.has_mask) {
      const size_t filters = e.mask.size();
      std::vector<uint8_t> packed((filters + 7) / 8, 0);
      for (size_t f = 0; f < filters; ++f) {
        if (e.mask[f]) packed[f / 8] |= static_cast<uint8_t>(1u << (f % 8));
      }
      out.append(reinterpret_cast<const char*>(packed.data()), packed.size());
    }
  }
  return out;
}

inline Checkpoint deserialize_checkpoint(const std::string& bytes) {
  detail::Reader r{reinterpret_cast<const uint8_t*>(bytes.data()),
                   reinterpret_cast<const uint8_t*>(bytes.data()) + bytes.size()};
  r.need(4, "magic");
  if (std::memcmp(r.p, "PQCK", 4) != 0) throw std::runtime_error("checkpoint: bad magic bytes");
  r.p += 4;
  const uint16_t version = r.u16("version");
  if (version != kCheckpointVersion) {
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  }
  const uint16_t count = r.u16("entry count");
  Checkpoint ck;
  for (uint16_t i = 0; i < count; ++i) {
    CheckpointEntry e;
    const uint16_t name_len = r.u16("name length");
    r.need(name_len, "name");
    e.name.assign(reinterpret_cast<const char*>(r.p), name_len);
    r.p += name_len;
    const uint32_t rank = r.u32("rank");
    if (rank > 8) throw std::runtime_error("checkpoint: implausible tensor rank");
    Shape shape;
    for (uint32_t d = 0; d < rank; ++d) shape.push_back(r.u32("extent"));
    const int64_t numel = rank == 0 ? 0 : shape_numel(shape);
    const size_t byte_count = static_cast<size_t>(numel) * 4;
    r.need(byte_count, "tensor data");
    e.tensor.shape = shape;
    e.tensor.data.resize(static_cast<size_t>(numel));
    std::memcpy(e.tensor.data.data(), r.p, byte_count);
    r.p += byte_count;
    const uint8_t has_mask = r.u8("mask flag");
    if (has_mask > 1) throw std::runtime_error("checkpoint: bad mask flag");
    e.has_mask = has_mask == 1;
    if (e.has_mask) {
      if (e.tensor.rank() < 1) throw std::runtime_error("checkpoint: mask on a rank-0 tensor");
      const size_t filters = static_cast<size_t>(e.tensor.shape[0]);
      const size_t packed_len = (filters + 7) / 8;
      r.need(packed_len, "mask bitset");
      e.mask.resize(filters);
      for (size_t f = 0; f < filters; ++f) {
        e.mask[f] = (r.p[f / 8] >> (f % 8)) & 1u;
      }
      r.p += packed_len;
    }
    ck.entries.push_back(std::move(e));
  }
  if (r.p != r.end) throw std::runtime_error("checkpoint: trailing bytes after last entry");
  return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  const std::string bytes = serialize_checkpoint(ck);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace pqc
