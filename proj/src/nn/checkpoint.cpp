#include "nn/checkpoint.h"

#include <cstring>
#include <fstream>

namespace midistring::nn {

namespace {

constexpr char kMagic[4] = {'M', 'S', 'C', 'K'};
constexpr uint32_t kVersion = 1;

enum Dtype : uint8_t { kF32 = 0, kF64 = 1, kU64 = 2 };

template <typename T>
std::vector<uint8_t> to_bytes(const std::vector<T>& values) {
  std::vector<uint8_t> out(values.size() * sizeof(T));
  std::memcpy(out.data(), values.data(), out.size());
  return out;
}

template <typename T>
std::vector<T> from_bytes(const std::vector<uint8_t>& bytes) {
  std::vector<T> out(bytes.size() / sizeof(T));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void write_u64(std::ostream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

bool read_u32(std::istream& in, uint32_t& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(v)));
}
bool read_u64(std::istream& in, uint64_t& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(v)));
}

}  // namespace

void Checkpoint::put_f32(const std::string& name, const TensorT<float>& tensor) {
  entries_[name] = Entry{kF32, tensor.shape, to_bytes(tensor.v)};
}

void Checkpoint::put_f64(const std::string& name, const TensorT<double>& tensor) {
  entries_[name] = Entry{kF64, tensor.shape, to_bytes(tensor.v)};
}

void Checkpoint::put_u64(const std::string& name, uint64_t value) {
  entries_[name] = Entry{kU64, {1}, to_bytes(std::vector<uint64_t>{value})};
}

Result<TensorT<float>, std::string> Checkpoint::get_f32(
    const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) return "checkpoint entry missing: " + name;
  if (it->second.dtype != kF32) return "checkpoint entry not f32: " + name;
  return TensorT<float>(it->second.shape, from_bytes<float>(it->second.bytes));
}

Result<TensorT<double>, std::string> Checkpoint::get_f64(
    const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) return "checkpoint entry missing: " + name;
  if (it->second.dtype != kF64) return "checkpoint entry not f64: " + name;
  return TensorT<double>(it->second.shape, from_bytes<double>(it->second.bytes));
}

Result<uint64_t, std::string> Checkpoint::get_u64(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) return "checkpoint entry missing: " + name;
  if (it->second.dtype != kU64) return "checkpoint entry not u64: " + name;
  return from_bytes<uint64_t>(it->second.bytes)[0];
}

std::vector<std::string> Checkpoint::names() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

Result<bool, std::string> Checkpoint::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return "cannot open checkpoint for writing: " + path;
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  write_u32(out, static_cast<uint32_t>(entries_.size()));
  for (const auto& [name, entry] : entries_) {
    write_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    out.put(static_cast<char>(entry.dtype));
    out.put(static_cast<char>(entry.shape.size()));
    for (int d : entry.shape) {
      int32_t dim = d;
      out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    }
    write_u64(out, entry.bytes.size());
    out.write(reinterpret_cast<const char*>(entry.bytes.data()),
              static_cast<std::streamsize>(entry.bytes.size()));
  }
  if (!out) return "checkpoint write failed: " + path;
  return true;
}

Result<Checkpoint, std::string> Checkpoint::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "cannot open checkpoint: " + path;
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    return "not a checkpoint file (bad magic): " + path;
  }
  uint32_t version, count;
  if (!read_u32(in, version) || version != kVersion) {
    return "unsupported checkpoint version in " + path;
  }
  if (!read_u32(in, count)) return "truncated checkpoint: " + path;

  Checkpoint checkpoint;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len;
    if (!read_u32(in, name_len) || name_len > (1u << 20)) {
      return "corrupt entry name in " + path;
    }
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) return "truncated checkpoint: " + path;
    Entry entry;
    int dtype = in.get();
    int rank = in.get();
    if (dtype < 0 || rank < 0) return "truncated checkpoint: " + path;
    entry.dtype = static_cast<uint8_t>(dtype);
    entry.shape.resize(static_cast<size_t>(rank));
    for (int d = 0; d < rank; ++d) {
      int32_t dim;
      if (!in.read(reinterpret_cast<char*>(&dim), sizeof(dim))) {
        return "truncated checkpoint: " + path;
      }
      entry.shape[static_cast<size_t>(d)] = dim;
    }
    uint64_t byte_len;
    if (!read_u64(in, byte_len)) return "truncated checkpoint: " + path;
    entry.bytes.resize(byte_len);
    if (!in.read(reinterpret_cast<char*>(entry.bytes.data()),
                 static_cast<std::streamsize>(byte_len))) {
      return "truncated checkpoint: " + path;
    }
    checkpoint.entries_[name] = std::move(entry);
  }
  return checkpoint;
}

}  // namespace midistring::nn
