#include "dataio/checkpoint.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "common/error.hpp"

namespace cogadapt::dataio {

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

void put_str(std::string& out, const std::string& s) {
  if (s.size() > 0xffff) throw ConfigError("checkpoint: string too long");
  put_u16(out, static_cast<std::uint16_t>(s.size()));
  out += s;
}

class Reader {
 public:
  Reader(const std::string& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("checkpoint: cannot open " + path);
    buf_.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }

  const unsigned char* take(std::size_t n) {
    if (pos_ + n > buf_.size()) {
      throw IoError("checkpoint: truncated file " + path_);
    }
    const unsigned char* p = buf_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::uint16_t u16() {
    const unsigned char* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }

  std::uint32_t u32() {
    const unsigned char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    const unsigned char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  }

  double f64() {
    std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string str() {
    std::uint16_t n = u16();
    const unsigned char* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }

  bool exhausted() const { return pos_ == buf_.size(); }

 private:
  std::string path_;
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
};

CheckpointMeta read_header(Reader& r, const std::string& path) {
  const unsigned char* magic = r.take(4);
  if (std::memcmp(magic, "CGCK", 4) != 0) {
    throw IoError("checkpoint: bad magic in " + path);
  }
  std::uint16_t version = r.u16();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version) +
                  " in " + path);
  }
  CheckpointMeta meta;
  meta.scenario = r.str();
  meta.epoch = static_cast<std::int32_t>(r.u32());
  meta.val_metric = r.f64();
  return meta;
}

}  // namespace

LeafView checkpoint_leaves(const std::vector<nn::ParamRef>& params,
                           const std::vector<nn::BufferRef>& buffers) {
  LeafView v;
  v.reserve(params.size() + buffers.size());
  for (const auto& p : params) v.emplace_back(p.name, p.data);
  for (const auto& b : buffers) v.emplace_back(b.name, b.data);
  return v;
}

LeafSlots checkpoint_slots(const std::vector<nn::ParamRef>& params,
                           const std::vector<nn::BufferRef>& buffers) {
  LeafSlots v;
  v.reserve(params.size() + buffers.size());
  for (const auto& p : params) v.emplace_back(p.name, p.data);
  for (const auto& b : buffers) v.emplace_back(b.name, b.data);
  return v;
}

void write_checkpoint(const std::string& path, const CheckpointMeta& meta,
                      const LeafView& leaves) {
  LeafView sorted = leaves;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i].first == sorted[i - 1].first) {
      throw ConfigError("checkpoint: duplicate leaf " + sorted[i].first);
    }
  }

  std::string buf;
  buf += "CGCK";
  put_u16(buf, kCheckpointVersion);
  put_str(buf, meta.scenario);
  put_u32(buf, static_cast<std::uint32_t>(meta.epoch));
  put_f64(buf, meta.val_metric);
  put_u32(buf, static_cast<std::uint32_t>(sorted.size()));
  for (const auto& [name, vec] : sorted) {
    put_str(buf, name);
    put_u32(buf, static_cast<std::uint32_t>(vec->size()));
    for (double v : *vec) put_f64(buf, v);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("checkpoint: cannot open " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("checkpoint: write failed for " + path);
}

CheckpointMeta read_checkpoint(const std::string& path, const LeafSlots& slots) {
  std::map<std::string, nn::Vec> stored;
  CheckpointMeta meta = read_checkpoint_raw(path, stored);
  if (stored.size() != slots.size()) {
    throw IoError("checkpoint: " + path + " holds " + std::to_string(stored.size()) +
                  " leaves, expected " + std::to_string(slots.size()));
  }
  for (const auto& [name, dest] : slots) {
    auto it = stored.find(name);
    if (it == stored.end()) {
      throw IoError("checkpoint: " + path + " is missing leaf " + name);
    }
    if (it->second.size() != dest->size()) {
      throw IoError("checkpoint: shape mismatch for leaf " + name + " in " + path +
                    " (" + std::to_string(it->second.size()) + " vs " +
                    std::to_string(dest->size()) + ")");
    }
  }
  for (const auto& [name, dest] : slots) *dest = stored.at(name);
  return meta;
}

CheckpointMeta read_checkpoint_raw(const std::string& path,
                                   std::map<std::string, nn::Vec>& leaves) {
  Reader r(path);
  CheckpointMeta meta = read_header(r, path);
  std::uint32_t n = r.u32();
  leaves.clear();
  for (std::uint32_t i = 0; i < n; ++i) {
    std::string name = r.str();
    std::uint32_t count = r.u32();
    nn::Vec v(count);
    for (std::uint32_t k = 0; k < count; ++k) v[k] = r.f64();
    if (!leaves.emplace(std::move(name), std::move(v)).second) {
      throw IoError("checkpoint: duplicate leaf in " + path);
    }
  }
  if (!r.exhausted()) throw IoError("checkpoint: trailing bytes in " + path);
  return meta;
}

}  // namespace cogadapt::dataio
