#include "dataio/window_file.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

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

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  put_u32(out, bits);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

float get_f32(const unsigned char* p) {
  std::uint32_t bits = get_u32(p);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void write_window(const std::string& path, const signal::EcgWindow& w) {
  if (w.data.channels <= 0 || w.data.samples <= 0) {
    throw ConfigError("write_window: empty window");
  }
  if (w.data.channels > 0xffff) throw ConfigError("write_window: too many channels");
  std::string buf;
  buf.reserve(16 + w.data.data.size() * 4);
  buf += "CGAW";
  put_u16(buf, kWindowFileVersion);
  put_u16(buf, static_cast<std::uint16_t>(w.data.channels));
  put_u32(buf, static_cast<std::uint32_t>(w.data.samples));
  put_f32(buf, static_cast<float>(w.fs));
  for (double v : w.data.data) put_f32(buf, static_cast<float>(v));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_window: cannot open " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write_window: write failed for " + path);
}

signal::EcgWindow read_window(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_window: cannot open " + path);
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  if (buf.size() < 16) throw IoError("read_window: truncated header in " + path);
  if (std::memcmp(buf.data(), "CGAW", 4) != 0) {
    throw IoError("read_window: bad magic in " + path);
  }
  std::uint16_t version = get_u16(buf.data() + 4);
  if (version != kWindowFileVersion) {
    throw IoError("read_window: unsupported version " + std::to_string(version) +
                  " in " + path);
  }
  std::uint16_t channels = get_u16(buf.data() + 6);
  std::uint32_t samples = get_u32(buf.data() + 8);
  float fs = get_f32(buf.data() + 12);
  std::size_t expect = 16 + static_cast<std::size_t>(channels) * samples * 4;
  if (buf.size() < expect) {
    throw IoError("read_window: truncated payload in " + path + " (" +
                  std::to_string(buf.size()) + " of " + std::to_string(expect) +
                  " bytes)");
  }
  if (buf.size() > expect) {
    throw IoError("read_window: trailing bytes in " + path);
  }
  signal::EcgWindow w;
  w.fs = static_cast<double>(fs);
  w.data = nn::Tensor2(static_cast<int>(channels), static_cast<int>(samples));
  for (std::size_t i = 0; i < w.data.data.size(); ++i) {
    w.data.data[i] = static_cast<double>(get_f32(buf.data() + 16 + i * 4));
  }
  return w;
}

}  // namespace cogadapt::dataio
