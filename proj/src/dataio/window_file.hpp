#pragma once

#include <string>

#include "signal/pipeline.hpp"

namespace cogadapt::dataio {

// Single-window binary format, little-endian throughout:
//   magic "CGAW" | version u16 | n_channels u16 | n_samples u32 | fs f32
//   | payload: n_channels * n_samples f32, channel-major
// Values are stored at f32 precision; file-to-file round trips are
// byte-exact.
inline constexpr std::uint16_t kWindowFileVersion = 1;

void write_window(const std::string& path, const signal::EcgWindow& w);

// Subject, start time, and label live in the manifest, not the file; the
// returned window carries only payload and rate. Bad magic, unknown version,
// and truncation are reported as distinct errors.
signal::EcgWindow read_window(const std::string& path);

}  // namespace cogadapt::dataio
