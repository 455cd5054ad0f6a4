#pragma once

#include <string>

#include "signal/pipeline.hpp"

namespace cogadapt::dataio {

// Recording CSV schema:
//   # subject=S01          (optional metadata comments before the header)
//   # fs=500
//   # chest_reference=RL
//   # label_period=10
//   timestamp_s,I,II,V2,label
//   0.000,0.12,0.30,-0.05,2
//   0.002,0.11,0.29,-0.04,
// Every non-comment column except timestamp_s and the optional trailing
// label column is a lead. Label cells are sparse: a value marks the label
// interval containing that row's timestamp. Missing samples are empty cells
// (parsed as NaN for the cleaning stage). Errors carry the file line number.
signal::Recording ingest_csv(const std::string& path);

// Inverse of ingest_csv up to f32 payload formatting: lead samples are
// written through format_f32, timestamps through format_f64.
void emit_csv(const signal::Recording& rec, const std::string& path);

}  // namespace cogadapt::dataio
