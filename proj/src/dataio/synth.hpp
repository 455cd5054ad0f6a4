#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "signal/pipeline.hpp"

namespace cogadapt::dataio {

// Synthetic 12-lead ECG with a two-state cognitive-load process. Each
// subject's latent cardiac source is a 3-dimensional dipole built from
// Gaussian P/QRS/T bumps placed at stochastic RR intervals; a 12x3 mixing
// matrix turns it into the clinical leads. Load state alternates every
// label interval and drives both RR variability (suppressed under load)
// and heart rate (raised under load), so the labels are learnable from
// morphology-free statistics and verifiable against generator ground truth.
struct SynthConfig {
  int n_subjects = 20;
  double minutes_per_subject = 10.0;
  double fs = 256.0;
  double base_hr_bpm = 70.0;
  double hr_subject_spread_bpm = 10.0;  // per-subject offset, uniform +-spread/2
  double rr_std_low_ms = 80.0;          // relaxed: high beat-to-beat variability
  double rr_std_high_ms = 20.0;         // loaded: variability clamps down
  double high_load_hr_scale = 1.3;      // loaded: rate goes up
  // 12x3 row-major, rows in canonical lead order. Empty selects the built-in
  // default. Rows for III/aVR/aVL/aVF must be the Einthoven/Goldberger
  // combinations of rows I and II, and the matrix must have full column rank.
  std::vector<double> mixing;
  std::string chest_pick = "V2";
  double label_period_s = 10.0;
  double noise_std = 0.02;  // electrode-referred additive white noise
  std::uint64_t seed = 1;

  void validate() const;
  std::vector<double> resolved_mixing() const;  // default when empty; validated
};

const std::vector<double>& default_mixing();

struct SubjectTruth {
  std::string subject;
  double hr_bpm = 0.0;
  std::vector<int> block_state;      // per label interval: 0 relaxed, 1 loaded
  std::vector<double> beat_times;    // seconds from recording start
  std::vector<double> rr_intervals;  // one per beat, seconds
};

struct SubjectSynth {
  signal::Recording twelve;   // 12 clinical leads, chest leads WCT-referenced
  signal::Recording wearable; // [I, II, chest_pick] with RL reference
  SubjectTruth truth;
};

struct SynthDataset {
  std::vector<signal::Recording> twelve;
  std::vector<signal::Recording> wearable;
  std::vector<SubjectTruth> truth;
  std::vector<double> mixing;  // resolved 12x3 row-major
};

// Pure function of (cfg, subject_index): per-subject substreams make each
// subject's data independent of n_subjects.
SubjectSynth synth_subject(const SynthConfig& cfg, int subject_index);

SynthDataset synth_generate(const SynthConfig& cfg);

}  // namespace cogadapt::dataio
