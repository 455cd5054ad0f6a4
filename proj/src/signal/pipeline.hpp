#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "common/rng.hpp"
#include "nn/tensor.hpp"

namespace cogadapt::signal {

using nn::Tensor2;
using nn::Vec;

// A multi-lead recording with explicit per-sample timestamps. Gaps in the
// timeline (dropped rows, acquisition dropouts) show up as timestamp jumps
// larger than 1.5x the nominal period; downstream stages never bridge them.
struct Recording {
  std::string subject;
  double fs = 0.0;
  std::vector<std::string> lead_names;
  std::vector<Vec> leads;
  Vec timestamps;
  double label_period = 10.0;
  std::vector<std::pair<long long, int>> label_stream;  // (interval index, raw 1..9)
  std::string chest_reference;  // "RL" or "WCT" when a chest lead is present

  double t0() const { return timestamps.empty() ? 0.0 : timestamps.front(); }
  std::size_t n_samples() const { return timestamps.size(); }
  void validate() const;
};

struct EcgWindow {
  std::string subject;
  double fs = 0.0;
  double t_start = 0.0;
  std::optional<int> label;  // binary, assigned later
  Tensor2 data;              // leads x samples
};

struct WindowingConfig {
  double window_seconds = 5.0;
  double train_stride_seconds = 2.5;
  double eval_stride_seconds = 5.0;
  double target_fs = 500.0;
  double band_lo_hz = 0.5;
  double band_hi_hz = 40.0;
  int filter_order = 4;
  double label_period_seconds = 10.0;
  double normalize_eps = 1e-8;
};

struct AugmentConfig {
  double apply_prob = 0.5;
  double jitter_alpha = 0.1;
  double noise_sigma = 0.02;
  int max_shift = 50;
};

// Index ranges [begin, end) of gap-free runs.
std::vector<std::pair<std::size_t, std::size_t>> contiguous_runs(const Recording& rec);

// Polyphase FIR rate conversion per contiguous run; timestamps regenerated
// uniformly from each run's start.
Recording resample(const Recording& rec, double target_fs);

// Zero-phase Butterworth band-pass per contiguous run.
Recording bandpass(const Recording& rec, double lo_hz, double hi_hz, int order);

// Missing-data policy: rows missing every lead are dropped (leaving a gap),
// isolated missing samples become 0, and any lead that is flat across a
// window-sized block is zeroed for that block.
Recording clean(const Recording& rec, double window_seconds);

// Applies the Wilson-central-terminal shift to the chest lead of a 3-lead
// recording ordered [I, II, chest]; requires chest_reference == "RL".
Recording wct_rereference_recording(const Recording& rec);

// Fixed-grid segmentation: candidate starts are t0 + k*stride; a window is
// kept only if w*fs consecutive samples exist inside one contiguous run.
std::vector<EcgWindow> segment(const Recording& rec, double window_seconds,
                               double stride_seconds);

int binarize_label(int raw);  // 1..4 -> 0, 5..9 -> 1

// Label of the interval containing the window midpoint, binarized. Empty
// when the midpoint falls outside the labeled span (callers count those).
std::optional<int> assign_label(const Recording& rec, double t_start,
                                double window_seconds);

struct LabelStats {
  std::size_t assigned = 0;
  std::size_t discarded = 0;
  std::size_t per_class[2] = {0, 0};
};

// Convenience: segment + label assignment, dropping unlabeled windows.
std::vector<EcgWindow> segment_labeled(const Recording& rec, double window_seconds,
                                       double stride_seconds, LabelStats* stats);

// Per-lead z-score within the window: (x - mean) / (std + eps).
void normalize_window(EcgWindow& w, double eps = 1e-8);

// Training-time stochastic transforms, each applied independently with
// probability cfg.apply_prob, in order: per-lead amplitude jitter, additive
// gaussian noise, circular time shift. Draws are consumed only for the
// transforms that fire, so a window's stream is reproducible from its seed.
void augment(EcgWindow& w, const AugmentConfig& cfg, Rng& rng);

}  // namespace cogadapt::signal
