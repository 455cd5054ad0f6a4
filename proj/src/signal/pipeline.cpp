#include "signal/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "signal/dsp.hpp"

namespace cogadapt::signal {

namespace {
constexpr double kTimeEps = 1e-9;
}

void Recording::validate() const {
  if (fs <= 0.0) throw RuntimeError("recording: non-positive sampling rate");
  if (leads.empty()) throw RuntimeError("recording: no leads");
  if (lead_names.size() != leads.size()) {
    throw RuntimeError("recording: lead name/series count mismatch");
  }
  for (const Vec& l : leads) {
    if (l.size() != timestamps.size()) {
      throw RuntimeError("recording: lead length differs from timestamp count");
    }
  }
  for (std::size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw RuntimeError("recording: timestamps not strictly increasing");
    }
  }
}

std::vector<std::pair<std::size_t, std::size_t>> contiguous_runs(const Recording& rec) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t n = rec.n_samples();
  if (n == 0) return runs;
  double gap = 1.5 / rec.fs;
  std::size_t begin = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (rec.timestamps[i] - rec.timestamps[i - 1] > gap) {
      runs.emplace_back(begin, i);
      begin = i;
    }
  }
  runs.emplace_back(begin, n);
  return runs;
}

Recording resample(const Recording& rec, double target_fs) {
  rec.validate();
  if (target_fs <= 0.0) throw ConfigError("resample: target rate must be positive");

  Recording out;
  out.subject = rec.subject;
  out.fs = target_fs;
  out.lead_names = rec.lead_names;
  out.label_period = rec.label_period;
  out.label_stream = rec.label_stream;
  out.chest_reference = rec.chest_reference;
  out.leads.assign(rec.leads.size(), {});

  for (auto [b, e] : contiguous_runs(rec)) {
    std::size_t run_len = e - b;
    double run_t0 = rec.timestamps[b];
    std::size_t n_out = 0;
    for (std::size_t li = 0; li < rec.leads.size(); ++li) {
      Vec piece(rec.leads[li].begin() + b, rec.leads[li].begin() + e);
      Vec res = resample_series(piece, rec.fs, target_fs);
      n_out = res.size();
      out.leads[li].insert(out.leads[li].end(), res.begin(), res.end());
    }
    (void)run_len;
    for (std::size_t k = 0; k < n_out; ++k) {
      out.timestamps.push_back(run_t0 + static_cast<double>(k) / target_fs);
    }
  }
  out.validate();
  return out;
}

Recording bandpass(const Recording& rec, double lo_hz, double hi_hz, int order) {
  rec.validate();
  auto sections = design_butter_bandpass(order, lo_hz, hi_hz, rec.fs);
  int padlen = 3 * (order + 1);

  Recording out = rec;
  for (auto [b, e] : contiguous_runs(rec)) {
    for (std::size_t li = 0; li < rec.leads.size(); ++li) {
      Vec piece(rec.leads[li].begin() + b, rec.leads[li].begin() + e);
      Vec filtered = filtfilt(sections, piece, padlen);
      std::copy(filtered.begin(), filtered.end(), out.leads[li].begin() + b);
    }
  }
  return out;
}

Recording clean(const Recording& rec, double window_seconds) {
  rec.validate();
  std::size_t n = rec.n_samples();
  std::size_t n_leads = rec.leads.size();

  Recording out;
  out.subject = rec.subject;
  out.fs = rec.fs;
  out.lead_names = rec.lead_names;
  out.label_period = rec.label_period;
  out.label_stream = rec.label_stream;
  out.chest_reference = rec.chest_reference;
  out.leads.assign(n_leads, {});

  for (std::size_t i = 0; i < n; ++i) {
    bool all_missing = true;
    for (std::size_t li = 0; li < n_leads; ++li) {
      if (!std::isnan(rec.leads[li][i])) {
        all_missing = false;
        break;
      }
    }
    if (all_missing) continue;  // drop the row; the timestamp gap records it
    out.timestamps.push_back(rec.timestamps[i]);
    for (std::size_t li = 0; li < n_leads; ++li) {
      double v = rec.leads[li][i];
      out.leads[li].push_back(std::isnan(v) ? 0.0 : v);
    }
  }
  if (out.timestamps.empty()) throw RuntimeError("clean: recording empty after cleanup");

  // Flat-line suppression on window-sized blocks inside each contiguous run.
  std::size_t block = static_cast<std::size_t>(std::llround(window_seconds * out.fs));
  if (block >= 2) {
    for (auto [b, e] : contiguous_runs(out)) {
      for (std::size_t s = b; s < e; s += block) {
        std::size_t stop = std::min(s + block, e);
        if (stop - s < 2) continue;
        for (std::size_t li = 0; li < n_leads; ++li) {
          auto first = out.leads[li].begin() + s;
          auto last = out.leads[li].begin() + stop;
          auto [mn, mx] = std::minmax_element(first, last);
          if (*mn == *mx) std::fill(first, last, 0.0);
        }
      }
    }
  }
  return out;
}

Recording wct_rereference_recording(const Recording& rec) {
  rec.validate();
  if (rec.leads.size() != 3) {
    throw RuntimeError("wct_rereference: expected a 3-lead recording [I, II, chest]");
  }
  if (rec.chest_reference != "RL") {
    throw RuntimeError("wct_rereference: chest lead is not RL-referenced");
  }
  Recording out = rec;
  for (std::size_t t = 0; t < rec.n_samples(); ++t) {
    out.leads[2][t] = rec.leads[2][t] + (rec.leads[0][t] + rec.leads[1][t]) / 3.0;
  }
  out.chest_reference = "WCT";
  return out;
}

std::vector<EcgWindow> segment(const Recording& rec, double window_seconds,
                               double stride_seconds) {
  rec.validate();
  if (window_seconds <= 0.0 || stride_seconds <= 0.0) {
    throw ConfigError("segment: window and stride must be positive");
  }
  std::vector<EcgWindow> out;
  std::size_t n_samp = static_cast<std::size_t>(std::llround(window_seconds * rec.fs));
  if (n_samp == 0 || rec.n_samples() < n_samp) return out;

  auto runs = contiguous_runs(rec);
  double t_begin = rec.t0();
  double t_end = rec.timestamps.back() + 1.0 / rec.fs;  // exclusive
  double half_period = 0.5 / rec.fs;

  for (long long k = 0;; ++k) {
    double ts = t_begin + static_cast<double>(k) * stride_seconds;
    if (ts + window_seconds > t_end + kTimeEps) break;

    for (auto [b, e] : runs) {
      double run_t0 = rec.timestamps[b];
      if (ts < run_t0 - half_period) break;  // runs are ordered; start lies in a gap
      long long off = std::llround((ts - run_t0) * rec.fs);
      if (off < 0) continue;
      std::size_t idx = b + static_cast<std::size_t>(off);
      if (idx + n_samp > e) continue;
      if (std::abs(rec.timestamps[idx] - ts) > half_period + kTimeEps) continue;

      EcgWindow w;
      w.subject = rec.subject;
      w.fs = rec.fs;
      w.t_start = ts;
      w.data = Tensor2(static_cast<int>(rec.leads.size()), static_cast<int>(n_samp));
      for (std::size_t li = 0; li < rec.leads.size(); ++li) {
        const double* src = rec.leads[li].data() + idx;
        std::copy(src, src + n_samp, w.data.row(static_cast<int>(li)));
      }
      out.push_back(std::move(w));
      break;
    }
  }
  return out;
}

int binarize_label(int raw) {
  if (raw >= 1 && raw <= 4) return 0;
  if (raw >= 5 && raw <= 9) return 1;
  throw RuntimeError("binarize_label: raw label " + std::to_string(raw) +
                     " outside 1..9");
}

std::optional<int> assign_label(const Recording& rec, double t_start,
                                double window_seconds) {
  if (rec.label_stream.empty()) return std::nullopt;
  if (rec.label_period <= 0.0) throw ConfigError("assign_label: non-positive label period");
  double mid = t_start - rec.t0() + window_seconds / 2.0;
  long long idx = static_cast<long long>(std::floor(mid / rec.label_period));
  for (const auto& [interval, raw] : rec.label_stream) {
    if (interval == idx) return binarize_label(raw);
  }
  return std::nullopt;  // midpoint past the labeled span, or a hole in it
}

std::vector<EcgWindow> segment_labeled(const Recording& rec, double window_seconds,
                                       double stride_seconds, LabelStats* stats) {
  std::vector<EcgWindow> windows = segment(rec, window_seconds, stride_seconds);
  std::vector<EcgWindow> kept;
  kept.reserve(windows.size());
  for (EcgWindow& w : windows) {
    std::optional<int> label = assign_label(rec, w.t_start, window_seconds);
    if (!label) {
      if (stats) stats->discarded += 1;
      continue;
    }
    w.label = label;
    if (stats) {
      stats->assigned += 1;
      stats->per_class[*label] += 1;
    }
    kept.push_back(std::move(w));
  }
  return kept;
}

void normalize_window(EcgWindow& w, double eps) {
  if (eps <= 0.0) throw ConfigError("normalize_window: eps must be positive");
  int t_n = w.data.samples;
  if (t_n == 0) throw DimensionError("normalize_window: empty window");
  for (int c = 0; c < w.data.channels; ++c) {
    double* x = w.data.row(c);
    double mean = 0.0;
    for (int t = 0; t < t_n; ++t) mean += x[t];
    mean /= t_n;
    double var = 0.0;
    for (int t = 0; t < t_n; ++t) {
      double d = x[t] - mean;
      var += d * d;
    }
    var /= t_n;
    double denom = std::sqrt(var) + eps;
    for (int t = 0; t < t_n; ++t) x[t] = (x[t] - mean) / denom;
  }
}

void augment(EcgWindow& w, const AugmentConfig& cfg, Rng& rng) {
  int t_n = w.data.samples;
  if (t_n == 0) return;

  if (rng.bernoulli(cfg.apply_prob)) {
    for (int c = 0; c < w.data.channels; ++c) {
      double scale = 1.0 + cfg.jitter_alpha * rng.gaussian();
      double* x = w.data.row(c);
      for (int t = 0; t < t_n; ++t) x[t] *= scale;
    }
  }
  if (rng.bernoulli(cfg.apply_prob)) {
    for (double& v : w.data.data) v += cfg.noise_sigma * rng.gaussian();
  }
  if (rng.bernoulli(cfg.apply_prob)) {
    long long delta = rng.uniform_int(-cfg.max_shift, cfg.max_shift);
    long long shift = ((delta % t_n) + t_n) % t_n;
    if (shift != 0) {
      Vec tmp(static_cast<std::size_t>(t_n));
      for (int c = 0; c < w.data.channels; ++c) {
        double* x = w.data.row(c);
        for (int t = 0; t < t_n; ++t) {
          tmp[static_cast<std::size_t>(t)] = x[(t + shift) % t_n];
        }
        std::copy(tmp.begin(), tmp.end(), x);
      }
    }
  }
}

}  // namespace cogadapt::signal
