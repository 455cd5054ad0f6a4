#include "dataio/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "leads/lead_math.hpp"

namespace cogadapt::dataio {

namespace {

using leads::LeadFrame12;
using nn::Vec;

// Rows I and II are chosen by hand; III/aVR/aVL/aVF follow from them by
// linearity; V1..V6 sweep the precordial arc. Full column rank by design.
const std::vector<double> kDefaultMixing = {
    1.0,  0.0,   0.0,   // I
    0.4,  1.0,   0.2,   // II
    -0.6, 1.0,   0.2,   // III  = II - I
    -0.7, -0.5,  -0.1,  // aVR  = -(I+II)/2
    0.8,  -0.5,  -0.1,  // aVL  = I - II/2
    -0.1, 1.0,   0.2,   // aVF  = II - I/2
    -0.3, 0.1,   0.8,   // V1
    -0.1, 0.15,  1.0,   // V2
    0.2,  0.2,   0.9,   // V3
    0.5,  0.25,  0.7,   // V4
    0.7,  0.2,   0.4,   // V5
    0.8,  0.15,  0.2,   // V6
};

// Gaussian bump per wave, per latent dimension: center offset from the beat,
// width (sigma), and amplitudes.
struct Wave {
  double offset;
  double sigma;
  double amp[3];
};

constexpr Wave kWaves[3] = {
    {-0.16, 0.025, {0.08, 0.12, 0.05}},  // P
    {0.00, 0.012, {1.0, 1.2, 0.9}},      // QRS
    {0.30, 0.040, {0.2, 0.3, 0.15}},     // T
};

void check_derived_row(const std::vector<double>& m, int row, double c_i,
                       double c_ii, const char* name) {
  for (int k = 0; k < 3; ++k) {
    double want = c_i * m[0 * 3 + k] + c_ii * m[1 * 3 + k];
    if (std::abs(m[row * 3 + k] - want) > 1e-9) {
      throw ConfigError(std::string("synth: mixing row ") + name +
                        " is not the required combination of rows I and II");
    }
  }
}

std::string subject_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "s%02d", index + 1);
  return buf;
}

long long block_count(double duration_s, double period_s) {
  long long n = static_cast<long long>(std::ceil(duration_s / period_s - 1e-9));
  return std::max<long long>(n, 1);
}

}  // namespace

const std::vector<double>& default_mixing() { return kDefaultMixing; }

std::vector<double> SynthConfig::resolved_mixing() const {
  const std::vector<double>& m = mixing.empty() ? kDefaultMixing : mixing;
  if (m.size() != 36) {
    throw ConfigError("synth: mixing must hold 12x3 = 36 values, got " +
                      std::to_string(m.size()));
  }
  for (double v : m) {
    if (!std::isfinite(v)) throw ConfigError("synth: non-finite mixing entry");
  }
  check_derived_row(m, 2, -1.0, 1.0, "III");
  check_derived_row(m, 3, -0.5, -0.5, "aVR");
  check_derived_row(m, 4, 1.0, -0.5, "aVL");
  check_derived_row(m, 5, -0.5, 1.0, "aVF");
  // Full column rank via the 3x3 Gram determinant.
  double g[3][3];
  double scale = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double s = 0.0;
      for (int r = 0; r < 12; ++r) s += m[r * 3 + a] * m[r * 3 + b];
      g[a][b] = s;
      scale = std::max(scale, std::abs(s));
    }
  }
  double det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
               g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
               g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
  if (!(scale > 0.0) || std::abs(det) <= 1e-12 * scale * scale * scale) {
    throw ConfigError("synth: mixing matrix is rank-deficient");
  }
  return m;
}

void SynthConfig::validate() const {
  if (n_subjects < 1) throw ConfigError("synth: n_subjects must be >= 1");
  if (!(minutes_per_subject > 0.0)) {
    throw ConfigError("synth: minutes_per_subject must be positive");
  }
  if (!(fs > 0.0)) throw ConfigError("synth: fs must be positive");
  if (!(base_hr_bpm > 20.0 && base_hr_bpm < 240.0)) {
    throw ConfigError("synth: base_hr_bpm out of range (20, 240)");
  }
  if (hr_subject_spread_bpm < 0.0) {
    throw ConfigError("synth: hr_subject_spread_bpm must be non-negative");
  }
  if (!(rr_std_low_ms > 0.0) || !(rr_std_high_ms > 0.0)) {
    throw ConfigError("synth: RR std values must be positive");
  }
  if (rr_std_low_ms == rr_std_high_ms) {
    throw ConfigError("synth: the two load states need distinct RR std values");
  }
  if (!(high_load_hr_scale > 0.0)) {
    throw ConfigError("synth: high_load_hr_scale must be positive");
  }
  if (!(label_period_s > 0.0)) {
    throw ConfigError("synth: label_period_s must be positive");
  }
  if (noise_std < 0.0) throw ConfigError("synth: noise_std must be non-negative");
  leads::chest_lead_index(chest_pick);  // throws on anything outside V1..V6
  resolved_mixing();
}

SubjectSynth synth_subject(const SynthConfig& cfg, int subject_index) {
  cfg.validate();
  if (subject_index < 0 || subject_index >= cfg.n_subjects) {
    throw ConfigError("synth: subject index out of range");
  }
  std::vector<double> m = cfg.resolved_mixing();

  Rng subject_stream = Rng(cfg.seed).substream(static_cast<std::uint64_t>(subject_index));
  Rng param_rng = subject_stream.substream(0);
  Rng rr_rng = subject_stream.substream(1);
  Rng label_rng = subject_stream.substream(2);
  Rng noise_rng = subject_stream.substream(3);

  double duration = cfg.minutes_per_subject * 60.0;
  auto n = static_cast<std::size_t>(std::llround(duration * cfg.fs));
  long long blocks = block_count(duration, cfg.label_period_s);

  SubjectTruth truth;
  truth.subject = subject_id(subject_index);
  truth.hr_bpm = cfg.base_hr_bpm + (param_rng.uniform() - 0.5) * cfg.hr_subject_spread_bpm;
  double base_rr = 60.0 / truth.hr_bpm;
  double phase = param_rng.uniform() * base_rr;

  // Load state alternates per label interval; parity staggers subjects so
  // both states appear in every fold arrangement.
  int parity = subject_index % 2;
  std::vector<std::pair<long long, int>> label_stream;
  truth.block_state.reserve(static_cast<std::size_t>(blocks));
  for (long long j = 0; j < blocks; ++j) {
    int state = static_cast<int>((j + parity) % 2);
    truth.block_state.push_back(state);
    int raw = state == 0 ? static_cast<int>(label_rng.uniform_int(1, 4))
                         : static_cast<int>(label_rng.uniform_int(5, 9));
    label_stream.emplace_back(j, raw);
  }

  // Beat train: each RR interval is drawn from the state active at the
  // current beat. One beat past the end keeps boundary T waves intact.
  std::vector<double> all_beats;
  std::vector<double> all_rrs;
  double t = phase;
  while (t < duration + 0.5) {
    auto j = static_cast<long long>(std::floor(t / cfg.label_period_s));
    j = std::clamp<long long>(j, 0, blocks - 1);
    int state = truth.block_state[static_cast<std::size_t>(j)];
    double rr_mean = state == 0 ? base_rr : base_rr / cfg.high_load_hr_scale;
    double rr_std = (state == 0 ? cfg.rr_std_low_ms : cfg.rr_std_high_ms) * 1e-3;
    double rr = std::clamp(rr_mean + rr_std * rr_rng.gaussian(), 0.3, 2.0);
    all_beats.push_back(t);
    all_rrs.push_back(rr);
    t += rr;
  }

  // Latent dipole: sum of P/QRS/T bumps.
  Vec latent[3];
  for (auto& l : latent) l.assign(n, 0.0);
  for (double tb : all_beats) {
    for (const Wave& w : kWaves) {
      double c = tb + w.offset;
      auto lo = static_cast<long long>(std::ceil((c - 4.0 * w.sigma) * cfg.fs));
      auto hi = static_cast<long long>(std::floor((c + 4.0 * w.sigma) * cfg.fs));
      lo = std::max<long long>(lo, 0);
      hi = std::min<long long>(hi, static_cast<long long>(n) - 1);
      for (long long s = lo; s <= hi; ++s) {
        double dt = (static_cast<double>(s) / cfg.fs - c) / w.sigma;
        double g = std::exp(-0.5 * dt * dt);
        for (int i = 0; i < 3; ++i) latent[i][static_cast<std::size_t>(s)] += w.amp[i] * g;
      }
    }
  }

  // Mix the eight independent leads; limb derivations come afterwards from
  // the finished I and II series so Einthoven holds bitwise, noise included.
  LeadFrame12 frame;
  constexpr int kIndependent[8] = {0, 1, 6, 7, 8, 9, 10, 11};
  for (int idx : kIndependent) {
    Vec lead(n);
    const double* row = &m[static_cast<std::size_t>(idx) * 3];
    for (std::size_t s = 0; s < n; ++s) {
      lead[s] = row[0] * latent[0][s] + row[1] * latent[1][s] + row[2] * latent[2][s];
    }
    frame.leads[static_cast<std::size_t>(idx)] = std::move(lead);
  }
  if (cfg.noise_std > 0.0) {
    // Noise lives on the nine electrodes, not the leads, so every lead sees
    // the physically consistent difference of electrode noises.
    for (std::size_t s = 0; s < n; ++s) {
      double ra = cfg.noise_std * noise_rng.gaussian();
      double la = cfg.noise_std * noise_rng.gaussian();
      double ll = cfg.noise_std * noise_rng.gaussian();
      frame.leads[0][s] += la - ra;
      frame.leads[1][s] += ll - ra;
      double wct = (ra + la + ll) / 3.0;
      for (int v = 0; v < 6; ++v) {
        frame.leads[static_cast<std::size_t>(6 + v)][s] +=
            cfg.noise_std * noise_rng.gaussian() - wct;
      }
    }
  }
  leads::derive_limb_leads(frame);
  for (std::size_t s = 0; s < n; ++s) {
    // Generation-time invariant: Einthoven must hold bitwise.
    if (frame.leads[2][s] != frame.leads[1][s] - frame.leads[0][s]) {
      throw RuntimeError("synth: Einthoven violation at sample " + std::to_string(s));
    }
  }

  leads::LeadFrame3 view = leads::make_3lead_from_12(frame, cfg.chest_pick);

  Vec timestamps(n);
  for (std::size_t s = 0; s < n; ++s) timestamps[s] = static_cast<double>(s) / cfg.fs;

  SubjectSynth out;
  out.twelve.subject = truth.subject;
  out.twelve.fs = cfg.fs;
  out.twelve.lead_names.assign(leads::kLeadNames.begin(), leads::kLeadNames.end());
  out.twelve.leads.assign(frame.leads.begin(), frame.leads.end());
  out.twelve.timestamps = timestamps;
  out.twelve.label_period = cfg.label_period_s;
  out.twelve.label_stream = label_stream;
  out.twelve.chest_reference = "WCT";

  out.wearable.subject = truth.subject;
  out.wearable.fs = cfg.fs;
  out.wearable.lead_names = {"I", "II", cfg.chest_pick};
  out.wearable.leads = {std::move(view.lead_i), std::move(view.lead_ii),
                        std::move(view.chest)};
  out.wearable.timestamps = std::move(timestamps);
  out.wearable.label_period = cfg.label_period_s;
  out.wearable.label_stream = std::move(label_stream);
  out.wearable.chest_reference = "RL";

  for (std::size_t k = 0; k < all_beats.size(); ++k) {
    if (all_beats[k] >= duration) break;
    truth.beat_times.push_back(all_beats[k]);
    truth.rr_intervals.push_back(all_rrs[k]);
  }
  out.truth = std::move(truth);
  out.twelve.validate();
  out.wearable.validate();
  return out;
}

SynthDataset synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthDataset ds;
  ds.mixing = cfg.resolved_mixing();
  for (int i = 0; i < cfg.n_subjects; ++i) {
    SubjectSynth s = synth_subject(cfg, i);
    ds.twelve.push_back(std::move(s.twelve));
    ds.wearable.push_back(std::move(s.wearable));
    ds.truth.push_back(std::move(s.truth));
  }
  return ds;
}

}  // namespace cogadapt::dataio
