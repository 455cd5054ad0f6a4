#include "signal/dsp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

namespace cogadapt::signal {

namespace {

constexpr double kPi = 3.14159265358979323846;

double bessel_i0(double x) {
  // Power series; converges quickly for the window betas used here.
  double sum = 1.0, term = 1.0;
  double half = x / 2.0;
  for (int k = 1; k < 80; ++k) {
    term *= (half / k) * (half / k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

// Windowed-sinc low-pass: cutoff in cycles/sample, odd length, Kaiser beta.
Vec kaiser_sinc(int taps, double cutoff, double beta) {
  Vec h(taps);
  double c = (taps - 1) / 2.0;
  double i0b = bessel_i0(beta);
  for (int k = 0; k < taps; ++k) {
    double t = k - c;
    double s = t == 0.0 ? 2.0 * cutoff : std::sin(2.0 * kPi * cutoff * t) / (kPi * t);
    double r = 2.0 * t / (taps - 1);
    double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    h[k] = s * w;
  }
  return h;
}

}  // namespace

void rational_approx(double ratio, double tol, long long& p, long long& q) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw ConfigError("rational_approx: ratio must be positive and finite");
  }
  // Continued-fraction convergents h_k/k_k.
  double x = ratio;
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  for (int iter = 0; iter < 64; ++iter) {
    long long a = static_cast<long long>(std::floor(x));
    long long h2 = a * h1 + h0;
    long long k2 = a * k1 + k0;
    h0 = h1; h1 = h2; k0 = k1; k1 = k2;
    if (k1 > 0 && std::abs(static_cast<double>(h1) / k1 - ratio) <= tol * ratio) break;
    double frac = x - a;
    if (frac < 1e-15) break;
    x = 1.0 / frac;
    if (k1 > 100000000) break;
  }
  p = h1;
  q = k1;
  if (p <= 0 || q <= 0) throw RuntimeError("rational_approx: failed to converge");
}

Vec resample_series(const Vec& x, double fs_in, double fs_out) {
  if (fs_in <= 0.0 || fs_out <= 0.0) throw ConfigError("resample: rates must be positive");
  if (x.empty()) return {};

  long long p = 0, q = 0;
  rational_approx(fs_out / fs_in, 1e-9, p, q);
  std::size_t n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(x.size()) * fs_out / fs_in));
  if (p == 1 && q == 1) return x;

  long long m = std::max(p, q);
  int taps = static_cast<int>(2 * 10 * m + 1);
  // ~130 dB stopband: images of a constant land below 1e-6.
  Vec h = kaiser_sinc(taps, 0.5 / static_cast<double>(m), 13.37);
  double dc = 0.0;
  for (double v : h) dc += v;
  double gain = static_cast<double>(p) / dc;
  for (double& v : h) v *= gain;

  long long center = (taps - 1) / 2;
  long long len = static_cast<long long>(x.size());
  Vec y(n_out, 0.0);
  for (std::size_t mi = 0; mi < n_out; ++mi) {
    long long base = center + static_cast<long long>(mi) * q;
    long long s_lo = (base - (taps - 1) + p - 1) / p;  // ceil
    long long s_hi = base / p;                         // floor
    s_lo = std::max<long long>(s_lo, 0);
    s_hi = std::min(s_hi, len - 1);
    double acc = 0.0;
    for (long long s = s_lo; s <= s_hi; ++s) {
      acc += x[static_cast<std::size_t>(s)] * h[static_cast<std::size_t>(base - s * p)];
    }
    y[mi] = acc;
  }
  return y;
}

std::vector<Biquad> design_butter_bandpass(int order, double lo_hz, double hi_hz,
                                           double fs) {
  if (order < 1) throw ConfigError("bandpass: order must be >= 1");
  if (!(0.0 < lo_hz && lo_hz < hi_hz && hi_hz < fs / 2.0)) {
    throw ConfigError("bandpass: need 0 < lo < hi < fs/2");
  }

  using cplx = std::complex<double>;
  double k_bl = 2.0 * fs;
  double w1 = k_bl * std::tan(kPi * lo_hz / fs);  // prewarped edges
  double w2 = k_bl * std::tan(kPi * hi_hz / fs);
  double w0sq = w1 * w2;
  double bw = w2 - w1;

  // Analog band-pass poles: each prototype pole p yields the roots of
  // s^2 - bw*p*s + w0^2. Regrouped with conjugates into real quadratics.
  std::vector<std::array<double, 2>> quads;  // s^2 + c1 s + c0
  for (int k = 0; k < order; ++k) {
    cplx proto = std::exp(cplx(0.0, kPi * (2.0 * k + order + 1.0) / (2.0 * order)));
    if (proto.imag() < -1e-12) continue;  // conjugate handled with its partner
    if (std::abs(proto.imag()) <= 1e-12) {
      // Real prototype pole: quadratic already real.
      quads.push_back({-bw * proto.real(), w0sq});
    } else {
      cplx bp = bw * proto;
      cplx disc = std::sqrt(bp * bp - 4.0 * w0sq);
      cplx s1 = (bp + disc) / 2.0;
      cplx s2 = (bp - disc) / 2.0;
      // (s - s1)(s - conj s1) and (s - s2)(s - conj s2).
      quads.push_back({-2.0 * s1.real(), std::norm(s1)});
      quads.push_back({-2.0 * s2.real(), std::norm(s2)});
    }
  }

  // Bilinear transform of bw*s / (s^2 + c1 s + c0) with s = K(z-1)/(z+1).
  std::vector<Biquad> out;
  out.reserve(quads.size());
  for (const auto& qd : quads) {
    double c1 = qd[0], c0 = qd[1];
    double d2 = k_bl * k_bl + c1 * k_bl + c0;
    Biquad b;
    b.b0 = bw * k_bl / d2;
    b.b1 = 0.0;
    b.b2 = -b.b0;
    b.a1 = (-2.0 * k_bl * k_bl + 2.0 * c0) / d2;
    b.a2 = (k_bl * k_bl - c1 * k_bl + c0) / d2;
    out.push_back(b);
  }
  return out;
}

namespace {

// Direct-form II transposed with explicit initial state.
void run_biquad(const Biquad& s, Vec& x, double z1_0, double z2_0) {
  double z1 = z1_0, z2 = z2_0;
  for (double& v : x) {
    double in = v;
    double y = s.b0 * in + z1;
    z1 = s.b1 * in - s.a1 * y + z2;
    z2 = s.b2 * in - s.a2 * y;
    v = y;
  }
}

void cascade_with_step_init(const std::vector<Biquad>& sections, Vec& x) {
  double lead = x.empty() ? 0.0 : x.front();
  for (const Biquad& s : sections) {
    // Steady state for a step of height `lead`. Every section here has a
    // zero at z=1 (H(1)=0), so downstream sections see zero steady input.
    double h1 = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    double z1 = (h1 - s.b0) * lead;
    double z2 = (s.b2 - s.a2 * h1) * lead;
    run_biquad(s, x, z1, z2);
    lead *= h1;
  }
}

}  // namespace

Vec filtfilt(const std::vector<Biquad>& sections, const Vec& x, int padlen) {
  if (padlen < 0) throw ConfigError("filtfilt: negative padding");
  if (static_cast<long long>(x.size()) <= padlen) {
    throw RuntimeError("filtfilt: signal shorter than edge padding");
  }
  std::size_t n = x.size();
  std::size_t pl = static_cast<std::size_t>(padlen);

  Vec ext(n + 2 * pl);
  for (std::size_t i = 0; i < pl; ++i) ext[i] = 2.0 * x[0] - x[pl - i];
  std::copy(x.begin(), x.end(), ext.begin() + pl);
  for (std::size_t i = 0; i < pl; ++i) ext[pl + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];

  cascade_with_step_init(sections, ext);
  std::reverse(ext.begin(), ext.end());
  cascade_with_step_init(sections, ext);
  std::reverse(ext.begin(), ext.end());

  return Vec(ext.begin() + pl, ext.begin() + pl + n);
}

}  // namespace cogadapt::signal
