#pragma once

#include <vector>

#include "nn/tensor.hpp"

namespace cogadapt::signal {

using nn::Vec;

// Rational approximation p/q of `ratio` with |p/q - ratio| <= tol * ratio,
// via continued fractions. Both outputs are coprime and positive.
void rational_approx(double ratio, double tol, long long& p, long long& q);

// Polyphase FIR rate conversion. The anti-aliasing low-pass sits at
// min(fs_in, fs_out)/2 with a Kaiser window deep enough (~130 dB) that a
// constant stays constant to ~1e-6 away from the edges. Output length is
// round(n * fs_out / fs_in); edges assume zero outside the input.
Vec resample_series(const Vec& x, double fs_in, double fs_out);

struct Biquad {
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;  // numerator
  double a1 = 0.0, a2 = 0.0;            // denominator, a0 == 1
};

// Butterworth band-pass of the given prototype order (2*order poles) as
// second-order sections, unit gain at the geometric center frequency.
std::vector<Biquad> design_butter_bandpass(int order, double lo_hz, double hi_hz,
                                           double fs);

// Forward-backward (zero-phase) application with odd-reflection padding of
// `padlen` samples per edge and step-matched initial conditions, so constant
// offsets produce exactly zero output. x must be longer than padlen.
Vec filtfilt(const std::vector<Biquad>& sections, const Vec& x, int padlen);

}  // namespace cogadapt::signal
