// Independent reference implementations the tests compare against. These are
// deliberately naive (double loops, textbook formulas) and share no code with
// the library.
#pragma once

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------- spectra --

// Iterative radix-2 FFT; n must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = -2.0 * M_PI / static_cast<double>(len);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// Frequency (Hz) of the largest nonzero-bin magnitude, plus that magnitude
// scaled to a sinusoid amplitude estimate (2|X|/n).
struct SpectralPeak {
  double freq_hz = 0.0;
  double amplitude = 0.0;
  double bin_width_hz = 0.0;
};

inline SpectralPeak fft_peak(const std::vector<double>& x, double fs) {
  std::size_t n = 1;
  while (n * 2 <= x.size()) n *= 2;
  std::vector<std::complex<double>> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = x[i];
  fft_radix2(a);
  SpectralPeak p;
  p.bin_width_hz = fs / static_cast<double>(n);
  std::size_t best = 1;
  for (std::size_t k = 1; k < n / 2; ++k) {
    if (std::abs(a[k]) > std::abs(a[best])) best = k;
  }
  p.freq_hz = static_cast<double>(best) * p.bin_width_hz;
  p.amplitude = 2.0 * std::abs(a[best]) / static_cast<double>(n);
  return p;
}

inline double rms(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

// ---------------------------------------------------------------- metrics --

// Exhaustive pairwise Mann-Whitney statistic, ties counted one half.
inline double mann_whitney_auc(const std::vector<int>& truth,
                               const std::vector<double>& score) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 1) continue;
    for (std::size_t j = 0; j < truth.size(); ++j) {
      if (truth[j] != 0) continue;
      ++pairs;
      if (score[i] > score[j]) wins += 1.0;
      else if (score[i] == score[j]) wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Brute-force confusion-matrix macro F1 over classes {0, 1}.
inline double confusion_macro_f1(const std::vector<int>& truth,
                                 const std::vector<int>& pred) {
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      bool t = truth[i] == c, p = pred[i] == c;
      if (t && p) ++tp;
      if (!t && p) ++fp;
      if (t && !p) ++fn;
    }
    double denom = 2.0 * static_cast<double>(tp) + static_cast<double>(fp) +
                   static_cast<double>(fn);
    total += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
  }
  return total / 2.0;
}

// ---------------------------------------------- finite-difference checking --

// Central difference through a scalar-valued callable, perturbing one slot.
template <typename F>
double central_diff(F&& f, double& slot, double h) {
  double orig = slot;
  slot = orig + h;
  double up = f();
  slot = orig - h;
  double down = f();
  slot = orig;
  return (up - down) / (2.0 * h);
}

// Relative error with an absolute-comparison floor for tiny gradients.
inline double grad_error(double analytic, double fd) {
  double scale = std::max(std::abs(analytic), std::abs(fd));
  double diff = std::abs(analytic - fd);
  return scale < 1e-8 ? diff : diff / scale;
}

// ------------------------------------------------------------------ misc --

// Unique scratch directory under the system temp root; removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    auto base = std::filesystem::temp_directory_path();
    path_ = base / (tag + "-" + std::to_string(::getpid()) + "-" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::filesystem::path operator/(const std::string& leaf) const {
    return path_ / leaf;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
