#include "common/rng.hpp"

#include <cmath>

#include "common/error.hpp"

namespace cogadapt {

namespace {

// splitmix64: cheap, well-mixed seed expansion.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : base_seed_(seed), gen_(mix64(seed)) {}

Rng Rng::substream(std::uint64_t index) const {
  return Rng(mix64(base_seed_ ^ mix64(index + 1)));
}

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::uniform() {
  // 53-bit mantissa fill, range [0, 1).
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  // Box-Muller, cosine branch only: two uniforms per draw, no cached state,
  // so substream boundaries never shift results.
  double u1 = 1.0 - uniform();  // (0, 1]
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw RuntimeError("uniform_int: empty range");
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Rejection to kill modulo bias.
  std::uint64_t limit = ~0ull - (~0ull % span);
  std::uint64_t v;
  do {
    v = gen_();
  } while (v > limit);
  return lo + static_cast<std::int64_t>(v % span);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

}  // namespace cogadapt
