#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace cogadapt {

// Deterministic random source. mt19937_64 output is pinned by the standard;
// the gaussian/uniform shaping below is written out by hand so that streams
// are reproducible across standard libraries (std::normal_distribution is
// implementation-defined, which would break byte-identical artifacts).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent child stream addressed by index. Children of the same
  // (seed, index) pair are identical; distinct indices decorrelate.
  Rng substream(std::uint64_t index) const;

  double uniform();                       // [0, 1)
  double gaussian();                      // N(0, 1), Box-Muller
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);  // inclusive
  bool bernoulli(double p);

  std::uint64_t next_u64();

 private:
  std::uint64_t base_seed_;
  std::mt19937_64 gen_;
};

// Fisher-Yates with draws pinned to Rng::uniform_int, so permutations are
// reproducible across standard libraries (std::shuffle is not).
template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace cogadapt
