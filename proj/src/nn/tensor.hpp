#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace cogadapt::nn {

using Vec = std::vector<double>;

// Channel-major 2-D signal block: data[c * samples + t].
struct Tensor2 {
  int channels = 0;
  int samples = 0;
  Vec data;

  Tensor2() = default;
  Tensor2(int c, int s) : channels(c), samples(s), data(static_cast<std::size_t>(c) * s, 0.0) {
    if (c < 0 || s < 0) throw DimensionError("Tensor2: negative shape");
  }

  double& at(int c, int t) { return data[static_cast<std::size_t>(c) * samples + t]; }
  double at(int c, int t) const { return data[static_cast<std::size_t>(c) * samples + t]; }

  double* row(int c) { return data.data() + static_cast<std::size_t>(c) * samples; }
  const double* row(int c) const { return data.data() + static_cast<std::size_t>(c) * samples; }

  std::size_t size() const { return data.size(); }
};

using Batch = std::vector<Tensor2>;

void require_shape(const Tensor2& x, int channels, const std::string& who);
void require_finite(const Tensor2& x, const std::string& layer);
void require_finite(const Vec& v, const std::string& layer);

}  // namespace cogadapt::nn
