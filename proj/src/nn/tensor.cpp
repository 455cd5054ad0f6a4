#include "nn/tensor.hpp"

#include <cmath>

namespace cogadapt::nn {

void require_shape(const Tensor2& x, int channels, const std::string& who) {
  if (x.channels != channels) {
    throw DimensionError(who + ": expected " + std::to_string(channels) +
                         " channels, got " + std::to_string(x.channels));
  }
}

void require_finite(const Vec& v, const std::string& layer) {
  for (double d : v) {
    if (!std::isfinite(d)) {
      throw RuntimeError("non-finite value in " + layer);
    }
  }
}

void require_finite(const Tensor2& x, const std::string& layer) {
  require_finite(x.data, layer);
}

}  // namespace cogadapt::nn
