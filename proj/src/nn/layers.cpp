#include "nn/layers.hpp"

#include <cmath>

namespace cogadapt::nn {

Tensor2 linear_forward(const LinearChannelMap& m, const Tensor2& x,
                       const std::string& layer, int stride) {
  require_shape(x, m.in_ch, layer);
  if (stride < 1) throw DimensionError(layer + ": stride must be >= 1");
  int t_out = (x.samples + stride - 1) / stride;
  Tensor2 y(m.out_ch, t_out);
  for (int o = 0; o < m.out_ch; ++o) {
    double* yo = y.row(o);
    double b = m.bias[o];
    for (int t = 0; t < t_out; ++t) yo[t] = b;
    for (int i = 0; i < m.in_ch; ++i) {
      double w = m.w(o, i);
      if (w == 0.0) continue;
      const double* xi = x.row(i);
      if (stride == 1) {
        for (int t = 0; t < t_out; ++t) yo[t] += w * xi[t];
      } else {
        for (int t = 0; t < t_out; ++t) yo[t] += w * xi[static_cast<std::size_t>(t) * stride];
      }
    }
  }
  require_finite(y, layer);
  return y;
}

Tensor2 linear_backward(const LinearChannelMap& m, const Tensor2& x,
                        const Tensor2& dy, Vec& d_weight, Vec& d_bias,
                        int stride) {
  Tensor2 dx(x.channels, x.samples);
  int t_out = dy.samples;
  for (int o = 0; o < m.out_ch; ++o) {
    const double* dyo = dy.row(o);
    double db = 0.0;
    for (int t = 0; t < t_out; ++t) db += dyo[t];
    d_bias[o] += db;
    for (int i = 0; i < m.in_ch; ++i) {
      const double* xi = x.row(i);
      double* dxi = dx.row(i);
      double w = m.w(o, i);
      double dw = 0.0;
      if (stride == 1) {
        for (int t = 0; t < t_out; ++t) {
          dw += dyo[t] * xi[t];
          dxi[t] += w * dyo[t];
        }
      } else {
        for (int t = 0; t < t_out; ++t) {
          std::size_t ts = static_cast<std::size_t>(t) * stride;
          dw += dyo[t] * xi[ts];
          dxi[ts] += w * dyo[t];
        }
      }
      d_weight[static_cast<std::size_t>(o) * m.in_ch + i] += dw;
    }
  }
  return dx;
}

Tensor2 linear_backward_input(const LinearChannelMap& m, int in_samples,
                              const Tensor2& dy, int stride) {
  Tensor2 dx(m.in_ch, in_samples);
  for (int o = 0; o < m.out_ch; ++o) {
    const double* dyo = dy.row(o);
    for (int i = 0; i < m.in_ch; ++i) {
      double w = m.w(o, i);
      if (w == 0.0) continue;
      double* dxi = dx.row(i);
      for (int t = 0; t < dy.samples; ++t) {
        dxi[static_cast<std::size_t>(t) * stride] += w * dyo[t];
      }
    }
  }
  return dx;
}

Batch batchnorm_forward(BatchNormState& bn, const Batch& xs, Mode mode,
                        const std::string& layer, BnCache* cache) {
  if (xs.empty()) throw DimensionError(layer + ": zero batch");
  for (const auto& x : xs) require_shape(x, bn.channels, layer);

  int c_n = bn.channels;
  Batch ys;
  ys.reserve(xs.size());

  if (mode == Mode::kEval) {
    Vec invstd(c_n);
    for (int c = 0; c < c_n; ++c) invstd[c] = 1.0 / std::sqrt(bn.running_var[c] + bn.eps);
    if (cache) {
      cache->xhat.clear();
      cache->xhat.reserve(xs.size());
      cache->invstd = invstd;
      cache->count = 0;
    }
    for (const auto& x : xs) {
      Tensor2 y(c_n, x.samples);
      Tensor2 xh(c_n, x.samples);
      for (int c = 0; c < c_n; ++c) {
        double is = invstd[c];
        double mu = bn.running_mean[c];
        double g = bn.gamma[c], b = bn.beta[c];
        const double* xc = x.row(c);
        double* yc = y.row(c);
        double* xhc = xh.row(c);
        for (int t = 0; t < x.samples; ++t) {
          double v = (xc[t] - mu) * is;
          xhc[t] = v;
          yc[t] = g * v + b;
        }
      }
      require_finite(y, layer);
      if (cache) cache->xhat.push_back(std::move(xh));
      ys.push_back(std::move(y));
    }
    return ys;
  }

  std::size_t count = 0;
  for (const auto& x : xs) count += static_cast<std::size_t>(x.samples);
  if (count < 2) throw DimensionError(layer + ": batch*samples must be >= 2 in train mode");

  Vec mean(c_n, 0.0), var(c_n, 0.0);
  for (int c = 0; c < c_n; ++c) {
    double s = 0.0;
    for (const auto& x : xs) {
      const double* xc = x.row(c);
      for (int t = 0; t < x.samples; ++t) s += xc[t];
    }
    mean[c] = s / static_cast<double>(count);
    double ss = 0.0;
    for (const auto& x : xs) {
      const double* xc = x.row(c);
      for (int t = 0; t < x.samples; ++t) {
        double d = xc[t] - mean[c];
        ss += d * d;
      }
    }
    var[c] = ss / static_cast<double>(count);  // biased
  }

  Vec invstd(c_n);
  for (int c = 0; c < c_n; ++c) invstd[c] = 1.0 / std::sqrt(var[c] + bn.eps);

  if (cache) {
    cache->xhat.clear();
    cache->xhat.reserve(xs.size());
    cache->invstd = invstd;
    cache->count = count;
  }

  for (const auto& x : xs) {
    Tensor2 y(c_n, x.samples);
    Tensor2 xh(c_n, x.samples);
    for (int c = 0; c < c_n; ++c) {
      const double* xc = x.row(c);
      double* yc = y.row(c);
      double* xhc = xh.row(c);
      double mu = mean[c], is = invstd[c], g = bn.gamma[c], b = bn.beta[c];
      for (int t = 0; t < x.samples; ++t) {
        double v = (xc[t] - mu) * is;
        xhc[t] = v;
        yc[t] = g * v + b;
      }
    }
    require_finite(y, layer);
    if (cache) cache->xhat.push_back(std::move(xh));
    ys.push_back(std::move(y));
  }

  for (int c = 0; c < c_n; ++c) {
    bn.running_mean[c] = (1.0 - bn.momentum) * bn.running_mean[c] + bn.momentum * mean[c];
    bn.running_var[c] = (1.0 - bn.momentum) * bn.running_var[c] + bn.momentum * var[c];
  }
  return ys;
}

Batch batchnorm_backward(const BatchNormState& bn, const BnCache& cache,
                         const Batch& dys, Mode mode, Vec& d_gamma, Vec& d_beta) {
  int c_n = bn.channels;
  Batch dxs;
  dxs.reserve(dys.size());

  if (mode == Mode::kEval) {
    // Running stats are constants here, so the map is per-channel affine:
    // dx = gamma*invstd*dy, with no batch-statistic coupling term.
    for (std::size_t k = 0; k < dys.size(); ++k) {
      const Tensor2& dy = dys[k];
      const Tensor2& xh = cache.xhat[k];
      Tensor2 dx(c_n, dy.samples);
      for (int c = 0; c < c_n; ++c) {
        double g = bn.gamma[c] * cache.invstd[c];
        const double* dyc = dy.row(c);
        const double* xhc = xh.row(c);
        double* dxc = dx.row(c);
        double dg = 0.0, db = 0.0;
        for (int t = 0; t < dy.samples; ++t) {
          dxc[t] = g * dyc[t];
          db += dyc[t];
          dg += dyc[t] * xhc[t];
        }
        d_beta[c] += db;
        d_gamma[c] += dg;
      }
      dxs.push_back(std::move(dx));
    }
    return dxs;
  }

  std::size_t n = cache.count;
  double inv_n = 1.0 / static_cast<double>(n);

  // Two reductions over the batch, then the standard train-mode formula:
  // dx = g*invstd * (dy - mean(dy) - xhat * mean(dy*xhat)).
  Vec sum_dy(c_n, 0.0), sum_dy_xhat(c_n, 0.0);
  for (std::size_t k = 0; k < dys.size(); ++k) {
    const Tensor2& dy = dys[k];
    const Tensor2& xh = cache.xhat[k];
    for (int c = 0; c < c_n; ++c) {
      const double* dyc = dy.row(c);
      const double* xhc = xh.row(c);
      double s = 0.0, sx = 0.0;
      for (int t = 0; t < dy.samples; ++t) {
        s += dyc[t];
        sx += dyc[t] * xhc[t];
      }
      sum_dy[c] += s;
      sum_dy_xhat[c] += sx;
    }
  }
  for (int c = 0; c < c_n; ++c) {
    d_beta[c] += sum_dy[c];
    d_gamma[c] += sum_dy_xhat[c];
  }
  for (std::size_t k = 0; k < dys.size(); ++k) {
    const Tensor2& dy = dys[k];
    const Tensor2& xh = cache.xhat[k];
    Tensor2 dx(c_n, dy.samples);
    for (int c = 0; c < c_n; ++c) {
      double g = bn.gamma[c] * cache.invstd[c];
      double mdy = sum_dy[c] * inv_n;
      double mdyx = sum_dy_xhat[c] * inv_n;
      const double* dyc = dy.row(c);
      const double* xhc = xh.row(c);
      double* dxc = dx.row(c);
      for (int t = 0; t < dy.samples; ++t) {
        dxc[t] = g * (dyc[t] - mdy - xhc[t] * mdyx);
      }
    }
    dxs.push_back(std::move(dx));
  }
  return dxs;
}

Tensor2 relu(const Tensor2& x) {
  Tensor2 y(x.channels, x.samples);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  }
  return y;
}

Tensor2 relu_backward(const Tensor2& y, const Tensor2& dy) {
  Tensor2 dx(dy.channels, dy.samples);
  for (std::size_t i = 0; i < dy.data.size(); ++i) {
    dx.data[i] = y.data[i] > 0.0 ? dy.data[i] : 0.0;
  }
  return dx;
}

Tensor2 dropout_forward(const Tensor2& x, double p, Mode mode, Rng& rng,
                        Tensor2* mask) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout: p must be in [0, 1)");
  if (mode == Mode::kEval || p == 0.0) {
    if (mask) {
      *mask = Tensor2(x.channels, x.samples);
      for (double& v : mask->data) v = 1.0;
    }
    return x;
  }
  double scale = 1.0 / (1.0 - p);
  Tensor2 y(x.channels, x.samples);
  Tensor2 m(x.channels, x.samples);
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    double keep = rng.uniform() >= p ? scale : 0.0;
    m.data[i] = keep;
    y.data[i] = x.data[i] * keep;
  }
  if (mask) *mask = std::move(m);
  return y;
}

Tensor2 dropout_backward(const Tensor2& mask, const Tensor2& dy) {
  Tensor2 dx(dy.channels, dy.samples);
  for (std::size_t i = 0; i < dy.data.size(); ++i) {
    dx.data[i] = dy.data[i] * mask.data[i];
  }
  return dx;
}

Vec mean_pool(const Tensor2& x) {
  if (x.samples == 0) throw DimensionError("mean_pool: empty time axis");
  Vec z(x.channels, 0.0);
  for (int c = 0; c < x.channels; ++c) {
    const double* xc = x.row(c);
    double s = 0.0;
    for (int t = 0; t < x.samples; ++t) s += xc[t];
    z[c] = s / x.samples;
  }
  return z;
}

Tensor2 mean_pool_backward(const Vec& dz, int samples) {
  Tensor2 dx(static_cast<int>(dz.size()), samples);
  for (std::size_t c = 0; c < dz.size(); ++c) {
    double g = dz[c] / samples;
    double* dxc = dx.row(static_cast<int>(c));
    for (int t = 0; t < samples; ++t) dxc[t] = g;
  }
  return dx;
}

}  // namespace cogadapt::nn
