#include "bridge/reconstruct.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "common/text.hpp"

namespace cogadapt::bridge {

FixedLeadTransform load_fixed_transform(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transform asset: " + path);
  FixedLeadTransform t;
  std::size_t filled = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream row(line);
    std::string tok;
    while (row >> tok) {
      if (filled >= t.matrix.size()) {
        throw IoError(path + ": more than 36 values (expected 12x3)");
      }
      t.matrix[filled++] =
          parse_double(tok, path + ":" + std::to_string(line_no));
    }
  }
  if (filled != t.matrix.size()) {
    throw IoError(path + ": found " + std::to_string(filled) +
                  " values, expected 36 (12x3)");
  }
  for (double v : t.matrix) {
    if (!std::isfinite(v)) throw IoError(path + ": non-finite coefficient");
  }
  auto slash = path.find_last_of("/\\");
  std::string stem = slash == std::string::npos ? path : path.substr(slash + 1);
  auto dot = stem.find_last_of('.');
  if (dot != std::string::npos && dot > 0) stem = stem.substr(0, dot);
  t.name = stem;
  return t;
}

nn::Tensor2 apply_fixed_transform(const FixedLeadTransform& t, const nn::Tensor2& x3) {
  nn::require_shape(x3, 3, "apply_fixed_transform");
  nn::Tensor2 y(12, x3.samples);
  const double* x0 = x3.row(0);
  const double* x1 = x3.row(1);
  const double* x2 = x3.row(2);
  for (int l = 0; l < 12; ++l) {
    double w0 = t.at(l, 0), w1 = t.at(l, 1), w2 = t.at(l, 2);
    double b = t.intercept[static_cast<std::size_t>(l)];
    double* yl = y.row(l);
    for (int s = 0; s < x3.samples; ++s) {
      yl[s] = w0 * x0[s] + w1 * x1[s] + w2 * x2[s] + b;
    }
  }
  return y;
}

namespace {

// Gaussian elimination with partial pivoting on the 4x4 system G a = r.
// Pivots are judged against the Gram's own scale so an exactly collinear
// design is reported as such instead of returning jitter-sized garbage.
std::array<double, 4> solve_normal_eqs(std::array<double, 16> g,
                                       std::array<double, 4> r,
                                       double scale) {
  constexpr int kN = 4;
  std::array<int, kN> perm{0, 1, 2, 3};
  for (int col = 0; col < kN; ++col) {
    int best = col;
    for (int row = col + 1; row < kN; ++row) {
      if (std::abs(g[static_cast<std::size_t>(perm[row]) * kN + col]) >
          std::abs(g[static_cast<std::size_t>(perm[best]) * kN + col])) {
        best = row;
      }
    }
    std::swap(perm[col], perm[best]);
    double pivot = g[static_cast<std::size_t>(perm[col]) * kN + col];
    if (std::abs(pivot) <= 1e-12 * scale) {
      throw RuntimeError(
          "least_squares_fit: rank-deficient design (collinear or zero input lead)");
    }
    for (int row = col + 1; row < kN; ++row) {
      std::size_t rr = static_cast<std::size_t>(perm[row]) * kN;
      double f = g[rr + col] / pivot;
      g[rr + col] = 0.0;
      for (int k = col + 1; k < kN; ++k) {
        g[rr + k] -= f * g[static_cast<std::size_t>(perm[col]) * kN + k];
      }
      r[static_cast<std::size_t>(perm[row])] -= f * r[static_cast<std::size_t>(perm[col])];
    }
  }
  std::array<double, 4> a{};
  for (int col = kN - 1; col >= 0; --col) {
    std::size_t rr = static_cast<std::size_t>(perm[col]) * kN;
    double s = r[static_cast<std::size_t>(perm[col])];
    for (int k = col + 1; k < kN; ++k) s -= g[rr + k] * a[static_cast<std::size_t>(k)];
    a[static_cast<std::size_t>(col)] = s / g[rr + col];
  }
  return a;
}

}  // namespace

FixedLeadTransform least_squares_fit(const nn::Batch& inputs3,
                                     const nn::Batch& targets12) {
  if (inputs3.size() != targets12.size()) {
    throw DimensionError("least_squares_fit: input/target pair count mismatch");
  }
  std::size_t pooled = 0;
  for (std::size_t i = 0; i < inputs3.size(); ++i) {
    nn::require_shape(inputs3[i], 3, "least_squares_fit input");
    nn::require_shape(targets12[i], 12, "least_squares_fit target");
    if (inputs3[i].samples != targets12[i].samples) {
      throw DimensionError("least_squares_fit: paired windows differ in length");
    }
    pooled += static_cast<std::size_t>(inputs3[i].samples);
  }
  if (pooled < 4) {
    throw ConfigError("least_squares_fit: needs at least 4 pooled samples");
  }

  // Design row per timestep: (x0, x1, x2, 1). One shared Gram, one
  // cross-moment vector per target lead.
  std::array<double, 16> gram{};
  std::array<std::array<double, 4>, 12> cross{};
  for (std::size_t i = 0; i < inputs3.size(); ++i) {
    const nn::Tensor2& x = inputs3[i];
    const nn::Tensor2& y = targets12[i];
    for (int s = 0; s < x.samples; ++s) {
      double d[4] = {x.at(0, s), x.at(1, s), x.at(2, s), 1.0};
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          gram[static_cast<std::size_t>(a) * 4 + b] += d[a] * d[b];
        }
      }
      for (int l = 0; l < 12; ++l) {
        double yv = y.at(l, s);
        for (int a = 0; a < 4; ++a) {
          cross[static_cast<std::size_t>(l)][static_cast<std::size_t>(a)] += d[a] * yv;
        }
      }
    }
  }
  double scale = 0.0;
  for (int a = 0; a < 4; ++a) {
    scale = std::max(scale, std::abs(gram[static_cast<std::size_t>(a) * 5]));
  }
  for (int a = 0; a < 4; ++a) gram[static_cast<std::size_t>(a) * 5] += 1e-8;

  FixedLeadTransform t;
  t.name = "least_squares";
  for (int l = 0; l < 12; ++l) {
    auto a = solve_normal_eqs(gram, cross[static_cast<std::size_t>(l)], scale);
    t.at(l, 0) = a[0];
    t.at(l, 1) = a[1];
    t.at(l, 2) = a[2];
    t.intercept[static_cast<std::size_t>(l)] = a[3];
  }
  return t;
}

}  // namespace cogadapt::bridge
