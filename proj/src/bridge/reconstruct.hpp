#pragma once

#include <array>
#include <string>

#include "nn/tensor.hpp"

namespace cogadapt::bridge {

// Static affine 3-to-12 lead map: y_l(t) = sum_j matrix[l][j] * x_j(t) + intercept[l].
// Text assets carry only the matrix (intercepts stay zero); least_squares_fit
// fills both.
struct FixedLeadTransform {
  std::array<double, 36> matrix{};     // 12 x 3, row-major
  std::array<double, 12> intercept{};
  std::string name;

  double at(int lead, int input) const { return matrix[static_cast<std::size_t>(lead) * 3 + input]; }
  double& at(int lead, int input) { return matrix[static_cast<std::size_t>(lead) * 3 + input]; }
};

// Whitespace-separated 12x3 decimal grid; '#' starts a comment. The transform
// is named after the file's stem.
FixedLeadTransform load_fixed_transform(const std::string& path);

// Per-timestep matrix product plus intercept. x3 must have 3 channels.
nn::Tensor2 apply_fixed_transform(const FixedLeadTransform& t, const nn::Tensor2& x3);

// Ordinary least squares per target lead (3 coefficients + intercept), pooled
// over every timestep of every paired window. Normal equations with a 1e-8
// ridge on the Gram diagonal for headroom; a Gram that is still numerically
// rank-deficient (duplicated or all-zero input lead) is an error.
FixedLeadTransform least_squares_fit(const nn::Batch& inputs3,
                                     const nn::Batch& targets12);

}  // namespace cogadapt::bridge
