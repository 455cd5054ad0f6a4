#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nn/tensor.hpp"

namespace cogadapt::evalkit {

using nn::Vec;

double accuracy(const std::vector<int>& truth, const std::vector<int>& pred);

// Unweighted mean of per-class F1 over the classes present in `truth`.
// A class with zero precision+recall contributes F1 = 0.
double macro_f1(const std::vector<int>& truth, const std::vector<int>& pred,
                int n_classes = 2);

// Probability that a random positive outranks a random negative, ties 0.5
// (rank form of the trapezoidal ROC area). Empty when only one class is
// present in `truth`.
std::optional<double> auroc(const std::vector<int>& truth, const Vec& scores);

double rmse(const Vec& a, const Vec& b);

// Pearson correlation; empty when either side has zero variance.
std::optional<double> pearson_cc(const Vec& a, const Vec& b);

struct SubjectSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // most extreme points within 1.5*IQR fences
  double whisker_high = 0.0;
};

// Box-plot statistics over per-subject metric values. Quartiles use linear
// interpolation at position (n-1)*q.
SubjectSummary subject_summary(const Vec& values);

}  // namespace cogadapt::evalkit
