#include "evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cogadapt::evalkit {

namespace {

void require_paired(std::size_t a, std::size_t b, const std::string& who) {
  if (a != b) throw DimensionError(who + ": length mismatch");
  if (a == 0) throw DimensionError(who + ": empty input");
}

}  // namespace

double accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
  require_paired(truth.size(), pred.size(), "accuracy");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == pred[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double macro_f1(const std::vector<int>& truth, const std::vector<int>& pred,
                int n_classes) {
  require_paired(truth.size(), pred.size(), "macro_f1");
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < n_classes; ++c) {
    std::size_t tp = 0, fp = 0, fn = 0, support = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      bool is_c = truth[i] == c;
      bool said_c = pred[i] == c;
      support += is_c;
      tp += is_c && said_c;
      fp += !is_c && said_c;
      fn += is_c && !said_c;
    }
    if (support == 0) continue;  // absent class does not dilute the mean
    present += 1;
    double denom = 2.0 * tp + fp + fn;
    sum += denom == 0.0 ? 0.0 : 2.0 * tp / denom;
  }
  if (present == 0) throw RuntimeError("macro_f1: no class present");
  return sum / present;
}

std::optional<double> auroc(const std::vector<int>& truth, const Vec& scores) {
  require_paired(truth.size(), scores.size(), "auroc");
  std::size_t n = truth.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Midranks over ties, then the Mann-Whitney statistic.
  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (truth[order[k]] == 1) {
        rank_sum_pos += midrank;
        ++n_pos;
      } else {
        ++n_neg;
      }
    }
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  double u = rank_sum_pos - static_cast<double>(n_pos) * (n_pos + 1) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double rmse(const Vec& a, const Vec& b) {
  require_paired(a.size(), b.size(), "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(a.size()));
}

std::optional<double> pearson_cc(const Vec& a, const Vec& b) {
  require_paired(a.size(), b.size(), "pearson_cc");
  double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

namespace {

double quantile_sorted(const Vec& v, double q) {
  double pos = q * static_cast<double>(v.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

SubjectSummary subject_summary(const Vec& values) {
  if (values.empty()) throw DimensionError("subject_summary: empty input");
  Vec v = values;
  std::sort(v.begin(), v.end());

  SubjectSummary s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double var = 0.0;
  for (double x : v) var += (x - s.mean) * (x - s.mean);
  s.stddev = std::sqrt(var / v.size());
  s.median = quantile_sorted(v, 0.5);
  s.q1 = quantile_sorted(v, 0.25);
  s.q3 = quantile_sorted(v, 0.75);

  double iqr = s.q3 - s.q1;
  double lo_fence = s.q1 - 1.5 * iqr;
  double hi_fence = s.q3 + 1.5 * iqr;
  s.whisker_low = v.back();
  s.whisker_high = v.front();
  for (double x : v) {
    if (x >= lo_fence) {
      s.whisker_low = x;
      break;
    }
  }
  for (auto it = v.rbegin(); it != v.rend(); ++it) {
    if (*it <= hi_fence) {
      s.whisker_high = *it;
      break;
    }
  }
  return s;
}

}  // namespace cogadapt::evalkit
