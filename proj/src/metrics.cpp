#include "pollnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "pollnet/errors.hpp"

namespace pollnet {

ConfusionMatrix confusion(std::span<const int> truths, std::span<const int> preds, int k) {
  if (truths.size() != preds.size()) {
    throw UsageError("confusion: truth and prediction lengths differ");
  }
  if (k < 1) throw UsageError("confusion: class count must be positive");
  ConfusionMatrix cm;
  cm.counts = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>::Zero(k, k);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i];
    const int p = preds[i];
    if (t < 0 || t >= k || p < 0 || p >= k) {
      throw UsageError("confusion: class index outside 0.." + std::to_string(k - 1) + " at row " +
                       std::to_string(i));
    }
    cm.counts(t, p) += 1;
  }
  cm.total = static_cast<std::int64_t>(truths.size());
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total <= 0) throw UsageError("accuracy: empty confusion matrix");
  return static_cast<double>(cm.counts.trace()) / static_cast<double>(cm.total);
}

RocCurve roc(std::span<const double> scores, const std::vector<bool>& positives, int class_index) {
  if (scores.size() != positives.size()) {
    throw UsageError("roc: score and label lengths differ");
  }
  const auto n = scores.size();
  const auto n_pos = static_cast<std::size_t>(
      std::count(positives.begin(), positives.end(), true));
  const auto n_neg = n - n_pos;
  if (n_pos == 0) throw UsageError("roc: no positive samples");
  if (n_neg == 0) throw UsageError("roc: no negative samples");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.class_index = class_index;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  double auc = 0.0;
  RocPoint prev{0.0, 0.0};
  std::size_t i = 0;
  while (i < n) {
    // All samples sharing a score cross the threshold together.
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      if (positives[order[j]]) ++tp; else ++fp;
      ++j;
    }
    const RocPoint point{static_cast<double>(fp) / static_cast<double>(n_neg),
                         static_cast<double>(tp) / static_cast<double>(n_pos)};
    auc += (point.fpr - prev.fpr) * (point.tpr + prev.tpr) / 2.0;
    curve.points.push_back(point);
    prev = point;
    i = j;
  }
  curve.auc = auc;
  return curve;
}

RocSet multi_roc(const Eigen::Ref<const Eigen::MatrixXd>& out_acts, std::span<const int> truths,
                 int k) {
  if (out_acts.cols() != k) {
    throw UsageError("multi_roc: score matrix has " + std::to_string(out_acts.cols()) +
                     " columns, expected " + std::to_string(k));
  }
  if (static_cast<std::size_t>(out_acts.rows()) != truths.size()) {
    throw UsageError("multi_roc: score rows and truth length differ");
  }
  RocSet set;
  for (int c = 0; c < k; ++c) {
    std::vector<bool> positives(truths.size());
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      positives[i] = truths[i] == c;
      n_pos += positives[i] ? 1 : 0;
    }
    if (n_pos == 0 || n_pos == truths.size()) {
      set.missing_classes.push_back(c);
      continue;
    }
    std::vector<double> scores(truths.size());
    for (std::size_t i = 0; i < truths.size(); ++i) {
      scores[i] = out_acts(static_cast<Eigen::Index>(i), c);
    }
    set.curves.push_back(roc(scores, positives, c));
  }
  return set;
}

ErrorHistogram error_histogram(const std::vector<std::vector<double>>& subsets, int bin_count) {
  if (bin_count < 1) throw UsageError("error_histogram: bin count must be positive");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t total = 0;
  for (const auto& subset : subsets) {
    for (const double value : subset) {
      lo = std::min(lo, value);
      hi = std::max(hi, value);
      ++total;
    }
  }
  if (total == 0) throw UsageError("error_histogram: no error values");

  // Degenerate pooled range: center one unit-wide span on the value.
  if (hi - lo == 0 || lo + (hi - lo) / bin_count == lo) {
    lo -= 0.5;
    hi += 0.5;
  }

  ErrorHistogram histogram;
  histogram.bin_edges.resize(static_cast<std::size_t>(bin_count) + 1);
  for (int b = 0; b <= bin_count; ++b) {
    histogram.bin_edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bin_count;
  }
  histogram.bin_edges.front() = lo;
  // Widen the top edge one ulp so [edge, next) placement keeps the maximum.
  histogram.bin_edges.back() = std::nextafter(hi, std::numeric_limits<double>::infinity());

  histogram.counts.reserve(subsets.size());
  for (const auto& subset : subsets) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bin_count), 0);
    for (const double value : subset) {
      const auto upper = std::upper_bound(histogram.bin_edges.begin(), histogram.bin_edges.end(),
                                          value);
      auto bin = static_cast<std::ptrdiff_t>(upper - histogram.bin_edges.begin()) - 1;
      bin = std::clamp<std::ptrdiff_t>(bin, 0, bin_count - 1);
      counts[static_cast<std::size_t>(bin)] += 1;
    }
    histogram.counts.push_back(std::move(counts));
  }
  return histogram;
}

}  // namespace pollnet
