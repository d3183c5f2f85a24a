#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

namespace pollnet {

// k x k table of true class (rows) vs predicted class (columns).
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  std::int64_t total = 0;
};

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
};

// Threshold sweep over descending scores, one point per distinct threshold,
// anchored at (0,0) and (1,1); auc by the trapezoidal rule (ties earn half
// credit in the rank reading).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0;
  int class_index = 0;
};

// One-vs-rest curves; classes with no positive (or no negative) rows get no
// curve and are listed in missing_classes instead.
struct RocSet {
  std::vector<RocCurve> curves;
  std::vector<int> missing_classes;
};

// Uniform bins over the pooled [min, max]; the last edge is widened by one
// ulp so bins read uniformly as [lo, hi) with the maximum inside the last.
struct ErrorHistogram {
  std::vector<double> bin_edges;                   // bin_count + 1 edges
  std::vector<std::vector<std::int64_t>> counts;   // one row per subset
};

ConfusionMatrix confusion(std::span<const int> truths, std::span<const int> preds, int k);

// trace / total.
double accuracy(const ConfusionMatrix& cm);

RocCurve roc(std::span<const double> scores, const std::vector<bool>& positives, int class_index);

// Column c of out_acts scores class c against the rest.
RocSet multi_roc(const Eigen::Ref<const Eigen::MatrixXd>& out_acts, std::span<const int> truths,
                 int k);

ErrorHistogram error_histogram(const std::vector<std::vector<double>>& subsets, int bin_count);

}  // namespace pollnet
