#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sleepgp/common.hpp"

namespace sleepgp {

struct Confusion {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

struct MetricsReport {
  std::optional<double> auc;
  double recall = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  double f1 = 0.0;
  Confusion confusion;
  // Names of metrics whose denominator was zero (reported as 0).
  std::vector<std::string> undefined;
};

// Mann-Whitney AUC: (#pos-above-neg pairs + 0.5 * #ties) / (n_pos * n_neg).
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

MetricsReport confusion_metrics(const std::vector<int>& pred,
                                const std::vector<int>& labels);

// (fpr, tpr) points for plotting, threshold swept from high to low.
std::vector<std::pair<double, double>> roc_points(const std::vector<double>& scores,
                                                  const std::vector<int>& labels);

}  // namespace sleepgp
