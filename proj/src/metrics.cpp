#include "sleepgp/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace sleepgp {

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw data_error("roc_auc: score/label length mismatch");
  size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw data_error("roc_auc: both classes must be present");

  // Rank-sum formulation with average ranks over ties; exactly equal to the
  // pair-counting statistic.
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (size_t k = i; k <= j; ++k)
      if (labels[order[k]]) pos_rank_sum += avg_rank;
    i = j + 1;
  }
  double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

MetricsReport confusion_metrics(const std::vector<int>& pred,
                                const std::vector<int>& labels) {
  if (pred.size() != labels.size())
    throw data_error("confusion_metrics: length mismatch");
  MetricsReport r;
  for (size_t i = 0; i < pred.size(); ++i) {
    if (labels[i] && pred[i]) r.confusion.tp++;
    else if (labels[i] && !pred[i]) r.confusion.fn++;
    else if (!labels[i] && pred[i]) r.confusion.fp++;
    else r.confusion.tn++;
  }
  auto rate = [&](long num, long den, const char* name) {
    if (den == 0) {
      r.undefined.push_back(name);
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  r.recall = rate(r.confusion.tp, r.confusion.tp + r.confusion.fn, "recall");
  r.specificity = rate(r.confusion.tn, r.confusion.tn + r.confusion.fp, "specificity");
  r.precision = rate(r.confusion.tp, r.confusion.tp + r.confusion.fp, "precision");
  double pr = r.precision + r.recall;
  r.f1 = pr > 0.0 ? 2.0 * r.precision * r.recall / pr : 0.0;
  return r;
}

std::vector<std::pair<double, double>> roc_points(const std::vector<double>& scores,
                                                  const std::vector<int>& labels) {
  size_t n_pos = 0, n_neg = 0;
  for (int y : labels) (y ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw data_error("roc_points: both classes must be present");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  long tp = 0, fp = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    for (size_t k = i; k <= j; ++k) (labels[order[k]] ? tp : fp)++;
    pts.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                     static_cast<double>(tp) / static_cast<double>(n_pos));
    i = j + 1;
  }
  return pts;
}

}  // namespace sleepgp
