#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sleepgp/features.hpp"
#include "sleepgp/signal_io.hpp"

namespace sleepgp {

struct LabeledDataset {
  FeatureMatrix features;
  std::vector<int> labels;
  std::map<std::string, std::string> meta;
  // Optional per-row group values (e.g. "sex"), parallel to the rows.
  std::map<std::string, std::vector<std::string>> row_groups;

  size_t size() const { return labels.size(); }
};

enum class LabelMode { both, either };

// Window k covers [k*window_s, (k+1)*window_s). Per expert, a window is
// positive iff some event overlaps it by at least
// min(abs_overlap_s, 0.5 * event_duration); the expert labels are then
// combined with AND (both) or OR (either).
std::vector<int> label_windows(const AnnotationSet& ann1, const AnnotationSet& ann2,
                               int n_windows, double window_s, LabelMode mode,
                               double abs_overlap_s = 0.5);

struct SplitResult {
  LabeledDataset train;  // consensus (both) labels
  LabeledDataset test;   // either-expert labels
  std::vector<size_t> train_idx;
  std::vector<size_t> test_idx;
};

// Seeded random row split: first ceil(ratio * n) of a random permutation go
// to the training set.
SplitResult split_train_test(const FeatureMatrix& features, const AnnotationSet& ann1,
                             const AnnotationSet& ann2, double ratio,
                             std::uint64_t seed, double window_s = 2.0,
                             double abs_overlap_s = 0.5,
                             const std::map<std::string, std::vector<std::string>>&
                                 row_groups = {});

// Randomly drop majority-class rows until the classes balance; kept rows
// stay in their original order.
LabeledDataset balance_undersample(const LabeledDataset& ds, std::uint64_t seed);

// Row-wise concatenation (multi-recording experiments).
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

}  // namespace sleepgp
