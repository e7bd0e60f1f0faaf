#include "sleepgp/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sleepgp/rng.hpp"

namespace sleepgp {

namespace {

std::vector<int> expert_window_labels(const AnnotationSet& ann, int n_windows,
                                      double window_s, double abs_overlap_s) {
  std::vector<int> lab(static_cast<size_t>(n_windows), 0);
  for (const auto& ev : ann.events) {
    double threshold = std::min(abs_overlap_s, 0.5 * ev.duration_s);
    double ev_end = ev.onset_s + ev.duration_s;
    auto k0 = static_cast<long>(std::floor(ev.onset_s / window_s));
    auto k1 = static_cast<long>(std::floor(ev_end / window_s));
    for (long k = std::max(0L, k0); k <= k1 && k < n_windows; ++k) {
      double w_lo = k * window_s, w_hi = (k + 1) * window_s;
      double overlap = std::min(ev_end, w_hi) - std::max(ev.onset_s, w_lo);
      if (overlap >= threshold) lab[static_cast<size_t>(k)] = 1;
    }
  }
  return lab;
}

}  // namespace

std::vector<int> label_windows(const AnnotationSet& ann1, const AnnotationSet& ann2,
                               int n_windows, double window_s, LabelMode mode,
                               double abs_overlap_s) {
  if (n_windows <= 0) throw data_error("label_windows: window count must be positive");
  auto l1 = expert_window_labels(ann1, n_windows, window_s, abs_overlap_s);
  auto l2 = expert_window_labels(ann2, n_windows, window_s, abs_overlap_s);
  std::vector<int> out(l1.size());
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = mode == LabelMode::both ? (l1[i] & l2[i]) : (l1[i] | l2[i]);
  return out;
}

namespace {

LabeledDataset take_rows(const FeatureMatrix& features, const std::vector<int>& labels,
                         const std::vector<size_t>& idx,
                         const std::map<std::string, std::vector<std::string>>& groups) {
  LabeledDataset ds;
  ds.features.attr_names = features.attr_names;
  ds.features.rows.reserve(idx.size());
  ds.features.window_index.reserve(idx.size());
  ds.labels.reserve(idx.size());
  for (size_t i : idx) {
    ds.features.rows.push_back(features.rows[i]);
    ds.features.window_index.push_back(features.window_index[i]);
    ds.labels.push_back(labels[i]);
  }
  ds.features.labels = ds.labels;
  for (const auto& [key, vals] : groups) {
    std::vector<std::string> sub;
    sub.reserve(idx.size());
    for (size_t i : idx) sub.push_back(vals[i]);
    ds.row_groups[key] = std::move(sub);
  }
  return ds;
}

}  // namespace

SplitResult split_train_test(const FeatureMatrix& features, const AnnotationSet& ann1,
                             const AnnotationSet& ann2, double ratio,
                             std::uint64_t seed, double window_s,
                             double abs_overlap_s,
                             const std::map<std::string, std::vector<std::string>>&
                                 row_groups) {
  if (ratio <= 0.0 || ratio >= 1.0)
    throw config_error("split: ratio must be inside (0, 1)");
  const size_t n = features.n_rows();
  auto n_train = static_cast<size_t>(std::ceil(ratio * static_cast<double>(n)));
  if (n_train < 2 || n - n_train < 2)
    throw data_error("split: fewer than 2 rows in a split");

  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng_t rng(derive_seed(seed, 17));
  for (size_t i = n - 1; i > 0; --i) {
    size_t j = rng.uniform_index(i + 1);
    std::swap(perm[i], perm[j]);
  }

  auto wn = static_cast<int>(n);
  auto both = label_windows(ann1, ann2, wn, window_s, LabelMode::both, abs_overlap_s);
  auto either = label_windows(ann1, ann2, wn, window_s, LabelMode::either, abs_overlap_s);

  SplitResult res;
  res.train_idx.assign(perm.begin(), perm.begin() + static_cast<long>(n_train));
  res.test_idx.assign(perm.begin() + static_cast<long>(n_train), perm.end());
  res.train = take_rows(features, both, res.train_idx, row_groups);
  res.test = take_rows(features, either, res.test_idx, row_groups);
  res.train.meta["split"] = "train";
  res.test.meta["split"] = "test";
  return res;
}

LabeledDataset balance_undersample(const LabeledDataset& ds, std::uint64_t seed) {
  size_t pos = 0, neg = 0;
  for (int y : ds.labels) (y ? pos : neg)++;
  if (pos == 0 || neg == 0)
    throw data_error("balance: both classes must be present");
  if (pos == neg) return ds;

  int majority = pos > neg ? 1 : 0;
  size_t remove = pos > neg ? pos - neg : neg - pos;

  std::vector<size_t> maj_idx;
  for (size_t i = 0; i < ds.labels.size(); ++i)
    if (ds.labels[i] == majority) maj_idx.push_back(i);

  rng_t rng(derive_seed(seed, 23));
  for (size_t i = maj_idx.size() - 1; i > 0; --i) {
    size_t j = rng.uniform_index(i + 1);
    std::swap(maj_idx[i], maj_idx[j]);
  }
  std::vector<bool> drop(ds.labels.size(), false);
  for (size_t i = 0; i < remove; ++i) drop[maj_idx[i]] = true;

  std::vector<size_t> keep;
  for (size_t i = 0; i < ds.labels.size(); ++i)
    if (!drop[i]) keep.push_back(i);

  LabeledDataset out = [&] {
    LabeledDataset tmp;
    tmp.features.attr_names = ds.features.attr_names;
    for (size_t i : keep) {
      tmp.features.rows.push_back(ds.features.rows[i]);
      tmp.features.window_index.push_back(ds.features.window_index[i]);
      tmp.labels.push_back(ds.labels[i]);
    }
    tmp.features.labels = tmp.labels;
    for (const auto& [key, vals] : ds.row_groups) {
      std::vector<std::string> sub;
      for (size_t i : keep) sub.push_back(vals[i]);
      tmp.row_groups[key] = std::move(sub);
    }
    tmp.meta = ds.meta;
    return tmp;
  }();
  return out;
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.features.attr_names != b.features.attr_names)
    throw data_error("concat: attribute sets differ");
  LabeledDataset out = a;
  out.features.rows.insert(out.features.rows.end(), b.features.rows.begin(),
                           b.features.rows.end());
  out.features.window_index.insert(out.features.window_index.end(),
                                   b.features.window_index.begin(),
                                   b.features.window_index.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.features.labels = out.labels;
  for (auto& [key, vals] : out.row_groups) {
    auto it = b.row_groups.find(key);
    if (it == b.row_groups.end())
      throw data_error("concat: group key '" + key + "' missing on one side");
    vals.insert(vals.end(), it->second.begin(), it->second.end());
  }
  for (const auto& [key, vals] : b.row_groups)
    if (!out.row_groups.count(key))
      throw data_error("concat: group key '" + key + "' missing on one side");
  return out;
}

}  // namespace sleepgp
