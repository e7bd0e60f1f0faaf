#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sleepgp/classifiers.hpp"
#include "sleepgp/dataset.hpp"
#include "sleepgp/gp.hpp"
#include "sleepgp/metrics.hpp"

namespace sleepgp {

// Everything one repetition produces: the winning tree, the trained
// classifier, test metrics, and the seeds/config needed to reproduce it.
struct RunArtifact {
  int repetition = 0;
  std::uint64_t seed = 0;
  std::string mode = "gp";  // gp | full75 | pca
  std::string tree_text;    // empty for baselines
  int n_features = 0;
  Model model;
  MetricsReport test_metrics;
  std::map<std::string, MetricsReport> subgroup_metrics;
  nlohmann::json dataset_manifest;
  nlohmann::json config;
  std::vector<GenStats> history;
};

nlohmann::json metrics_to_json(const MetricsReport& r);
MetricsReport metrics_from_json(const nlohmann::json& j);
nlohmann::json artifact_to_json(const RunArtifact& a);
RunArtifact artifact_from_json(const nlohmann::json& j);
RunArtifact load_artifact(const std::string& path);
void save_artifact(const RunArtifact& a, const std::string& path);

// Occurrences of each attribute terminal inside F-marked subtrees of the
// best trees (the whole tree when it has no F node). With presence=true each
// artifact contributes at most 1 per attribute.
std::vector<long> feature_frequency(const std::vector<RunArtifact>& artifacts,
                                    int n_attrs, bool presence = false);

// Per-channel sums of a canonical 75-attribute frequency vector.
std::array<long, 3> channel_frequency(const std::vector<long>& freq);

struct DimensionStats {
  std::map<int, int> histogram;  // n_features -> count
  int median = 0;                // lower-middle convention for even counts
};

DimensionStats dimension_stats(const std::vector<RunArtifact>& artifacts);

// Metrics per distinct value of a row-group key, using the artifact's model.
// Groups whose labels are single-class get confusion metrics but no AUC.
std::map<std::string, MetricsReport> subgroup_eval(const RunArtifact& artifact,
                                                   const LabeledDataset& test,
                                                   const std::string& group_key);

}  // namespace sleepgp
