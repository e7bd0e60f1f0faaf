#include "sleepgp/analysis.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace sleepgp {

nlohmann::json metrics_to_json(const MetricsReport& r) {
  nlohmann::json j;
  if (r.auc) j["auc"] = *r.auc;
  j["recall"] = r.recall;
  j["specificity"] = r.specificity;
  j["precision"] = r.precision;
  j["f1"] = r.f1;
  j["confusion"] = {{"tp", r.confusion.tp},
                    {"fp", r.confusion.fp},
                    {"tn", r.confusion.tn},
                    {"fn", r.confusion.fn}};
  j["undefined"] = r.undefined;
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport r;
  if (j.contains("auc")) r.auc = j.at("auc").get<double>();
  r.recall = j.at("recall").get<double>();
  r.specificity = j.at("specificity").get<double>();
  r.precision = j.at("precision").get<double>();
  r.f1 = j.at("f1").get<double>();
  const auto& c = j.at("confusion");
  r.confusion = {c.at("tp").get<long>(), c.at("fp").get<long>(),
                 c.at("tn").get<long>(), c.at("fn").get<long>()};
  r.undefined = j.value("undefined", std::vector<std::string>{});
  return r;
}

nlohmann::json artifact_to_json(const RunArtifact& a) {
  nlohmann::json j;
  j["schema"] = "sleepgp-run/1";
  j["repetition"] = a.repetition;
  j["seed"] = a.seed;
  j["mode"] = a.mode;
  j["tree"] = a.tree_text;
  j["n_features"] = a.n_features;
  j["model"] = model_to_json(a.model);
  j["metrics"] = metrics_to_json(a.test_metrics);
  if (!a.subgroup_metrics.empty()) {
    nlohmann::json sg;
    for (const auto& [k, v] : a.subgroup_metrics) sg[k] = metrics_to_json(v);
    j["subgroups"] = std::move(sg);
  }
  j["dataset"] = a.dataset_manifest;
  j["config"] = a.config;
  if (!a.history.empty()) {
    std::vector<double> best, mean;
    for (const auto& g : a.history) {
      best.push_back(g.best);
      mean.push_back(g.mean);
    }
    j["history"] = {{"best", best}, {"mean", mean}};
  }
  return j;
}

RunArtifact artifact_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "sleepgp-run/1")
    throw data_error("artifact: unknown schema");
  RunArtifact a;
  a.repetition = j.at("repetition").get<int>();
  a.seed = j.at("seed").get<std::uint64_t>();
  a.mode = j.at("mode").get<std::string>();
  a.tree_text = j.at("tree").get<std::string>();
  a.n_features = j.at("n_features").get<int>();
  a.model = model_from_json(j.at("model"));
  a.test_metrics = metrics_from_json(j.at("metrics"));
  if (j.contains("subgroups"))
    for (const auto& [k, v] : j.at("subgroups").items())
      a.subgroup_metrics[k] = metrics_from_json(v);
  a.dataset_manifest = j.value("dataset", nlohmann::json::object());
  a.config = j.value("config", nlohmann::json::object());
  if (j.contains("history")) {
    auto best = j.at("history").at("best").get<std::vector<double>>();
    auto mean = j.at("history").at("mean").get<std::vector<double>>();
    for (size_t i = 0; i < best.size(); ++i) a.history.push_back({best[i], mean[i]});
  }
  return a;
}

RunArtifact load_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open artifact: " + path);
  nlohmann::json j;
  in >> j;
  return artifact_from_json(j);
}

void save_artifact(const RunArtifact& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open output file: " + path);
  out << artifact_to_json(a).dump(2) << '\n';
}

std::vector<long> feature_frequency(const std::vector<RunArtifact>& artifacts,
                                    int n_attrs, bool presence) {
  if (artifacts.empty()) throw data_error("feature_frequency: no artifacts");
  std::vector<long> freq(static_cast<size_t>(n_attrs), 0);
  for (const auto& a : artifacts) {
    if (a.tree_text.empty()) continue;  // baseline runs carry no tree
    GpTree t = parse_tree(a.tree_text);
    bool has_f = count_f_nodes(t) > 0;

    // A terminal counts when some ancestor is an F node; every terminal
    // counts when the tree has no F and the root is the single feature.
    // Terminals under nested F nodes still count once per occurrence.
    std::vector<long> local(static_cast<size_t>(n_attrs), 0);
    std::vector<std::pair<int, bool>> stack;  // (children left, under F)
    for (size_t i = 0; i < t.nodes.size(); ++i) {
      bool under = !has_f;
      if (!stack.empty()) {
        under = stack.back().second || !has_f;
        if (--stack.back().first == 0) stack.pop_back();
      }
      const GpNode& nd = t.nodes[i];
      bool self_f = nd.kind == GpNode::Kind::unary && nd.op == GpOp::fmark;
      if (nd.kind == GpNode::Kind::terminal && under) {
        if (nd.attr >= 0 && nd.attr < n_attrs)
          local[static_cast<size_t>(nd.attr)]++;
      }
      int ar = node_arity(nd);
      if (ar > 0) stack.emplace_back(ar, under || self_f);
    }
    for (int i = 0; i < n_attrs; ++i)
      freq[static_cast<size_t>(i)] += presence ? (local[static_cast<size_t>(i)] > 0)
                                               : local[static_cast<size_t>(i)];
  }
  return freq;
}

std::array<long, 3> channel_frequency(const std::vector<long>& freq) {
  if (freq.size() != 75)
    throw data_error("channel_frequency: expected 75 attribute counts");
  std::array<long, 3> out{0, 0, 0};
  for (size_t i = 0; i < 75; ++i) out[i / 25] += freq[i];
  return out;
}

DimensionStats dimension_stats(const std::vector<RunArtifact>& artifacts) {
  if (artifacts.empty()) throw data_error("dimension_stats: no artifacts");
  DimensionStats st;
  std::vector<int> dims;
  for (const auto& a : artifacts) {
    st.histogram[a.n_features]++;
    dims.push_back(a.n_features);
  }
  std::sort(dims.begin(), dims.end());
  st.median = dims[(dims.size() - 1) / 2];
  return st;
}

std::map<std::string, MetricsReport> subgroup_eval(const RunArtifact& artifact,
                                                   const LabeledDataset& test,
                                                   const std::string& group_key) {
  auto it = test.row_groups.find(group_key);
  if (it == test.row_groups.end())
    throw data_error("subgroup_eval: unknown group key '" + group_key + "'");
  const auto& vals = it->second;

  Matrix features;
  if (artifact.tree_text.empty()) {
    features = test.features.rows;
  } else {
    GpTree t = parse_tree(artifact.tree_text);
    features = extract_features(t, test.features);
  }

  std::set<std::string> groups(vals.begin(), vals.end());
  std::map<std::string, MetricsReport> out;
  for (const auto& g : groups) {
    Matrix gx;
    std::vector<int> gy;
    for (size_t i = 0; i < vals.size(); ++i)
      if (vals[i] == g) {
        gx.push_back(features[i]);
        gy.push_back(test.labels[i]);
      }
    auto scores = predict_score(artifact.model, gx);
    auto pred = predict_label(artifact.model, gx);
    MetricsReport r = confusion_metrics(pred, gy);
    bool single_class =
        std::all_of(gy.begin(), gy.end(), [&](int v) { return v == gy[0]; });
    if (single_class)
      r.undefined.push_back("auc");
    else
      r.auc = roc_auc(scores, gy);
    out[g] = std::move(r);
  }
  return out;
}

}  // namespace sleepgp
