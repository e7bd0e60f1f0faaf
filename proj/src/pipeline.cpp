#include "sleepgp/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sleepgp/metrics.hpp"
#include "sleepgp/pca.hpp"
#include "sleepgp/rng.hpp"

namespace sleepgp {

std::uint64_t repetition_seed(std::uint64_t master_seed, int repetition) {
  return derive_seed(master_seed, 101, static_cast<std::uint64_t>(repetition));
}

std::vector<InputRecording> load_inputs(const ExperimentConfig& cfg) {
  std::vector<InputRecording> inputs;
  if (cfg.use_synth) {
    SynthResult sr = synth_recording(cfg.synth, cfg.master_seed);
    inputs.push_back({std::move(sr.recording), std::move(sr.expert1), std::move(sr.expert2)});
    return inputs;
  }
  for (size_t i = 0; i < cfg.edf_paths.size(); ++i) {
    InputRecording in;
    in.recording = read_edf_file(cfg.edf_paths[i]);
    auto read_ann = [&](const std::string& path, int expert) {
      std::ifstream f(path);
      if (!f) throw data_error("cannot open annotation file: " + path);
      std::stringstream ss;
      ss << f.rdbuf();
      return read_annotations(ss.str(), expert, cfg.ann_header_lines,
                              cfg.ann_min_duration_s);
    };
    in.ann1 = read_ann(cfg.ann1_paths[i], 1);
    in.ann2 = read_ann(cfg.ann2_paths[i], 2);
    inputs.push_back(std::move(in));
  }
  return inputs;
}

PreparedRecording prepare_recording(const ExperimentConfig& cfg,
                                    const InputRecording& input) {
  Recording rec;
  rec.subject_meta = input.recording.subject_meta;
  for (const auto& ch : input.recording.channels)
    rec.channels.push_back(std::abs(ch.rate_hz - 256.0) < 1e-9
                               ? ch
                               : resample_cubic(ch, 256.0));

  WaveletSpec w = WaveletSpec::by_name(cfg.wavelet);
  PreparedRecording out;
  out.features = build_feature_matrix(rec, w, cfg.padding, cfg.window_s);
  if (cfg.channel == "central")
    out.features = channel_filter(out.features, EegChannel::central);
  else if (cfg.channel == "fp1")
    out.features = channel_filter(out.features, EegChannel::fp1);
  else if (cfg.channel == "o1")
    out.features = channel_filter(out.features, EegChannel::o1);

  out.ann1 = input.ann1;
  out.ann2 = input.ann2;
  auto sex = rec.subject_meta.find("sex");
  out.row_groups["sex"] = std::vector<std::string>(
      out.features.n_rows(), sex == rec.subject_meta.end() ? "unknown" : sex->second);
  return out;
}

RepetitionData make_repetition_data(const ExperimentConfig& cfg,
                                    const std::vector<PreparedRecording>& prepared,
                                    std::uint64_t rep_seed) {
  RepetitionData data;
  nlohmann::json recs = nlohmann::json::array();
  for (size_t i = 0; i < prepared.size(); ++i) {
    const auto& pr = prepared[i];
    std::uint64_t split_seed = derive_seed(rep_seed, 7, i);
    SplitResult split =
        split_train_test(pr.features, pr.ann1, pr.ann2, cfg.split_ratio, split_seed,
                         cfg.window_s, cfg.overlap_s, pr.row_groups);
    recs.push_back({{"recording", i},
                    {"split_seed", split_seed},
                    {"n_windows", pr.features.n_rows()},
                    {"n_train", split.train.size()},
                    {"n_test", split.test.size()}});
    if (i == 0) {
      data.train = std::move(split.train);
      data.test = std::move(split.test);
    } else {
      data.train = concat(data.train, split.train);
      data.test = concat(data.test, split.test);
    }
  }

  auto count_pos = [](const LabeledDataset& ds) {
    long p = 0;
    for (int y : ds.labels) p += y;
    return p;
  };
  long train_pos_before = count_pos(data.train);
  if (cfg.balance) data.train = balance_undersample(data.train, derive_seed(rep_seed, 11));

  data.manifest = {{"recordings", recs},
                   {"attr_names", data.train.features.attr_names},
                   {"train_pos_before_balance", train_pos_before},
                   {"n_train", data.train.size()},
                   {"train_pos", count_pos(data.train)},
                   {"n_test", data.test.size()},
                   {"test_pos", count_pos(data.test)},
                   {"balanced", cfg.balance}};
  return data;
}

RunArtifact run_repetition(const ExperimentConfig& cfg,
                           const std::vector<PreparedRecording>& prepared,
                           int repetition, std::uint64_t rep_seed) {
  RepetitionData data = make_repetition_data(cfg, prepared, rep_seed);

  RunArtifact art;
  art.repetition = repetition;
  art.seed = rep_seed;
  art.mode = cfg.baseline;
  art.dataset_manifest = data.manifest;
  art.config = config_to_json(cfg);

  Matrix train_x, test_x;
  if (cfg.baseline == "gp") {
    EvolveResult evo = evolve(cfg.evo, data.train, cfg.classifier,
                              derive_seed(rep_seed, 13));
    art.tree_text = serialize(evo.best.tree);
    art.n_features = evo.best.n_features;
    art.history = std::move(evo.history);
    train_x = extract_features(evo.best.tree, data.train.features);
    test_x = extract_features(evo.best.tree, data.test.features);
  } else if (cfg.baseline == "full75") {
    art.n_features = static_cast<int>(data.train.features.n_cols());
    train_x = data.train.features.rows;
    test_x = data.test.features.rows;
  } else {  // pca
    PcaModel pca = pca_fit(data.train.features.rows, cfg.pca_threshold,
                           cfg.pca_standardize);
    art.n_features = pca.retained;
    train_x = pca_transform(pca, data.train.features.rows);
    test_x = pca_transform(pca, data.test.features.rows);
  }

  art.model = train_classifier(cfg.classifier, train_x, data.train.labels,
                               derive_seed(rep_seed, 17));

  auto scores = predict_score(art.model, test_x);
  auto pred = predict_label(art.model, test_x);
  art.test_metrics = confusion_metrics(pred, data.test.labels);
  bool single_class = std::all_of(data.test.labels.begin(), data.test.labels.end(),
                                  [&](int v) { return v == data.test.labels[0]; });
  if (single_class)
    art.test_metrics.undefined.push_back("auc");
  else
    art.test_metrics.auc = roc_auc(scores, data.test.labels);

  if (!cfg.group_key.empty())
    art.subgroup_metrics = subgroup_eval(art, data.test, cfg.group_key);
  return art;
}

namespace {

double vector_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double vector_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = vector_mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

double lower_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v.empty() ? 0.0 : v[(v.size() - 1) / 2];
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  auto inputs = load_inputs(cfg);
  std::vector<PreparedRecording> prepared;
  prepared.reserve(inputs.size());
  for (const auto& in : inputs) prepared.push_back(prepare_recording(cfg, in));

  ExperimentResult res;
  std::vector<double> aucs, n_feats;
  nlohmann::json per_rep = nlohmann::json::array();
  for (int r = 0; r < cfg.repetitions; ++r) {
    std::uint64_t rs = repetition_seed(cfg.master_seed, r);
    RunArtifact art = run_repetition(cfg, prepared, r, rs);
    nlohmann::json row = {{"repetition", r},
                          {"seed", rs},
                          {"n_features", art.n_features},
                          {"recall", art.test_metrics.recall},
                          {"specificity", art.test_metrics.specificity},
                          {"precision", art.test_metrics.precision},
                          {"f1", art.test_metrics.f1}};
    if (art.test_metrics.auc) {
      row["auc"] = *art.test_metrics.auc;
      aucs.push_back(*art.test_metrics.auc);
    }
    n_feats.push_back(static_cast<double>(art.n_features));
    per_rep.push_back(std::move(row));
    res.artifacts.push_back(std::move(art));
  }

  res.aggregate = {{"schema", "sleepgp-aggregate/1"},
                   {"config_hash", config_hash(cfg)},
                   {"master_seed", cfg.master_seed},
                   {"mode", cfg.baseline},
                   {"classifier", to_string(cfg.classifier.kind)},
                   {"repetitions", cfg.repetitions},
                   {"per_repetition", per_rep},
                   {"auc",
                    {{"values", aucs},
                     {"mean", vector_mean(aucs)},
                     {"sd", vector_sd(aucs)},
                     {"median", lower_median(aucs)}}},
                   {"n_features",
                    {{"values", n_feats}, {"median", lower_median(n_feats)}}}};
  return res;
}

ExperimentResult run_experiment_to_dir(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);

  ExperimentResult res = run_experiment(cfg);

  std::vector<std::string> files;
  for (const auto& art : res.artifacts) {
    std::string name = "rep_" + std::to_string(art.repetition) + ".json";
    save_artifact(art, cfg.out_dir + "/" + name);
    files.push_back(name);
  }

  {
    std::ofstream out(cfg.out_dir + "/aggregate.json");
    if (!out) throw data_error("cannot write aggregate report");
    out << res.aggregate.dump(2) << '\n';
    files.push_back("aggregate.json");
  }
  {
    std::ofstream out(cfg.out_dir + "/aggregate_auc.csv");
    out << "repetition,auc,n_features\n";
    for (const auto& art : res.artifacts) {
      out << art.repetition << ',';
      if (art.test_metrics.auc) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9g", *art.test_metrics.auc);
        out << buf;
      }
      out << ',' << art.n_features << '\n';
    }
    files.push_back("aggregate_auc.csv");
  }
  {
    nlohmann::json manifest = {{"config_hash", config_hash(cfg)},
                               {"master_seed", cfg.master_seed},
                               {"repetition_seeds", [&] {
                                  std::vector<std::uint64_t> s;
                                  for (int r = 0; r < cfg.repetitions; ++r)
                                    s.push_back(repetition_seed(cfg.master_seed, r));
                                  return s;
                                }()},
                               {"files", files}};
    std::ofstream out(cfg.out_dir + "/manifest.json");
    out << manifest.dump(2) << '\n';
  }
  return res;
}

}  // namespace sleepgp
