#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sleepgp/pipeline.hpp"

namespace fs = std::filesystem;
using namespace sleepgp;

namespace {

struct CliOverrides {
  std::string config_path;
  std::string out;
  std::string classifier;
  std::string baseline;
  std::string channel;
  std::string label_mode;
  std::string group_key;
  long seed = -1;
  int reps = -1;
  int threads = -1;
  std::vector<std::string> edf, ann1, ann2;
};

ExperimentConfig make_config(const CliOverrides& o, bool synth_fallback) {
  IniFile ini;
  if (!o.config_path.empty()) ini = read_ini_file(o.config_path);

  if (!o.edf.empty()) {
    ini.sections["input"]["edf"] = "";
    ini.sections.erase("synth");
  }
  if (ini.sections.count("synth") == 0 && ini.get_list("input", "edf").empty() &&
      o.edf.empty() && synth_fallback)
    ini.sections["synth"];  // default synthetic input

  ExperimentConfig cfg = config_from_ini(ini);
  if (!o.edf.empty()) {
    cfg.edf_paths = o.edf;
    cfg.ann1_paths = o.ann1;
    cfg.ann2_paths = o.ann2;
    cfg.use_synth = false;
    if (cfg.ann1_paths.size() != cfg.edf_paths.size() ||
        cfg.ann2_paths.size() != cfg.edf_paths.size())
      throw config_error("--ann1/--ann2 must be given once per --edf");
  }
  if (o.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(o.seed);
  if (o.reps > 0) cfg.repetitions = o.reps;
  if (o.threads > 0) cfg.evo.n_threads = o.threads;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.classifier.empty())
    cfg.classifier.kind = classifier_kind_from_string(o.classifier);
  if (!o.baseline.empty()) {
    if (o.baseline != "gp" && o.baseline != "full75" && o.baseline != "pca")
      throw config_error("--baseline: expected gp, full75 or pca");
    cfg.baseline = o.baseline;
  }
  if (!o.channel.empty()) {
    if (o.channel != "all" && o.channel != "central" && o.channel != "fp1" &&
        o.channel != "o1")
      throw config_error("--channel: expected all, central, fp1 or o1");
    cfg.channel = o.channel;
  }
  if (!o.label_mode.empty()) {
    if (o.label_mode != "both" && o.label_mode != "either")
      throw config_error("--label-mode: expected both or either");
    cfg.label_mode = o.label_mode;
  }
  if (!o.group_key.empty()) cfg.group_key = o.group_key;
  return cfg;
}

int cmd_synth(const CliOverrides& o) {
  ExperimentConfig cfg = make_config(o, true);
  if (!cfg.use_synth) throw config_error("synth: config must use a [synth] input");

  fs::create_directories(cfg.out_dir);
  SynthResult sr = synth_recording(cfg.synth, cfg.master_seed);
  write_edf_file(sr.recording, cfg.out_dir + "/synthetic.edf");
  {
    std::ofstream a1(cfg.out_dir + "/expert1.txt"), a2(cfg.out_dir + "/expert2.txt");
    if (!a1 || !a2) throw data_error("cannot write annotation files");
    a1 << format_annotations(sr.expert1);
    a2 << format_annotations(sr.expert2);
  }
  nlohmann::json manifest = {
      {"config_hash", config_hash(cfg)},
      {"seed", cfg.master_seed},
      {"files", {"synthetic.edf", "expert1.txt", "expert2.txt"}}};
  std::ofstream mf(cfg.out_dir + "/manifest.json");
  mf << manifest.dump(2) << '\n';
  std::cout << "wrote " << cfg.out_dir << "/synthetic.edf (+2 annotation files)\n";
  return 0;
}

int cmd_extract(const CliOverrides& o) {
  ExperimentConfig cfg = make_config(o, true);
  std::string out_path = o.out.empty() ? "features.csv" : o.out;

  auto inputs = load_inputs(cfg);
  FeatureMatrix all;
  for (const auto& in : inputs) {
    PreparedRecording pr = prepare_recording(cfg, in);
    auto labels = label_windows(pr.ann1, pr.ann2,
                                static_cast<int>(pr.features.n_rows()), cfg.window_s,
                                cfg.label_mode == "both" ? LabelMode::both
                                                         : LabelMode::either,
                                cfg.overlap_s);
    pr.features.labels = labels;
    if (all.attr_names.empty()) {
      all = std::move(pr.features);
    } else {
      if (all.attr_names != pr.features.attr_names)
        throw data_error("extract: recordings produce different attribute sets");
      all.rows.insert(all.rows.end(), pr.features.rows.begin(), pr.features.rows.end());
      all.window_index.insert(all.window_index.end(), pr.features.window_index.begin(),
                              pr.features.window_index.end());
      all.labels->insert(all.labels->end(), labels.begin(), labels.end());
    }
  }
  write_csv_file(all, out_path);
  std::cout << "wrote " << out_path << " (" << all.n_rows() << " x "
            << all.n_cols() << " + window_index + label)\n";
  return 0;
}

int cmd_run(const CliOverrides& o) {
  ExperimentConfig cfg = make_config(o, true);
  ExperimentResult res = run_experiment_to_dir(cfg);
  const auto& agg = res.aggregate;
  std::cout << "mode " << cfg.baseline << ", classifier "
            << to_string(cfg.classifier.kind) << ", " << cfg.repetitions
            << " repetitions\n"
            << "AUC mean " << agg["auc"]["mean"] << ", sd " << agg["auc"]["sd"]
            << ", median " << agg["auc"]["median"] << '\n'
            << "median constructed features "
            << agg["n_features"]["median"] << '\n'
            << "artifacts in " << cfg.out_dir << '\n';
  return 0;
}

int cmd_analyze(const std::string& dir, const std::string& out_dir_opt,
                bool presence) {
  std::vector<RunArtifact> artifacts;
  std::vector<fs::path> paths;
  if (!fs::is_directory(dir)) throw data_error("analyze: not a directory: " + dir);
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string name = e.path().filename().string();
    if (name.rfind("rep_", 0) == 0 && e.path().extension() == ".json")
      paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) artifacts.push_back(load_artifact(p.string()));
  if (artifacts.empty()) throw data_error("analyze: no rep_*.json artifacts in " + dir);

  std::vector<std::string> attr_names =
      artifacts.front().dataset_manifest.value("attr_names", std::vector<std::string>{});
  if (attr_names.empty()) throw data_error("analyze: artifacts carry no attribute names");
  int n_attrs = static_cast<int>(attr_names.size());

  std::string out_dir = out_dir_opt.empty() ? dir : out_dir_opt;
  fs::create_directories(out_dir);

  auto freq = feature_frequency(artifacts, n_attrs, presence);
  auto channel_of = [](const std::string& name) -> std::string {
    if (name.rfind("ARG", 0) == 0) {
      int k = std::stoi(name.substr(3));
      return k < 25 ? "central" : k < 50 ? "fp1" : "o1";
    }
    return "n/a";
  };
  {
    std::ofstream out(out_dir + "/frequency.csv");
    out << "arg_index,name,count,channel\n";
    for (int i = 0; i < n_attrs; ++i)
      out << i << ',' << attr_names[static_cast<size_t>(i)] << ','
          << freq[static_cast<size_t>(i)] << ','
          << channel_of(attr_names[static_cast<size_t>(i)]) << '\n';
  }

  DimensionStats dims = dimension_stats(artifacts);
  {
    std::ofstream out(out_dir + "/dimensions.csv");
    out << "n_features,count\n";
    for (const auto& [k, v] : dims.histogram) out << k << ',' << v << '\n';
  }

  nlohmann::json summary;
  summary["artifacts"] = artifacts.size();
  summary["median_n_features"] = dims.median;
  if (n_attrs == 75) {
    auto ch = channel_frequency(freq);
    summary["channel_frequency"] = {{"central", ch[0]}, {"fp1", ch[1]}, {"o1", ch[2]}};
  }
  bool any_subgroups = false;
  nlohmann::json sg = nlohmann::json::object();
  for (const auto& a : artifacts)
    for (const auto& [k, v] : a.subgroup_metrics) {
      sg[k].push_back(metrics_to_json(v));
      any_subgroups = true;
    }
  if (any_subgroups) summary["subgroups"] = sg;
  {
    std::ofstream out(out_dir + "/summary.json");
    out << summary.dump(2) << '\n';
  }
  std::cout << "analyzed " << artifacts.size() << " artifacts -> " << out_dir
            << "/{frequency.csv,dimensions.csv,summary.json}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sleep EEG event detection via GP feature construction"};
  app.require_subcommand(1);

  CliOverrides o;
  std::string analyze_dir, analyze_out;
  bool presence = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config_path, "experiment config file (INI)");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output directory or file");
  };

  CLI::App* synth = app.add_subcommand("synth", "write a synthetic EDF + annotations");
  add_common(synth);

  CLI::App* extract = app.add_subcommand("extract", "feature CSV from a recording");
  add_common(extract);
  extract->add_option("--edf", o.edf, "EDF input path(s)");
  extract->add_option("--ann1", o.ann1, "expert 1 annotation file(s)");
  extract->add_option("--ann2", o.ann2, "expert 2 annotation file(s)");
  extract->add_option("--channel", o.channel, "all|central|fp1|o1");
  extract->add_option("--label-mode", o.label_mode, "both|either");

  CLI::App* run = app.add_subcommand("run", "full experiment with repetitions");
  add_common(run);
  run->add_option("--edf", o.edf, "EDF input path(s)");
  run->add_option("--ann1", o.ann1, "expert 1 annotation file(s)");
  run->add_option("--ann2", o.ann2, "expert 2 annotation file(s)");
  run->add_option("--classifier", o.classifier, "knn|gaussian_nb|decision_tree|mlp");
  run->add_option("--baseline", o.baseline, "gp|full75|pca");
  run->add_option("--channel", o.channel, "all|central|fp1|o1");
  run->add_option("--reps", o.reps, "repetition count");
  run->add_option("--threads", o.threads, "fitness evaluation threads");
  run->add_option("--group-key", o.group_key, "row group key for subgroup metrics");

  CLI::App* analyze = app.add_subcommand("analyze", "cross-run feature analyses");
  analyze->add_option("dir", analyze_dir, "artifact directory")->required();
  analyze->add_option("--out", analyze_out, "output directory (default: artifact dir)");
  analyze->add_flag("--presence", presence,
                    "count per-artifact presence instead of occurrences");

  try {
    app.parse(argc, argv);
    if (synth->parsed()) return cmd_synth(o);
    if (extract->parsed()) return cmd_extract(o);
    if (run->parsed()) return cmd_run(o);
    if (analyze->parsed()) return cmd_analyze(analyze_dir, analyze_out, presence);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
