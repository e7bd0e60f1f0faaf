#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "sleepgp/classifiers.hpp"
#include "sleepgp/common.hpp"
#include "sleepgp/dwt.hpp"
#include "sleepgp/gp.hpp"
#include "sleepgp/signal_io.hpp"

namespace sleepgp {

// Flat key-value file with [section] headers, '#'/';' comments, and
// comma-separated lists. See README for the documented grammar.
struct IniFile {
  std::map<std::string, std::map<std::string, std::string>> sections;

  bool has(const std::string& sec, const std::string& key) const;
  std::string get(const std::string& sec, const std::string& key,
                  const std::string& fallback) const;
  double get_num(const std::string& sec, const std::string& key, double fallback) const;
  long get_int(const std::string& sec, const std::string& key, long fallback) const;
  bool get_bool(const std::string& sec, const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& sec, const std::string& key) const;
};

IniFile parse_ini(const std::string& text);
IniFile read_ini_file(const std::string& path);

struct ExperimentConfig {
  // input: either EDF paths + two annotation files per recording, or synth
  std::vector<std::string> edf_paths;
  std::vector<std::string> ann1_paths;
  std::vector<std::string> ann2_paths;
  int ann_header_lines = 0;
  double ann_min_duration_s = 0.0;
  bool use_synth = false;
  SynthConfig synth;

  std::string wavelet = "db4";
  Padding padding = Padding::periodic;
  double window_s = 2.0;
  std::string channel = "all";  // all | central | fp1 | o1

  double split_ratio = 0.7;
  bool balance = true;
  double overlap_s = 0.5;

  ClassifierSpec classifier;

  std::string baseline = "gp";  // gp | full75 | pca
  EvolutionConfig evo;
  double pca_threshold = 0.95;
  bool pca_standardize = true;

  int repetitions = 10;
  std::uint64_t master_seed = 42;
  std::string out_dir = "out";
  std::string group_key;            // subgroup metrics when set (e.g. "sex")
  std::string label_mode = "both";  // extract's label column
};

ExperimentConfig config_from_ini(const IniFile& ini);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);  // FNV-1a hex

}  // namespace sleepgp
