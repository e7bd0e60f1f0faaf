#include "sleepgp/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace sleepgp {

namespace {

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

bool IniFile::has(const std::string& sec, const std::string& key) const {
  auto s = sections.find(sec);
  return s != sections.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& sec, const std::string& key,
                         const std::string& fallback) const {
  auto s = sections.find(sec);
  if (s == sections.end()) return fallback;
  auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_num(const std::string& sec, const std::string& key,
                        double fallback) const {
  if (!has(sec, key)) return fallback;
  std::string v = get(sec, key, "");
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw config_error("config [" + sec + "] " + key + ": not a number: '" + v + "'");
  return out;
}

long IniFile::get_int(const std::string& sec, const std::string& key,
                      long fallback) const {
  double v = get_num(sec, key, static_cast<double>(fallback));
  auto r = static_cast<long>(v);
  if (static_cast<double>(r) != v)
    throw config_error("config [" + sec + "] " + key + ": expected an integer");
  return r;
}

bool IniFile::get_bool(const std::string& sec, const std::string& key,
                       bool fallback) const {
  if (!has(sec, key)) return fallback;
  std::string v = get(sec, key, "");
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw config_error("config [" + sec + "] " + key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> IniFile::get_list(const std::string& sec,
                                           const std::string& key) const {
  std::vector<std::string> out;
  std::string v = get(sec, key, "");
  if (v.empty()) return out;
  size_t start = 0;
  while (true) {
    size_t pos = v.find(',', start);
    std::string item = trim(pos == std::string::npos ? v.substr(start)
                                                     : v.substr(start, pos - start));
    if (!item.empty()) out.push_back(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

IniFile parse_ini(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    size_t cmt = line.find_first_of("#;");
    if (cmt != std::string::npos) line = line.substr(0, cmt);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("config line " + std::to_string(line_no) +
                           ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      ini.sections[section];
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(line_no) +
                         ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw config_error("config line " + std::to_string(line_no) + ": empty key");
    ini.sections[section][key] = val;
  }
  return ini;
}

IniFile read_ini_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_ini(ss.str());
}

ExperimentConfig config_from_ini(const IniFile& ini) {
  ExperimentConfig cfg;

  cfg.edf_paths = ini.get_list("input", "edf");
  cfg.ann1_paths = ini.get_list("input", "ann1");
  cfg.ann2_paths = ini.get_list("input", "ann2");
  cfg.ann_header_lines = static_cast<int>(ini.get_int("input", "header_lines", 0));
  cfg.ann_min_duration_s = ini.get_num("input", "min_duration", 0.0);

  cfg.use_synth = ini.sections.count("synth") > 0 && cfg.edf_paths.empty();
  if (!cfg.edf_paths.empty() && ini.sections.count("synth") > 0)
    throw config_error("config: give either [input] edf paths or a [synth] section, not both");
  cfg.synth.duration_s = ini.get_num("synth", "duration_s", cfg.synth.duration_s);
  cfg.synth.rate_hz = ini.get_num("synth", "rate_hz", cfg.synth.rate_hz);
  std::string kind = ini.get("synth", "kind", "spindle");
  if (kind == "spindle") cfg.synth.kind = EventKind::spindle;
  else if (kind == "kcomplex") cfg.synth.kind = EventKind::kcomplex;
  else throw config_error("config [synth] kind: expected spindle or kcomplex");
  cfg.synth.n_events = static_cast<int>(ini.get_int("synth", "events", cfg.synth.n_events));
  cfg.synth.event_amp_uv = ini.get_num("synth", "event_amp", cfg.synth.event_amp_uv);
  cfg.synth.offcentral_gain = ini.get_num("synth", "offcentral_gain", cfg.synth.offcentral_gain);
  cfg.synth.noise_amp_uv = ini.get_num("synth", "noise_amp", cfg.synth.noise_amp_uv);
  cfg.synth.jitter_std_s = ini.get_num("synth", "jitter_std", cfg.synth.jitter_std_s);
  cfg.synth.sex = ini.get("synth", "sex", "");

  cfg.wavelet = ini.get("features", "wavelet", cfg.wavelet);
  std::string pad = ini.get("features", "padding", "periodic");
  if (pad == "periodic") cfg.padding = Padding::periodic;
  else if (pad == "symmetric") cfg.padding = Padding::symmetric;
  else throw config_error("config [features] padding: expected periodic or symmetric");
  cfg.window_s = ini.get_num("features", "window_s", cfg.window_s);
  cfg.channel = ini.get("features", "channel", cfg.channel);
  if (cfg.channel != "all" && cfg.channel != "central" && cfg.channel != "fp1" &&
      cfg.channel != "o1")
    throw config_error("config [features] channel: expected all, central, fp1 or o1");

  cfg.split_ratio = ini.get_num("dataset", "split_ratio", cfg.split_ratio);
  cfg.balance = ini.get_bool("dataset", "balance", cfg.balance);
  cfg.overlap_s = ini.get_num("dataset", "overlap_s", cfg.overlap_s);

  cfg.classifier.kind =
      classifier_kind_from_string(ini.get("classifier", "kind", "knn"));
  cfg.classifier.knn_k = static_cast<int>(ini.get_int("classifier", "knn_k", cfg.classifier.knn_k));
  cfg.classifier.dt_max_depth =
      static_cast<int>(ini.get_int("classifier", "dt_max_depth", cfg.classifier.dt_max_depth));
  cfg.classifier.dt_min_leaf =
      static_cast<int>(ini.get_int("classifier", "dt_min_leaf", cfg.classifier.dt_min_leaf));
  cfg.classifier.mlp_hidden =
      static_cast<int>(ini.get_int("classifier", "mlp_hidden", cfg.classifier.mlp_hidden));
  cfg.classifier.mlp_lr = ini.get_num("classifier", "mlp_lr", cfg.classifier.mlp_lr);
  cfg.classifier.mlp_epochs =
      static_cast<int>(ini.get_int("classifier", "mlp_epochs", cfg.classifier.mlp_epochs));
  cfg.classifier.mlp_batch =
      static_cast<int>(ini.get_int("classifier", "mlp_batch", cfg.classifier.mlp_batch));

  cfg.baseline = ini.get("run", "baseline", cfg.baseline);
  if (cfg.baseline != "gp" && cfg.baseline != "full75" && cfg.baseline != "pca")
    throw config_error("config [run] baseline: expected gp, full75 or pca");

  cfg.evo.generations = static_cast<int>(ini.get_int("gp", "generations", cfg.evo.generations));
  cfg.evo.pop_size = static_cast<int>(ini.get_int("gp", "population", cfg.evo.pop_size));
  cfg.evo.tournament_size = static_cast<int>(ini.get_int("gp", "tournament", cfg.evo.tournament_size));
  cfg.evo.p_crossover = ini.get_num("gp", "p_crossover", cfg.evo.p_crossover);
  cfg.evo.p_mutation = ini.get_num("gp", "p_mutation", cfg.evo.p_mutation);
  cfg.evo.max_depth = static_cast<int>(ini.get_int("gp", "max_depth", cfg.evo.max_depth));
  cfg.evo.init_depth_min = static_cast<int>(ini.get_int("gp", "init_depth_min", cfg.evo.init_depth_min));
  cfg.evo.init_depth_max = static_cast<int>(ini.get_int("gp", "init_depth_max", cfg.evo.init_depth_max));
  cfg.evo.const_prob = ini.get_num("gp", "const_prob", cfg.evo.const_prob);
  cfg.evo.cv_folds = static_cast<int>(ini.get_int("gp", "cv_folds", cfg.evo.cv_folds));
  cfg.evo.n_threads = static_cast<int>(ini.get_int("gp", "threads", cfg.evo.n_threads));

  cfg.pca_threshold = ini.get_num("pca", "threshold", cfg.pca_threshold);
  cfg.pca_standardize = ini.get_bool("pca", "standardize", cfg.pca_standardize);

  cfg.repetitions = static_cast<int>(ini.get_int("run", "repetitions", cfg.repetitions));
  cfg.master_seed = static_cast<std::uint64_t>(ini.get_int("run", "seed", 42));
  cfg.out_dir = ini.get("run", "out", cfg.out_dir);
  cfg.group_key = ini.get("run", "group_key", cfg.group_key);
  cfg.label_mode = ini.get("run", "label_mode", cfg.label_mode);
  if (cfg.label_mode != "both" && cfg.label_mode != "either")
    throw config_error("config [run] label_mode: expected both or either");

  if (cfg.repetitions < 1) throw config_error("config: repetitions must be >= 1");
  if (!cfg.use_synth) {
    if (cfg.edf_paths.empty())
      throw config_error("config: no input (need [input] edf paths or a [synth] section)");
    if (cfg.ann1_paths.size() != cfg.edf_paths.size() ||
        cfg.ann2_paths.size() != cfg.edf_paths.size())
      throw config_error("config: ann1/ann2 path lists must match the edf list");
  }
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["input"] = {{"edf", cfg.edf_paths},
                {"ann1", cfg.ann1_paths},
                {"ann2", cfg.ann2_paths},
                {"header_lines", cfg.ann_header_lines},
                {"min_duration", cfg.ann_min_duration_s},
                {"use_synth", cfg.use_synth}};
  j["synth"] = {{"duration_s", cfg.synth.duration_s},
                {"rate_hz", cfg.synth.rate_hz},
                {"kind", cfg.synth.kind == EventKind::spindle ? "spindle" : "kcomplex"},
                {"events", cfg.synth.n_events},
                {"event_amp", cfg.synth.event_amp_uv},
                {"offcentral_gain", cfg.synth.offcentral_gain},
                {"noise_amp", cfg.synth.noise_amp_uv},
                {"jitter_std", cfg.synth.jitter_std_s},
                {"sex", cfg.synth.sex}};
  j["features"] = {{"wavelet", cfg.wavelet},
                   {"padding", cfg.padding == Padding::periodic ? "periodic" : "symmetric"},
                   {"window_s", cfg.window_s},
                   {"channel", cfg.channel}};
  j["dataset"] = {{"split_ratio", cfg.split_ratio},
                  {"balance", cfg.balance},
                  {"overlap_s", cfg.overlap_s}};
  j["classifier"] = spec_to_json(cfg.classifier);
  j["gp"] = {{"generations", cfg.evo.generations},
             {"population", cfg.evo.pop_size},
             {"tournament", cfg.evo.tournament_size},
             {"p_crossover", cfg.evo.p_crossover},
             {"p_mutation", cfg.evo.p_mutation},
             {"max_depth", cfg.evo.max_depth},
             {"init_depth_min", cfg.evo.init_depth_min},
             {"init_depth_max", cfg.evo.init_depth_max},
             {"const_prob", cfg.evo.const_prob},
             {"cv_folds", cfg.evo.cv_folds}};
  j["pca"] = {{"threshold", cfg.pca_threshold}, {"standardize", cfg.pca_standardize}};
  j["run"] = {{"baseline", cfg.baseline},
              {"repetitions", cfg.repetitions},
              {"seed", cfg.master_seed},
              {"group_key", cfg.group_key},
              {"label_mode", cfg.label_mode}};
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::string s = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sleepgp
