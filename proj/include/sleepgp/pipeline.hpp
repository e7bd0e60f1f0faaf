#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sleepgp/analysis.hpp"
#include "sleepgp/config.hpp"
#include "sleepgp/dataset.hpp"

namespace sleepgp {

struct InputRecording {
  Recording recording;
  AnnotationSet ann1;
  AnnotationSet ann2;
};

// Materialize the configured input source (EDF files or the synth section).
std::vector<InputRecording> load_inputs(const ExperimentConfig& cfg);

struct PreparedRecording {
  FeatureMatrix features;  // after resampling, DWT, and channel filtering
  AnnotationSet ann1;
  AnnotationSet ann2;
  std::map<std::string, std::vector<std::string>> row_groups;
};

// Resample to 256 Hz, decompose, build the attribute table, and apply the
// configured channel restriction. Extraction is seed-free, so it is shared
// across repetitions.
PreparedRecording prepare_recording(const ExperimentConfig& cfg,
                                    const InputRecording& input);

// One train/test realization: per-recording splits concatenated, training
// side optionally undersampled.
struct RepetitionData {
  LabeledDataset train;
  LabeledDataset test;
  nlohmann::json manifest;
};

RepetitionData make_repetition_data(const ExperimentConfig& cfg,
                                    const std::vector<PreparedRecording>& prepared,
                                    std::uint64_t rep_seed);

RunArtifact run_repetition(const ExperimentConfig& cfg,
                           const std::vector<PreparedRecording>& prepared,
                           int repetition, std::uint64_t rep_seed);

struct ExperimentResult {
  std::vector<RunArtifact> artifacts;
  nlohmann::json aggregate;
};

// All repetitions plus the aggregate report (no file output).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// run_experiment + rep_<r>.json, aggregate.json, aggregate_auc.csv and
// manifest.json under cfg.out_dir.
ExperimentResult run_experiment_to_dir(const ExperimentConfig& cfg);

// Per-repetition seed: derived from the master seed and the repetition index.
std::uint64_t repetition_seed(std::uint64_t master_seed, int repetition);

}  // namespace sleepgp
