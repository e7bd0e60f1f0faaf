#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sleepgp/common.hpp"
#include "sleepgp/dwt.hpp"
#include "sleepgp/signal_io.hpp"

namespace sleepgp {

struct FeatureMatrix {
  Matrix rows;
  std::vector<std::string> attr_names;  // "ARG0".."ARG74" for the full set
  std::vector<int> window_index;
  std::optional<std::vector<int>> labels;

  size_t n_rows() const { return rows.size(); }
  size_t n_cols() const { return attr_names.size(); }
};

// Per-level segment length is window_s * base_rate_hz / 2^level; a trailing
// partial segment is discarded.
std::vector<std::span<const double>> window_partition(std::span<const double> coeffs,
                                                      int level, double window_s,
                                                      double base_rate_hz);

struct SegmentStats {
  double average;
  double sd;            // population standard deviation
  double symmetry;      // Fisher-Pearson skewness, 0 when variance ~ 0
  double psd;           // mean squared value
  double curve_length;  // sum of |first differences|
};

SegmentStats segment_stats(std::span<const double> seg);

// 75-attribute table over a 3-channel recording at 256 Hz: central channel
// first (ARG0-ARG24), then FP1-A1 and O1-A1; within a channel one block of
// (average, sd, symmetry, psd, curve length) per level D1..D5.
FeatureMatrix build_feature_matrix(const Recording& rec, const WaveletSpec& w,
                                   Padding pad = Padding::periodic,
                                   double window_s = 2.0);

enum class EegChannel { central, fp1, o1 };

// Restrict a canonical 75-column matrix to one channel's 25 columns.
FeatureMatrix channel_filter(const FeatureMatrix& fm, EegChannel ch);

std::string to_csv(const FeatureMatrix& fm);
FeatureMatrix from_csv(const std::string& text);
void write_csv_file(const FeatureMatrix& fm, const std::string& path);
FeatureMatrix read_csv_file(const std::string& path);

}  // namespace sleepgp
