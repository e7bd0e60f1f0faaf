#include "sleepgp/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sleepgp {

std::vector<std::span<const double>> window_partition(std::span<const double> coeffs,
                                                      int level, double window_s,
                                                      double base_rate_hz) {
  if (level < 1) throw data_error("window_partition: level must be >= 1");
  double seg_len_d = window_s * base_rate_hz / std::pow(2.0, level);
  auto seg_len = static_cast<long>(std::llround(seg_len_d));
  if (std::abs(seg_len_d - static_cast<double>(seg_len)) > 1e-9)
    throw data_error("window_partition: window does not align with level-" +
                     std::to_string(level) + " coefficients");
  if (seg_len < 2)
    throw data_error("window_partition: segment length below 2 at level " +
                     std::to_string(level));
  size_t count = coeffs.size() / static_cast<size_t>(seg_len);
  std::vector<std::span<const double>> segs;
  segs.reserve(count);
  for (size_t i = 0; i < count; ++i)
    segs.push_back(coeffs.subspan(i * static_cast<size_t>(seg_len),
                                  static_cast<size_t>(seg_len)));
  return segs;
}

SegmentStats segment_stats(std::span<const double> seg) {
  if (seg.size() < 2) throw data_error("segment_stats: need at least 2 samples");
  const auto n = static_cast<double>(seg.size());
  double mean = 0.0;
  for (double v : seg) mean += v;
  mean /= n;

  double m2 = 0.0, m3 = 0.0, power = 0.0;
  for (double v : seg) {
    double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    power += v * v;
  }
  m2 /= n;
  m3 /= n;
  power /= n;

  double curve = 0.0;
  for (size_t i = 0; i + 1 < seg.size(); ++i) curve += std::abs(seg[i + 1] - seg[i]);

  SegmentStats st;
  st.average = mean;
  st.sd = std::sqrt(m2);
  st.symmetry = m2 < 1e-12 ? 0.0 : m3 / std::pow(m2, 1.5);
  st.psd = power;
  st.curve_length = curve;
  return st;
}

namespace {

// Channel roles in canonical column order.
int channel_role(const std::string& label) {
  std::string u;
  for (char c : label) u += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (u == "CZ-A1" || u == "C3-A1") return 0;
  if (u == "FP1-A1") return 1;
  if (u == "O1-A1") return 2;
  return -1;
}

}  // namespace

FeatureMatrix build_feature_matrix(const Recording& rec, const WaveletSpec& w,
                                   Padding pad, double window_s) {
  constexpr int kLevels = 5;
  constexpr double kRate = 256.0;

  if (rec.channels.size() != 3)
    throw data_error("feature matrix: expected exactly 3 EEG channels, got " +
                     std::to_string(rec.channels.size()));
  const Channel* by_role[3] = {nullptr, nullptr, nullptr};
  for (const auto& ch : rec.channels) {
    int role = channel_role(ch.label);
    if (role < 0) throw data_error("feature matrix: unexpected channel '" + ch.label + "'");
    if (by_role[role]) throw data_error("feature matrix: duplicate channel role for '" + ch.label + "'");
    if (std::abs(ch.rate_hz - kRate) > 1e-9)
      throw data_error("feature matrix: channel '" + ch.label + "' not at 256 Hz");
    by_role[role] = &ch;
  }

  // Decompose each full channel once, then window the coefficient sequences.
  std::vector<std::vector<std::span<const double>>> segs(3 * kLevels);
  std::vector<Decomposition> decs(3);
  size_t n_windows = SIZE_MAX;
  for (int c = 0; c < 3; ++c) {
    decs[c] = dwt_multilevel(by_role[c]->samples, kLevels, w, pad);
    for (int l = 0; l < kLevels; ++l) {
      segs[c * kLevels + l] = window_partition(decs[c].details[l], l + 1, window_s, kRate);
      n_windows = std::min(n_windows, segs[c * kLevels + l].size());
    }
  }
  if (n_windows == 0) throw data_error("feature matrix: recording shorter than one window");

  FeatureMatrix fm;
  fm.attr_names.reserve(75);
  for (int i = 0; i < 75; ++i) fm.attr_names.push_back("ARG" + std::to_string(i));
  fm.rows.reserve(n_windows);
  fm.window_index.reserve(n_windows);
  for (size_t wnd = 0; wnd < n_windows; ++wnd) {
    std::vector<double> row;
    row.reserve(75);
    for (int c = 0; c < 3; ++c) {
      for (int l = 0; l < kLevels; ++l) {
        SegmentStats st = segment_stats(segs[c * kLevels + l][wnd]);
        row.push_back(st.average);
        row.push_back(st.sd);
        row.push_back(st.symmetry);
        row.push_back(st.psd);
        row.push_back(st.curve_length);
      }
    }
    fm.rows.push_back(std::move(row));
    fm.window_index.push_back(static_cast<int>(wnd));
  }
  return fm;
}

FeatureMatrix channel_filter(const FeatureMatrix& fm, EegChannel ch) {
  if (fm.n_cols() != 75)
    throw data_error("channel_filter: input must have the canonical 75 columns");
  size_t base = 25 * static_cast<size_t>(ch);
  FeatureMatrix out;
  out.attr_names.assign(fm.attr_names.begin() + base, fm.attr_names.begin() + base + 25);
  out.window_index = fm.window_index;
  out.labels = fm.labels;
  out.rows.reserve(fm.rows.size());
  for (const auto& row : fm.rows)
    out.rows.emplace_back(row.begin() + base, row.begin() + base + 25);
  return out;
}

std::string to_csv(const FeatureMatrix& fm) {
  std::string out;
  for (const auto& name : fm.attr_names) {
    out += name;
    out += ',';
  }
  out += "window_index";
  if (fm.labels) out += ",label";
  out += '\n';

  char buf[40];
  for (size_t r = 0; r < fm.rows.size(); ++r) {
    const auto& row = fm.rows[r];
    for (double v : row) {
      std::snprintf(buf, sizeof buf, "%.9g", v);
      out += buf;
      out += ',';
    }
    out += std::to_string(r < fm.window_index.size() ? fm.window_index[r]
                                                     : static_cast<int>(r));
    if (fm.labels) {
      out += ',';
      out += std::to_string((*fm.labels)[r]);
    }
    out += '\n';
  }
  return out;
}

FeatureMatrix from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw data_error("feature CSV: empty input");

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
      size_t pos = s.find(',', start);
      if (pos == std::string::npos) {
        out.push_back(s.substr(start));
        break;
      }
      out.push_back(s.substr(start, pos - start));
      start = pos + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
      out.back().pop_back();
    return out;
  };

  FeatureMatrix fm;
  auto header = split(line);
  long wi_col = -1, label_col = -1;
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "window_index")
      wi_col = static_cast<long>(i);
    else if (header[i] == "label")
      label_col = static_cast<long>(i);
    else if (wi_col >= 0 || label_col >= 0)
      throw data_error("feature CSV: attribute column after window_index/label");
    else
      fm.attr_names.push_back(header[i]);
  }
  if (label_col >= 0) fm.labels.emplace();

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw data_error("feature CSV line " + std::to_string(line_no) +
                       ": wrong column count");
    std::vector<double> row;
    row.reserve(fm.attr_names.size());
    for (size_t i = 0; i < cells.size(); ++i) {
      const std::string& cell = cells[i];
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || p != cell.data() + cell.size())
        throw data_error("feature CSV line " + std::to_string(line_no) +
                         ": bad number '" + cell + "'");
      if (static_cast<long>(i) == wi_col)
        fm.window_index.push_back(static_cast<int>(v));
      else if (static_cast<long>(i) == label_col)
        fm.labels->push_back(static_cast<int>(v));
      else
        row.push_back(v);
    }
    fm.rows.push_back(std::move(row));
  }
  if (wi_col < 0)
    for (size_t r = 0; r < fm.rows.size(); ++r)
      fm.window_index.push_back(static_cast<int>(r));
  return fm;
}

void write_csv_file(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open output file: " + path);
  out << to_csv(fm);
  if (!out) throw data_error("failed writing CSV to " + path);
}

FeatureMatrix read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open feature CSV: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_csv(ss.str());
}

}  // namespace sleepgp
