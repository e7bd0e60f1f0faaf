#include "sleepgp/dwt.hpp"

#include <cmath>

namespace sleepgp {

namespace {

WaveletSpec from_lowpass(std::string name, std::vector<double> g) {
  WaveletSpec w;
  w.name = std::move(name);
  size_t L = g.size();
  w.highpass.resize(L);
  for (size_t k = 0; k < L; ++k) {
    double v = g[L - 1 - k];
    w.highpass[k] = (k % 2 == 0) ? v : -v;
  }
  w.lowpass = std::move(g);
  return w;
}

}  // namespace

WaveletSpec WaveletSpec::haar() {
  const double s = 1.0 / std::sqrt(2.0);
  return from_lowpass("haar", {s, s});
}

WaveletSpec WaveletSpec::db4() {
  // Daubechies 8-tap scaling coefficients, normalized to sum sqrt(2).
  return from_lowpass("db4", {0.230377813308855230, 0.714846570552541500,
                              0.630880767929590400, -0.027983769416983850,
                              -0.187034811718881140, 0.030841381835986965,
                              0.032883011666982945, -0.010597401784997278});
}

WaveletSpec WaveletSpec::by_name(const std::string& name) {
  if (name == "haar") return haar();
  if (name == "db4") return db4();
  throw config_error("unknown wavelet '" + name + "' (available: haar, db4)");
}

std::pair<std::vector<double>, std::vector<double>> analysis_step(
    std::span<const double> x, const WaveletSpec& w, Padding pad) {
  const std::vector<double>& g = w.lowpass;
  const std::vector<double>& h = w.highpass;
  const size_t L = g.size();
  if (x.size() < L)
    throw data_error("dwt: input shorter than the analysis filter");

  std::vector<double> approx, detail;
  if (pad == Padding::periodic) {
    std::vector<double> xv(x.begin(), x.end());
    if (xv.size() % 2 != 0) xv.push_back(xv.back());
    const size_t n = xv.size();
    const size_t half = n / 2;
    approx.resize(half);
    detail.resize(half);
    for (size_t i = 0; i < half; ++i) {
      double a = 0.0, d = 0.0;
      size_t base = 2 * i;
      for (size_t k = 0; k < L; ++k) {
        size_t idx = (base + n - (k % n)) % n;
        a += g[k] * xv[idx];
        d += h[k] * xv[idx];
      }
      approx[i] = a;
      detail[i] = d;
    }
  } else {
    // Half-sample symmetric extension, full convolution, odd phase.
    const auto n = static_cast<long>(x.size());
    auto ext = [&](long j) {
      while (j < 0 || j >= n) {
        if (j < 0) j = -j - 1;
        if (j >= n) j = 2 * n - 1 - j;
      }
      return x[static_cast<size_t>(j)];
    };
    const long full = n + static_cast<long>(L) - 1;
    for (long m = 1; m < full; m += 2) {
      double a = 0.0, d = 0.0;
      for (size_t k = 0; k < L; ++k) {
        double v = ext(m - static_cast<long>(k));
        a += g[k] * v;
        d += h[k] * v;
      }
      approx.push_back(a);
      detail.push_back(d);
    }
  }
  return {std::move(approx), std::move(detail)};
}

Decomposition dwt_multilevel(std::span<const double> x, int levels,
                             const WaveletSpec& w, Padding pad) {
  if (levels < 1) throw data_error("dwt: levels must be >= 1");
  if (x.size() < (static_cast<size_t>(1) << levels))
    throw data_error("dwt: input too short for " + std::to_string(levels) +
                     " levels");
  Decomposition dec;
  std::vector<double> cur(x.begin(), x.end());
  for (int l = 0; l < levels; ++l) {
    auto [a, d] = analysis_step(cur, w, pad);
    dec.details.push_back(std::move(d));
    cur = std::move(a);
  }
  dec.approx = std::move(cur);
  return dec;
}

}  // namespace sleepgp
