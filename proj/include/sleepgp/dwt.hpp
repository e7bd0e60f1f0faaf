#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sleepgp/common.hpp"

namespace sleepgp {

enum class Padding { periodic, symmetric };

// Orthogonal analysis filter pair. The highpass is derived from the lowpass
// by the quadrature-mirror relation h[k] = (-1)^k g[L-1-k].
struct WaveletSpec {
  std::string name;
  std::vector<double> lowpass;
  std::vector<double> highpass;

  static WaveletSpec haar();
  static WaveletSpec db4();
  static WaveletSpec by_name(const std::string& name);
};

struct Decomposition {
  std::vector<std::vector<double>> details;  // D1..Dn
  std::vector<double> approx;                // final approximation
};

// One filter-bank stage: convolve with the low/high-pass pair and keep every
// other output sample. Periodic padding treats the input as circular (odd
// lengths are first extended by repeating the last sample); symmetric padding
// reflects at the edges and keeps floor((n + L - 1) / 2) coefficients.
std::pair<std::vector<double>, std::vector<double>> analysis_step(
    std::span<const double> x, const WaveletSpec& w, Padding pad = Padding::periodic);

// Cascade of analysis steps; each level consumes the previous approximation.
Decomposition dwt_multilevel(std::span<const double> x, int levels,
                             const WaveletSpec& w, Padding pad = Padding::periodic);

}  // namespace sleepgp
