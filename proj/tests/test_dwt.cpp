#include <cmath>
#include <numeric>

#include "doctest.h"
#include "sleepgp/dwt.hpp"
#include "sleepgp/rng.hpp"

using namespace sleepgp;

namespace {

double energy(const std::vector<double>& v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

double decomposition_energy(const Decomposition& d) {
  double e = energy(d.approx);
  for (const auto& lvl : d.details) e += energy(lvl);
  return e;
}

}  // namespace

TEST_CASE("wavelet specs satisfy the quadrature-mirror invariants") {
  for (const auto& w : {WaveletSpec::haar(), WaveletSpec::db4()}) {
    REQUIRE(w.lowpass.size() == w.highpass.size());
    CHECK(w.lowpass.size() % 2 == 0);
    size_t L = w.lowpass.size();
    for (size_t k = 0; k < L; ++k) {
      double expect = (k % 2 == 0 ? 1.0 : -1.0) * w.lowpass[L - 1 - k];
      CHECK(w.highpass[k] == doctest::Approx(expect).epsilon(1e-15));
    }
    double sum = std::accumulate(w.lowpass.begin(), w.lowpass.end(), 0.0);
    CHECK(std::abs(sum - std::sqrt(2.0)) < 1e-9);
  }
  CHECK_THROWS_AS(WaveletSpec::by_name("sym5"), config_error);
}

TEST_CASE("analysis_step Haar hand cases") {
  auto haar = WaveletSpec::haar();
  double s = 1.0 / std::sqrt(2.0);

  SUBCASE("constant signal has zero detail") {
    auto [a, d] = analysis_step(std::vector<double>{1, 1, 1, 1}, haar);
    REQUIRE(a.size() == 2);
    CHECK(d[0] == doctest::Approx(0.0));
    CHECK(d[1] == doctest::Approx(0.0));
    CHECK(a[0] == doctest::Approx(2.0 * s));  // sqrt(2)
    CHECK(a[1] == doctest::Approx(2.0 * s));
  }
  SUBCASE("alternating signal is pure detail") {
    auto [a, d] = analysis_step(std::vector<double>{1, -1, 1, -1}, haar);
    CHECK(a[0] == doctest::Approx(0.0));
    CHECK(a[1] == doctest::Approx(0.0));
    CHECK(d[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(d[1] == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("length-1 input is an error") {
    CHECK_THROWS_AS(analysis_step(std::vector<double>{1.0}, haar), data_error);
  }
}

TEST_CASE("dwt_multilevel") {
  SUBCASE("512-sample window halves through the levels") {
    std::vector<double> x(512);
    rng_t rng(1);
    for (auto& v : x) v = rng.normal();
    auto dec = dwt_multilevel(x, 5, WaveletSpec::db4());
    REQUIRE(dec.details.size() == 5);
    CHECK(dec.details[0].size() == 256);
    CHECK(dec.details[1].size() == 128);
    CHECK(dec.details[2].size() == 64);
    CHECK(dec.details[3].size() == 32);
    CHECK(dec.details[4].size() == 16);
    CHECK(dec.approx.size() == 16);
  }
  SUBCASE("constant input: all detail levels vanish") {
    std::vector<double> x(256, 3.25);
    auto dec = dwt_multilevel(x, 5, WaveletSpec::db4());
    for (const auto& lvl : dec.details)
      for (double v : lvl) CHECK(std::abs(v) < 1e-10);
  }
  SUBCASE("too-short input is an error") {
    std::vector<double> x(16, 1.0);
    CHECK_THROWS_AS(dwt_multilevel(x, 5, WaveletSpec::haar()), data_error);
  }
}

TEST_CASE("energy conservation with periodic padding") {
  rng_t rng(42);
  for (const auto& w : {WaveletSpec::haar(), WaveletSpec::db4()}) {
    std::vector<double> x(1024);
    for (auto& v : x) v = rng.normal();
    auto dec = dwt_multilevel(x, 5, w, Padding::periodic);
    double in = energy(x), out = decomposition_energy(dec);
    CHECK(std::abs(in - out) / in < 1e-6);
  }
}

TEST_CASE("dwt linearity") {
  rng_t rng(3);
  std::vector<double> x(128), y(128), z(128);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
    z[i] = 2.5 * x[i] - 0.75 * y[i];
  }
  auto w = WaveletSpec::db4();
  auto dx = dwt_multilevel(x, 3, w), dy = dwt_multilevel(y, 3, w),
       dz = dwt_multilevel(z, 3, w);
  for (size_t l = 0; l < 3; ++l)
    for (size_t i = 0; i < dz.details[l].size(); ++i)
      CHECK(dz.details[l][i] ==
            doctest::Approx(2.5 * dx.details[l][i] - 0.75 * dy.details[l][i])
                .epsilon(1e-9));
}

TEST_CASE("circular shift by 2 shifts level-1 coefficients by 1") {
  rng_t rng(9);
  std::vector<double> x(64);
  for (auto& v : x) v = rng.normal();
  std::vector<double> shifted(64);
  for (size_t i = 0; i < 64; ++i) shifted[(i + 2) % 64] = x[i];

  auto w = WaveletSpec::db4();
  auto [a0, d0] = analysis_step(x, w, Padding::periodic);
  auto [a1, d1] = analysis_step(shifted, w, Padding::periodic);
  for (size_t i = 0; i < a0.size(); ++i) {
    CHECK(a1[(i + 1) % a0.size()] == doctest::Approx(a0[i]).epsilon(1e-12));
    CHECK(d1[(i + 1) % d0.size()] == doctest::Approx(d0[i]).epsilon(1e-12));
  }
}

TEST_CASE("symmetric padding produces the documented lengths") {
  std::vector<double> x(100, 1.0);
  auto w = WaveletSpec::db4();  // 8 taps
  auto [a, d] = analysis_step(x, w, Padding::symmetric);
  CHECK(a.size() == (100 + 8 - 1) / 2);
  // constant extension is constant, so details still vanish
  for (double v : d) CHECK(std::abs(v) < 1e-10);
}
