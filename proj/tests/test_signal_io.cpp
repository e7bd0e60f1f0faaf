#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "sleepgp/signal_io.hpp"

using namespace sleepgp;

namespace {

void put(std::vector<std::uint8_t>& out, const std::string& s, size_t len) {
  std::string f = s;
  f.resize(len, ' ');
  out.insert(out.end(), f.begin(), f.end());
}

// Minimal hand-rolled EDF: one signal, one 1 s record of 4 samples,
// digital [-32768, 32767] mapped to [-100, 100] uV.
std::vector<std::uint8_t> tiny_edf(const std::vector<std::int16_t>& digital,
                                   int declared_signals = 1,
                                   const std::string& dig_min = "-32768") {
  std::vector<std::uint8_t> b;
  put(b, "0", 8);
  put(b, "P-1 M X X", 80);
  put(b, "rec", 80);
  put(b, "01.01.00", 8);
  put(b, "00.00.00", 8);
  put(b, std::to_string(256 * (1 + declared_signals)), 8);
  put(b, "", 44);
  put(b, "1", 8);   // records
  put(b, "1", 8);   // record duration
  put(b, std::to_string(declared_signals), 4);
  for (int s = 0; s < declared_signals; ++s) put(b, "CH" + std::to_string(s), 16);
  for (int s = 0; s < declared_signals; ++s) put(b, "", 80);
  for (int s = 0; s < declared_signals; ++s) put(b, "uV", 8);
  for (int s = 0; s < declared_signals; ++s) put(b, "-100", 8);
  for (int s = 0; s < declared_signals; ++s) put(b, "100", 8);
  for (int s = 0; s < declared_signals; ++s) put(b, dig_min, 8);
  for (int s = 0; s < declared_signals; ++s) put(b, "32767", 8);
  for (int s = 0; s < declared_signals; ++s) put(b, "", 80);
  for (int s = 0; s < declared_signals; ++s) put(b, "4", 8);
  for (int s = 0; s < declared_signals; ++s) put(b, "", 32);
  for (std::int16_t v : digital) {
    auto u = static_cast<std::uint16_t>(v);
    b.push_back(static_cast<std::uint8_t>(u & 0xff));
    b.push_back(static_cast<std::uint8_t>(u >> 8));
  }
  return b;
}

}  // namespace

TEST_CASE("read_edf applies the affine digital-to-physical map") {
  auto rec = read_edf(tiny_edf({0, -32768, 32767, 100}));
  REQUIRE(rec.channels.size() == 1);
  const auto& ch = rec.channels[0];
  CHECK(ch.rate_hz == doctest::Approx(4.0));
  REQUIRE(ch.samples.size() == 4);

  double gain = 200.0 / 65535.0;
  double offset = -100.0 - (-32768.0) * gain;
  CHECK(ch.samples[0] == doctest::Approx(offset).epsilon(1e-12));
  CHECK(ch.samples[0] == doctest::Approx(0.0015).epsilon(1e-1));
  CHECK(ch.samples[1] == doctest::Approx(-100.0).epsilon(1e-12));  // dmin -> pmin
  CHECK(ch.samples[2] == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(ch.samples[3] == doctest::Approx(100.0 * gain + offset).epsilon(1e-12));
  CHECK(rec.subject_meta.at("sex") == "M");
}

TEST_CASE("read_edf rejects malformed input") {
  SUBCASE("truncated payload: 2 declared signals, data for 1") {
    CHECK_THROWS_AS(read_edf(tiny_edf({0, 0, 0, 0}, 2)), data_error);
  }
  SUBCASE("zero digital range") {
    CHECK_THROWS_AS(read_edf(tiny_edf({0, 0, 0, 0}, 1, "32767")), data_error);
  }
  SUBCASE("non-numeric header field") {
    auto b = tiny_edf({0, 0, 0, 0});
    b[236] = 'x';  // record count field
    CHECK_THROWS_WITH_AS(read_edf(b), doctest::Contains("non-numeric"), data_error);
  }
  SUBCASE("short file") {
    std::vector<std::uint8_t> b(100, ' ');
    CHECK_THROWS_AS(read_edf(b), data_error);
  }
}

TEST_CASE("EDF round-trip is exact to one quantization step") {
  SynthConfig cfg;
  cfg.duration_s = 20.0;
  cfg.rate_hz = 100.0;
  cfg.n_events = 3;
  auto sr = synth_recording(cfg, 11);
  auto bytes = write_edf(sr.recording);
  auto back = read_edf(bytes);

  REQUIRE(back.channels.size() == 3);
  double step = 2000.0 / 65535.0;
  for (size_t c = 0; c < 3; ++c) {
    REQUIRE(back.channels[c].samples.size() == sr.recording.channels[c].samples.size());
    CHECK(back.channels[c].label == sr.recording.channels[c].label);
    for (size_t i = 0; i < back.channels[c].samples.size(); ++i)
      CHECK(std::abs(back.channels[c].samples[i] -
                     sr.recording.channels[c].samples[i]) <= step);
  }
}

TEST_CASE("read_annotations") {
  SUBCASE("two events") {
    auto ann = read_annotations("100.5 1.0\n200.0 0.8", 1);
    REQUIRE(ann.events.size() == 2);
    CHECK(ann.events[0].onset_s == doctest::Approx(100.5));
    CHECK(ann.events[0].duration_s == doctest::Approx(1.0));
    CHECK(ann.expert_id == 1);
  }
  SUBCASE("empty file") {
    CHECK(read_annotations("", 1).events.empty());
  }
  SUBCASE("nonpositive duration is an error") {
    CHECK_THROWS_WITH_AS(read_annotations("50 -1", 1), doctest::Contains("line 1"),
                         data_error);
  }
  SUBCASE("non-numeric token names the line") {
    CHECK_THROWS_WITH_AS(read_annotations("1.0 0.5\nabc 0.5", 1),
                         doctest::Contains("line 2"), data_error);
  }
  SUBCASE("header lines are skipped") {
    auto ann = read_annotations("onset duration\n3.0 0.7", 1, 1);
    REQUIRE(ann.events.size() == 1);
    CHECK(ann.events[0].onset_s == doctest::Approx(3.0));
  }
  SUBCASE("unsorted input comes back sorted") {
    auto ann = read_annotations("9.0 1.0\n2.0 1.0", 1);
    CHECK(ann.events[0].onset_s == doctest::Approx(2.0));
  }
}

TEST_CASE("format/read annotations round-trip") {
  AnnotationSet ann;
  ann.expert_id = 2;
  ann.events = {{1.25, 0.5}, {100.003, 1.37}, {1700.125, 0.625}};
  auto back = read_annotations(format_annotations(ann), 2);
  REQUIRE(back.events.size() == ann.events.size());
  for (size_t i = 0; i < ann.events.size(); ++i) {
    CHECK(back.events[i].onset_s == ann.events[i].onset_s);
    CHECK(back.events[i].duration_s == ann.events[i].duration_s);
  }
}

TEST_CASE("resample_cubic") {
  SUBCASE("30 minutes at 200 Hz becomes 460800 samples at 256 Hz") {
    Channel ch;
    ch.label = "CZ-A1";
    ch.rate_hz = 200.0;
    ch.samples.assign(360000, 0.0);
    auto out = resample_cubic(ch, 256.0);
    CHECK(out.samples.size() == 460800);
    CHECK(out.rate_hz == doctest::Approx(256.0));
  }
  SUBCASE("reproduces a linear ramp at interior points") {
    Channel ch;
    ch.rate_hz = 10.0;
    for (int i = 0; i < 100; ++i) ch.samples.push_back(0.25 * i - 3.0);
    auto out = resample_cubic(ch, 16.0);
    for (size_t k = 0; k < out.samples.size(); ++k) {
      double t = static_cast<double>(k) / 16.0;
      if (t > 9.0) break;  // beyond the last knot the piece extrapolates
      CHECK(out.samples[k] == doctest::Approx(0.25 * (t * 10.0) - 3.0).epsilon(1e-9));
    }
  }
  SUBCASE("5 Hz sine resampled 200 -> 256 Hz tracks the analytic sine") {
    Channel ch;
    ch.rate_hz = 200.0;
    int n = 800;  // 4 s
    for (int i = 0; i < n; ++i)
      ch.samples.push_back(std::sin(2.0 * M_PI * 5.0 * i / 200.0));
    auto out = resample_cubic(ch, 256.0);
    size_t lo = out.samples.size() / 20, hi = out.samples.size() * 19 / 20;
    double max_err = 0.0;
    for (size_t k = lo; k < hi; ++k) {
      double t = static_cast<double>(k) / 256.0;
      max_err = std::max(max_err, std::abs(out.samples[k] -
                                           std::sin(2.0 * M_PI * 5.0 * t)));
    }
    CHECK(max_err < 1e-4);
  }
  SUBCASE("duration is preserved") {
    Channel ch;
    ch.rate_hz = 50.0;
    ch.samples.assign(1237, 1.0);
    auto out = resample_cubic(ch, 256.0);
    CHECK(std::abs(static_cast<double>(out.samples.size()) / 256.0 -
                   1237.0 / 50.0) <= 1.0 / 256.0);
  }
  SUBCASE("fewer than 4 samples is an error") {
    Channel ch;
    ch.rate_hz = 10.0;
    ch.samples = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(resample_cubic(ch, 20.0), data_error);
  }
}

TEST_CASE("synth_recording") {
  SynthConfig cfg;
  cfg.duration_s = 120.0;
  cfg.rate_hz = 100.0;
  cfg.n_events = 10;

  SUBCASE("counts and channels") {
    auto sr = synth_recording(cfg, 7);
    CHECK(sr.recording.channels.size() == 3);
    CHECK(sr.expert1.events.size() == 10);
    CHECK(sr.expert2.events.size() == 10);
    CHECK(sr.recording.channels[0].label == "CZ-A1");
    for (const auto& ev : sr.expert1.events) {
      CHECK(ev.duration_s >= 0.5);
      CHECK(ev.onset_s + ev.duration_s <= cfg.duration_s);
    }
  }
  SUBCASE("same seed twice is bit-identical") {
    auto a = synth_recording(cfg, 7);
    auto b = synth_recording(cfg, 7);
    for (size_t c = 0; c < 3; ++c)
      CHECK(a.recording.channels[c].samples == b.recording.channels[c].samples);
    REQUIRE(a.expert1.events.size() == b.expert1.events.size());
    for (size_t i = 0; i < a.expert1.events.size(); ++i)
      CHECK(a.expert1.events[i].onset_s == b.expert1.events[i].onset_s);
  }
  SUBCASE("zero jitter makes the experts agree") {
    cfg.jitter_std_s = 0.0;
    auto sr = synth_recording(cfg, 3);
    REQUIRE(sr.expert1.events.size() == sr.expert2.events.size());
    for (size_t i = 0; i < sr.expert1.events.size(); ++i) {
      CHECK(sr.expert1.events[i].onset_s == sr.expert2.events[i].onset_s);
      CHECK(sr.expert1.events[i].duration_s == sr.expert2.events[i].duration_s);
    }
  }
  SUBCASE("event is strongest on the central channel") {
    cfg.noise_amp_uv = 0.0;  // silence the background
    auto sr = synth_recording(cfg, 5);
    auto power = [](const Channel& ch) {
      double p = 0.0;
      for (double v : ch.samples) p += v * v;
      return p;
    };
    CHECK(power(sr.recording.channels[0]) > power(sr.recording.channels[1]));
    CHECK(power(sr.recording.channels[0]) > power(sr.recording.channels[2]));
  }
  SUBCASE("over capacity is an error") {
    cfg.duration_s = 10.0;
    cfg.n_events = 50;
    CHECK_THROWS_AS(synth_recording(cfg, 1), data_error);
  }
  SUBCASE("kcomplex morphology: negative dip then positive hump") {
    cfg.kind = EventKind::kcomplex;
    cfg.noise_amp_uv = 0.0;
    cfg.n_events = 1;
    auto sr = synth_recording(cfg, 9);
    const auto& ev = sr.expert1.events[0];
    const auto& x = sr.recording.channels[0].samples;
    auto i0 = static_cast<size_t>(ev.onset_s * cfg.rate_hz);
    auto i1 = static_cast<size_t>((ev.onset_s + ev.duration_s) * cfg.rate_hz);
    double mn = 0.0, mx = 0.0;
    size_t arg_mn = i0, arg_mx = i0;
    for (size_t i = i0; i < i1; ++i) {
      if (x[i] < mn) { mn = x[i]; arg_mn = i; }
      if (x[i] > mx) { mx = x[i]; arg_mx = i; }
    }
    CHECK(mn < -0.5 * cfg.event_amp_uv);
    CHECK(mx > 0.3 * cfg.event_amp_uv);
    CHECK(arg_mn < arg_mx);
  }
}
