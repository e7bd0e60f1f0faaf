#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sleepgp/common.hpp"

namespace sleepgp {

struct Channel {
  std::string label;
  double rate_hz = 0.0;
  std::vector<double> samples;  // microvolts

  double duration_s() const { return static_cast<double>(samples.size()) / rate_hz; }
};

struct Recording {
  std::vector<Channel> channels;
  std::map<std::string, std::string> subject_meta;  // e.g. "sex", "age"

  double duration_s() const;
};

struct Annotation {
  double onset_s = 0.0;
  double duration_s = 0.0;
};

struct AnnotationSet {
  int expert_id = 0;
  std::vector<Annotation> events;  // sorted by onset
};

// Plain EDF: 256-byte ASCII header, 256 bytes of header per signal,
// 16-bit little-endian two's-complement samples, record-interleaved.
// EDF+ annotation channels are not interpreted.
Recording read_edf(std::span<const std::uint8_t> bytes);
Recording read_edf_file(const std::string& path);

// Writer used by the synth command and round-trip tests. Records are 1 s,
// so channel rates must be (near-)integers and the duration a whole number
// of seconds. Physical range is fixed at +-1000 uV.
std::vector<std::uint8_t> write_edf(const Recording& rec);
void write_edf_file(const Recording& rec, const std::string& path);

// Two-column "onset_seconds duration_seconds" text. header_lines are skipped.
// Events shorter than min_duration_s are dropped with a warning on stderr
// (0 disables the check); nonpositive durations are an error.
AnnotationSet read_annotations(const std::string& text, int expert_id,
                               int header_lines = 0, double min_duration_s = 0.0);
std::string format_annotations(const AnnotationSet& ann);

// Natural cubic spline (zero second derivative at the ends) through the
// original samples, evaluated at the target-rate instants k/target_hz.
Channel resample_cubic(const Channel& ch, double target_hz);

enum class EventKind { spindle, kcomplex };

struct SynthConfig {
  double duration_s = 1800.0;
  double rate_hz = 200.0;
  EventKind kind = EventKind::spindle;
  int n_events = 50;
  double event_amp_uv = 30.0;
  double offcentral_gain = 0.3;  // event amplitude on FP1/O1 relative to central
  double noise_amp_uv = 4.0;
  double jitter_std_s = 0.1;     // per-expert onset jitter
  std::string sex;               // optional subject meta ("M"/"F")
};

struct SynthResult {
  Recording recording;
  AnnotationSet expert1;
  AnnotationSet expert2;
};

// Three-channel EEG-like recording (CZ-A1, FP1-A1, O1-A1) with planted
// events strongest on the central channel, plus two expert annotation sets
// that differ by seeded onset jitter.
SynthResult synth_recording(const SynthConfig& cfg, std::uint64_t seed);

}  // namespace sleepgp
