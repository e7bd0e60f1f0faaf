#include "sleepgp/signal_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "sleepgp/rng.hpp"

namespace sleepgp {

double Recording::duration_s() const {
  double d = 0.0;
  for (const auto& ch : channels) d = std::max(d, ch.duration_s());
  return d;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(std::string s) {
  const char* ws = " \t\r\n";
  size_t b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string header_field(std::span<const std::uint8_t> bytes, size_t off, size_t len) {
  return trim(std::string(reinterpret_cast<const char*>(bytes.data()) + off, len));
}

double numeric_field(std::span<const std::uint8_t> bytes, size_t off, size_t len,
                     const std::string& what) {
  std::string s = header_field(bytes, off, len);
  if (s.empty()) throw data_error("EDF: empty numeric field: " + what);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw data_error("EDF: non-numeric field '" + s + "' in " + what);
  return v;
}

long integer_field(std::span<const std::uint8_t> bytes, size_t off, size_t len,
                   const std::string& what) {
  double v = numeric_field(bytes, off, len, what);
  long r = std::lround(v);
  if (std::abs(v - static_cast<double>(r)) > 1e-9)
    throw data_error("EDF: expected integer in " + what);
  return r;
}

}  // namespace

Recording read_edf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 256) throw data_error("EDF: file shorter than the 256-byte header");

  std::string patient = header_field(bytes, 8, 80);
  long header_bytes_decl = integer_field(bytes, 184, 8, "header byte count");
  long n_records = integer_field(bytes, 236, 8, "data record count");
  double record_dur = numeric_field(bytes, 244, 8, "record duration");
  long ns = integer_field(bytes, 252, 4, "signal count");

  if (ns <= 0) throw data_error("EDF: signal count must be positive");
  if (record_dur <= 0.0) throw data_error("EDF: record duration must be positive");

  size_t header_bytes = 256 + 256 * static_cast<size_t>(ns);
  if (header_bytes_decl > 0 && static_cast<size_t>(header_bytes_decl) != header_bytes)
    throw data_error("EDF: declared header size does not match signal count");
  if (bytes.size() < header_bytes) throw data_error("EDF: truncated signal header block");

  // Signal header layout: ns*16 labels, ns*80 transducers, ns*8 dimensions,
  // then phys min/max, dig min/max (ns*8 each), ns*80 prefilter,
  // ns*8 samples-per-record, ns*32 reserved.
  size_t base = 256;
  auto sig_off = [&](size_t block_off, size_t width, long i) {
    return base + block_off + width * static_cast<size_t>(i);
  };
  size_t off_label = 0;
  size_t off_pmin = static_cast<size_t>(ns) * (16 + 80 + 8);
  size_t off_pmax = off_pmin + static_cast<size_t>(ns) * 8;
  size_t off_dmin = off_pmax + static_cast<size_t>(ns) * 8;
  size_t off_dmax = off_dmin + static_cast<size_t>(ns) * 8;
  size_t off_nsamp = off_dmax + static_cast<size_t>(ns) * (8 + 80);

  struct SigInfo {
    std::string label;
    double pmin, pmax;
    long dmin, dmax;
    long nsamp;
  };
  std::vector<SigInfo> sigs;
  long record_samples = 0;
  for (long i = 0; i < ns; ++i) {
    SigInfo s;
    s.label = header_field(bytes, sig_off(off_label, 16, i), 16);
    std::string tag = "signal '" + s.label + "'";
    s.pmin = numeric_field(bytes, sig_off(off_pmin, 8, i), 8, "physical minimum of " + tag);
    s.pmax = numeric_field(bytes, sig_off(off_pmax, 8, i), 8, "physical maximum of " + tag);
    s.dmin = integer_field(bytes, sig_off(off_dmin, 8, i), 8, "digital minimum of " + tag);
    s.dmax = integer_field(bytes, sig_off(off_dmax, 8, i), 8, "digital maximum of " + tag);
    s.nsamp = integer_field(bytes, sig_off(off_nsamp, 8, i), 8, "samples per record of " + tag);
    if (s.dmax == s.dmin) throw data_error("EDF: zero digital range in " + tag);
    if (s.nsamp <= 0) throw data_error("EDF: nonpositive samples per record in " + tag);
    record_samples += s.nsamp;
    sigs.push_back(std::move(s));
  }

  size_t record_bytes = 2 * static_cast<size_t>(record_samples);
  size_t payload = bytes.size() - header_bytes;
  if (n_records < 0) {  // -1 means "unknown"; infer from payload
    if (record_bytes == 0 || payload % record_bytes != 0)
      throw data_error("EDF: cannot infer record count from payload length");
    n_records = static_cast<long>(payload / record_bytes);
  }
  if (payload != record_bytes * static_cast<size_t>(n_records))
    throw data_error("EDF: payload length does not match declared record count");

  Recording rec;
  std::set<std::string> seen;
  for (const auto& s : sigs) {
    if (!seen.insert(s.label).second)
      throw data_error("EDF: duplicate channel label '" + s.label + "'");
    Channel ch;
    ch.label = s.label;
    ch.rate_hz = static_cast<double>(s.nsamp) / record_dur;
    ch.samples.reserve(static_cast<size_t>(s.nsamp) * static_cast<size_t>(n_records));
    rec.channels.push_back(std::move(ch));
  }

  const std::uint8_t* p = bytes.data() + header_bytes;
  for (long r = 0; r < n_records; ++r) {
    for (size_t i = 0; i < sigs.size(); ++i) {
      const auto& s = sigs[i];
      double gain = (s.pmax - s.pmin) / static_cast<double>(s.dmax - s.dmin);
      double offset = s.pmin - static_cast<double>(s.dmin) * gain;
      for (long k = 0; k < s.nsamp; ++k) {
        std::int16_t d = static_cast<std::int16_t>(
            static_cast<std::uint16_t>(p[0]) | (static_cast<std::uint16_t>(p[1]) << 8));
        rec.channels[i].samples.push_back(static_cast<double>(d) * gain + offset);
        p += 2;
      }
    }
  }

  // Pull sex out of the patient field if it follows the usual
  // "code sex birthdate name" convention.
  if (!patient.empty()) {
    std::istringstream ps(patient);
    std::string tok;
    std::vector<std::string> toks;
    while (ps >> tok) toks.push_back(tok);
    if (!toks.empty()) rec.subject_meta["patient_id"] = toks[0];
    if (toks.size() > 1 && (toks[1] == "M" || toks[1] == "F"))
      rec.subject_meta["sex"] = toks[1];
  }
  return rec;
}

Recording read_edf_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open EDF file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return read_edf(bytes);
}

namespace {

void put_field(std::vector<std::uint8_t>& out, const std::string& s, size_t len) {
  std::string f = s;
  if (f.size() > len) f.resize(len);
  f.resize(len, ' ');
  out.insert(out.end(), f.begin(), f.end());
}

std::string fmt_int(long v) { return std::to_string(v); }

}  // namespace

std::vector<std::uint8_t> write_edf(const Recording& rec) {
  if (rec.channels.empty()) throw data_error("EDF write: recording has no channels");
  long n_records = std::lround(rec.channels.front().duration_s());
  for (const auto& ch : rec.channels) {
    if (ch.rate_hz <= 0.0) throw data_error("EDF write: nonpositive channel rate");
    long nsamp = std::lround(ch.rate_hz);
    if (std::abs(ch.rate_hz - static_cast<double>(nsamp)) > 1e-9)
      throw data_error("EDF write: channel rate must be an integer (1 s records)");
    if (std::abs(ch.duration_s() - static_cast<double>(n_records)) > 1e-9)
      throw data_error("EDF write: channels must share a whole-second duration");
  }

  const double pmin = -1000.0, pmax = 1000.0;
  const long dmin = -32768, dmax = 32767;
  double gain = (pmax - pmin) / static_cast<double>(dmax - dmin);
  double offset = pmin - static_cast<double>(dmin) * gain;

  long ns = static_cast<long>(rec.channels.size());
  std::vector<std::uint8_t> out;
  out.reserve(256 * (1 + ns));

  std::string sex = "X";
  auto it = rec.subject_meta.find("sex");
  if (it != rec.subject_meta.end() && !it->second.empty()) sex = it->second;
  std::string pid = "SYN-001";
  auto pit = rec.subject_meta.find("patient_id");
  if (pit != rec.subject_meta.end() && !pit->second.empty()) pid = pit->second;

  put_field(out, "0", 8);
  put_field(out, pid + " " + sex + " X X", 80);
  put_field(out, "Startdate X X X X", 80);
  put_field(out, "01.01.00", 8);
  put_field(out, "00.00.00", 8);
  put_field(out, fmt_int(256 * (1 + ns)), 8);
  put_field(out, "", 44);
  put_field(out, fmt_int(n_records), 8);
  put_field(out, "1", 8);
  put_field(out, fmt_int(ns), 4);

  for (const auto& ch : rec.channels) put_field(out, ch.label, 16);
  for (long i = 0; i < ns; ++i) put_field(out, "", 80);
  for (long i = 0; i < ns; ++i) put_field(out, "uV", 8);
  for (long i = 0; i < ns; ++i) put_field(out, fmt_int(static_cast<long>(pmin)), 8);
  for (long i = 0; i < ns; ++i) put_field(out, fmt_int(static_cast<long>(pmax)), 8);
  for (long i = 0; i < ns; ++i) put_field(out, fmt_int(dmin), 8);
  for (long i = 0; i < ns; ++i) put_field(out, fmt_int(dmax), 8);
  for (long i = 0; i < ns; ++i) put_field(out, "", 80);
  for (const auto& ch : rec.channels) put_field(out, fmt_int(std::lround(ch.rate_hz)), 8);
  for (long i = 0; i < ns; ++i) put_field(out, "", 32);

  for (long r = 0; r < n_records; ++r) {
    for (const auto& ch : rec.channels) {
      long nsamp = std::lround(ch.rate_hz);
      for (long k = 0; k < nsamp; ++k) {
        double x = ch.samples[static_cast<size_t>(r * nsamp + k)];
        long d = std::lround((x - offset) / gain);
        d = std::clamp(d, dmin, dmax);
        auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(d));
        out.push_back(static_cast<std::uint8_t>(u & 0xff));
        out.push_back(static_cast<std::uint8_t>(u >> 8));
      }
    }
  }
  return out;
}

void write_edf_file(const Recording& rec, const std::string& path) {
  auto bytes = write_edf(rec);
  std::ofstream outf(path, std::ios::binary);
  if (!outf) throw data_error("cannot open output file: " + path);
  outf.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
  if (!outf) throw data_error("failed writing EDF to " + path);
}

AnnotationSet read_annotations(const std::string& text, int expert_id,
                               int header_lines, double min_duration_s) {
  AnnotationSet ann;
  ann.expert_id = expert_id;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no <= header_lines) continue;
    std::istringstream ls(line);
    std::string t1, t2, extra;
    if (!(ls >> t1)) continue;  // blank line
    if (!(ls >> t2) || (ls >> extra))
      throw data_error("annotations line " + std::to_string(line_no) +
                       ": expected two columns");
    auto parse = [&](const std::string& tok) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || p != tok.data() + tok.size())
        throw data_error("annotations line " + std::to_string(line_no) +
                         ": non-numeric token '" + tok + "'");
      return v;
    };
    Annotation ev{parse(t1), parse(t2)};
    if (ev.onset_s < 0.0)
      throw data_error("annotations line " + std::to_string(line_no) +
                       ": negative onset");
    if (ev.duration_s <= 0.0)
      throw data_error("annotations line " + std::to_string(line_no) +
                       ": duration must be positive");
    if (min_duration_s > 0.0 && ev.duration_s < min_duration_s) {
      std::cerr << "warning: annotations line " << line_no << ": event of "
                << ev.duration_s << " s below minimum duration, dropped\n";
      continue;
    }
    ann.events.push_back(ev);
  }
  std::stable_sort(ann.events.begin(), ann.events.end(),
                   [](const Annotation& a, const Annotation& b) {
                     return a.onset_s < b.onset_s;
                   });
  return ann;
}

std::string format_annotations(const AnnotationSet& ann) {
  std::string out;
  char buf[80];
  for (const auto& ev : ann.events) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", ev.onset_s, ev.duration_s);
    out += buf;
  }
  return out;
}

Channel resample_cubic(const Channel& ch, double target_hz) {
  size_t n = ch.samples.size();
  if (n < 4) throw data_error("resample: need at least 4 samples for a cubic spline");
  if (target_hz <= 0.0 || ch.rate_hz <= 0.0)
    throw data_error("resample: rates must be positive");

  const std::vector<double>& y = ch.samples;

  // Natural spline second derivatives on the uniform grid (h = 1 in sample
  // units): m[i-1] + 4 m[i] + m[i+1] = 6 (y[i+1] - 2 y[i] + y[i-1]),
  // m[0] = m[n-1] = 0, solved with the Thomas algorithm.
  std::vector<double> m(n, 0.0);
  std::vector<double> cp(n, 0.0), dp(n, 0.0);
  for (size_t i = 1; i + 1 < n; ++i) {
    double rhs = 6.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]);
    double denom = 4.0 - cp[i - 1];
    cp[i] = 1.0 / denom;
    dp[i] = (rhs - dp[i - 1]) / denom;
  }
  for (size_t i = n - 2; i > 0; --i) m[i] = dp[i] - cp[i] * m[i + 1];

  Channel out;
  out.label = ch.label;
  out.rate_hz = target_hz;
  double duration = static_cast<double>(n) / ch.rate_hz;
  size_t out_n = static_cast<size_t>(std::llround(duration * target_hz));
  out.samples.resize(out_n);
  double step = ch.rate_hz / target_hz;  // output spacing in sample units
  for (size_t k = 0; k < out_n; ++k) {
    double s = static_cast<double>(k) * step;
    auto i = static_cast<size_t>(std::floor(s));
    if (i > n - 2) i = n - 2;  // extrapolate the last piece past the end
    double b = s - static_cast<double>(i);
    double a = 1.0 - b;
    out.samples[k] = a * y[i] + b * y[i + 1] +
                     ((a * a * a - a) * m[i] + (b * b * b - b) * m[i + 1]) / 6.0;
  }
  return out;
}

namespace {

// Waxing-waning 12-14 Hz burst.
void add_spindle(std::vector<double>& x, double rate, double onset, double dur,
                 double amp, double freq, double phase) {
  auto i0 = static_cast<size_t>(std::ceil(onset * rate));
  auto i1 = static_cast<size_t>(std::floor((onset + dur) * rate));
  i1 = std::min(i1, x.size());
  for (size_t i = i0; i < i1; ++i) {
    double t = static_cast<double>(i) / rate - onset;
    double env = 0.5 * (1.0 - std::cos(2.0 * kPi * t / dur));  // Hann
    x[i] += amp * env * std::sin(2.0 * kPi * freq * t + phase);
  }
}

// Negative sharp half-wave followed by a broader positive hump.
void add_kcomplex(std::vector<double>& x, double rate, double onset, double dur,
                  double amp) {
  auto i0 = static_cast<size_t>(std::ceil(onset * rate));
  auto i1 = static_cast<size_t>(std::floor((onset + dur) * rate));
  i1 = std::min(i1, x.size());
  double split = 0.4 * dur;
  for (size_t i = i0; i < i1; ++i) {
    double t = static_cast<double>(i) / rate - onset;
    if (t < split)
      x[i] -= amp * std::sin(kPi * t / split);
    else
      x[i] += 0.6 * amp * std::sin(kPi * (t - split) / (dur - split));
  }
}

}  // namespace

SynthResult synth_recording(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.duration_s <= 0.0 || cfg.rate_hz <= 0.0)
    throw config_error("synth: duration and rate must be positive");
  if (cfg.n_events < 0) throw config_error("synth: negative event count");

  const double max_dur = cfg.kind == EventKind::spindle ? 1.4 : 0.9;
  const double min_dur = cfg.kind == EventKind::spindle ? 0.6 : 0.6;
  const double margin = 2.0, gap = 1.0;

  double usable = cfg.duration_s - 2.0 * margin;
  double slot = cfg.n_events > 0 ? usable / cfg.n_events : usable;
  if (cfg.n_events > 0 && slot < max_dur + gap)
    throw data_error("synth: event count exceeds recording capacity");

  // Event schedule: one event per slot, onset jittered within the slot.
  rng_t ev_rng(derive_seed(seed, 1));
  struct Ev {
    double onset, dur, freq, phase;
  };
  std::vector<Ev> events;
  for (int e = 0; e < cfg.n_events; ++e) {
    Ev ev;
    ev.dur = ev_rng.uniform(min_dur, max_dur);
    double lo = margin + e * slot;
    ev.onset = lo + ev_rng.uniform01() * (slot - ev.dur - gap);
    ev.freq = ev_rng.uniform(12.0, 14.0);
    ev.phase = ev_rng.uniform(0.0, 2.0 * kPi);
    events.push_back(ev);
  }

  auto n = static_cast<size_t>(std::llround(cfg.duration_s * cfg.rate_hz));
  static const char* kLabels[3] = {"CZ-A1", "FP1-A1", "O1-A1"};
  SynthResult res;
  for (int c = 0; c < 3; ++c) {
    Channel ch;
    ch.label = kLabels[c];
    ch.rate_hz = cfg.rate_hz;
    ch.samples.assign(n, 0.0);

    // Background: three band-limited sinusoid banks plus white noise.
    rng_t bg(derive_seed(seed, 2, static_cast<std::uint64_t>(c)));
    struct Bank {
      double f_lo, f_hi, amp;
    };
    const Bank banks[3] = {{0.5, 2.0, 3.0}, {4.0, 7.0, 1.5}, {8.0, 12.0, 0.75}};
    std::vector<double> bf, ba, bp;
    for (const auto& bank : banks) {
      for (int k = 0; k < 4; ++k) {
        bf.push_back(bg.uniform(bank.f_lo, bank.f_hi));
        ba.push_back(bank.amp * cfg.noise_amp_uv * bg.uniform(0.5, 1.0));
        bp.push_back(bg.uniform(0.0, 2.0 * kPi));
      }
    }
    for (size_t i = 0; i < n; ++i) {
      double t = static_cast<double>(i) / cfg.rate_hz;
      double v = bg.normal(0.0, cfg.noise_amp_uv);
      for (size_t b = 0; b < bf.size(); ++b) v += ba[b] * std::sin(2.0 * kPi * bf[b] * t + bp[b]);
      ch.samples[i] = v;
    }

    double amp = cfg.event_amp_uv * (c == 0 ? 1.0 : cfg.offcentral_gain);
    for (const auto& ev : events) {
      if (cfg.kind == EventKind::spindle)
        add_spindle(ch.samples, cfg.rate_hz, ev.onset, ev.dur, amp, ev.freq, ev.phase);
      else
        add_kcomplex(ch.samples, cfg.rate_hz, ev.onset, ev.dur, amp);
    }
    res.recording.channels.push_back(std::move(ch));
  }
  if (!cfg.sex.empty()) res.recording.subject_meta["sex"] = cfg.sex;

  for (int x = 0; x < 2; ++x) {
    AnnotationSet& ann = x == 0 ? res.expert1 : res.expert2;
    ann.expert_id = x + 1;
    rng_t jr(derive_seed(seed, 3, static_cast<std::uint64_t>(x)));
    for (const auto& ev : events) {
      double onset = ev.onset + (cfg.jitter_std_s > 0.0 ? jr.normal(0.0, cfg.jitter_std_s) : 0.0);
      onset = std::clamp(onset, 0.0, cfg.duration_s - ev.dur);
      ann.events.push_back({onset, ev.dur});
    }
    std::stable_sort(ann.events.begin(), ann.events.end(),
                     [](const Annotation& a, const Annotation& b) {
                       return a.onset_s < b.onset_s;
                     });
  }
  return res;
}

}  // namespace sleepgp
