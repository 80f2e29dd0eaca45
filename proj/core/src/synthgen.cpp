// Copyright 2026 The AAD Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "aad/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "aad/error.hpp"

namespace aad {
namespace fs = std::filesystem;
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Valve event shape.
constexpr double kValveEventDecay = 0.015;   // seconds
constexpr double kValveEventSpan = 8.0;      // event length in decay constants
constexpr double kValveEventPeak = 0.3;
constexpr double kValveMinSpacing = 1.5;     // seconds
// Transient bursts.
constexpr double kBurstSpan = 0.25;          // seconds
constexpr double kBurstDecay = 0.05;         // seconds
constexpr double kBurstPole = 0.98;

constexpr double kGapClearance = 0.6;        // seconds between episodes and events
constexpr double kValveRingStretch = 75.0;   // decay growth per unit detune

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent stream per (seed, index, label, purpose).
std::mt19937_64 stream(const SynthSpec& spec, std::size_t index, Label label, std::uint64_t purpose) {
  std::uint64_t h = splitmix64(spec.seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(index));
  h = splitmix64(h ^ (label == Label::kNormal ? 0x11ULL : 0x22ULL));
  h = splitmix64(h ^ purpose);
  return std::mt19937_64(h);
}

double mean_power(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

double median_envelope(const std::vector<double>& x, int sample_rate) {
  const auto half = static_cast<std::size_t>(std::lround(0.005 * sample_rate));
  const std::size_t n = x.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + std::fabs(x[i]);
  std::vector<double> env(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    env[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  auto mid = env.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(env.begin(), mid, env.end());
  return *mid;
}

struct Partial {
  double freq;
  double amp;
  double phase;
};

// Harmonic stack with small per-clip jitter; `detune` stretches partial h by
// (1 + detune * sqrt(h)).
std::vector<Partial> harmonic_partials(const SynthSpec& spec, std::mt19937_64& rng, int harmonics,
                                       double detune) {
  std::normal_distribution<double> jitter(0.0, 0.003);
  std::uniform_real_distribution<double> amp_jitter(0.9, 1.1);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  std::vector<Partial> out;
  const double nyquist = spec.sample_rate / 2.0;
  for (double base : spec.base_freqs) {
    const double f0 = base * (1.0 + jitter(rng));
    for (int h = 1; h <= harmonics; ++h) {
      const double f = f0 * h * (1.0 + detune * std::sqrt(static_cast<double>(h)));
      const double a = amp_jitter(rng) / h;
      const double p = phase(rng);
      if (f < 0.95 * nyquist) out.push_back({f, a, p});
    }
  }
  return out;
}

void add_partials(std::vector<double>& x, const std::vector<Partial>& partials, int sample_rate,
                  std::size_t begin = 0, std::size_t end = std::size_t(-1), double decay = 0.0,
                  double gain = 1.0) {
  end = std::min(end, x.size());
  if (begin >= end) return;
  const double env_step = decay > 0.0 ? std::exp(-1.0 / (decay * sample_rate)) : 1.0;
  for (const Partial& p : partials) {
    // Second-order recurrence sin(w(n+1)+p) = 2cos(w) sin(wn+p) - sin(w(n-1)+p).
    const double w = kTwoPi * p.freq / sample_rate;
    const double k = 2.0 * std::cos(w);
    double prev = std::sin(p.phase - w);
    double cur = std::sin(p.phase);
    double env = gain * p.amp;
    for (std::size_t i = begin; i < end; ++i) {
      x[i] += env * cur;
      const double next = k * cur - prev;
      prev = cur;
      cur = next;
      env *= env_step;
    }
  }
}

double default_strength(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kDetunedHarmonics: return 0.3;
    case AnomalyKind::kAmplitudeModulation: return 0.9;
    case AnomalyKind::kTransientBursts: return 20.0;
  }
  return 0.0;
}

std::vector<double> valve_event_times(const SynthSpec& spec, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(3, 5);
  std::uniform_real_distribution<double> when(0.2, spec.duration_seconds - 0.3);
  const int k = count(rng);
  std::vector<double> times;
  for (int attempt = 0; attempt < 1000 && static_cast<int>(times.size()) < k; ++attempt) {
    const double t = when(rng);
    if (std::all_of(times.begin(), times.end(),
                    [&](double u) { return std::fabs(u - t) >= kValveMinSpacing; })) {
      times.push_back(t);
    }
  }
  std::sort(times.begin(), times.end());
  return times;
}

}  // namespace

std::string to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kTransientBursts: return "transient_bursts";
    case AnomalyKind::kDetunedHarmonics: return "detuned_harmonics";
    case AnomalyKind::kAmplitudeModulation: return "amplitude_modulation";
  }
  return "unknown";
}

AnomalyKind parse_anomaly_kind(const std::string& name) {
  if (name == "transient_bursts") return AnomalyKind::kTransientBursts;
  if (name == "detuned_harmonics") return AnomalyKind::kDetunedHarmonics;
  if (name == "amplitude_modulation") return AnomalyKind::kAmplitudeModulation;
  throw Error(ErrorKind::kConfiguration, "unknown anomaly kind '" + name + "'");
}

void SynthSpec::validate() const {
  if (n_normal < 2 * n_anomalous) {
    throw Error(ErrorKind::kConfiguration, "synth spec needs n_normal >= 2 * n_anomalous");
  }
  if (snr_db != 6 && snr_db != 0 && snr_db != -6) {
    throw Error(ErrorKind::kConfiguration, "snr_db must be one of 6, 0, -6");
  }
  if (base_freqs.empty()) throw Error(ErrorKind::kConfiguration, "base_freqs is empty");
  if (sample_rate <= 0 || duration_seconds < 1.0) {
    throw Error(ErrorKind::kConfiguration, "sample rate or duration out of range");
  }
  if (model_id.empty()) throw Error(ErrorKind::kConfiguration, "model_id is empty");
}

nlohmann::json SynthSpec::to_json() const {
  nlohmann::json j;
  j["machine"] = to_string(machine);
  j["model_id"] = model_id;
  j["n_normal"] = n_normal;
  j["n_anomalous"] = n_anomalous;
  j["snr_db"] = snr_db;
  j["base_freqs"] = base_freqs;
  j["anomaly_kind"] = to_string(anomaly_kind);
  j["seed"] = seed;
  j["sample_rate"] = sample_rate;
  j["duration_seconds"] = duration_seconds;
  j["harmonics"] = harmonics;
  j["signal_rms"] = signal_rms;
  j["anomaly_strength"] = anomaly_strength;
  return j;
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j) {
  try {
    const MachineType machine = parse_machine(j.at("machine").get<std::string>());
    SynthSpec s = default_spec(machine, j.value("snr_db", 6), j.value("seed", std::uint64_t{0}));
    s.model_id = j.value("model_id", s.model_id);
    s.n_normal = j.value("n_normal", s.n_normal);
    s.n_anomalous = j.value("n_anomalous", s.n_anomalous);
    s.base_freqs = j.value("base_freqs", s.base_freqs);
    if (j.contains("anomaly_kind")) {
      s.anomaly_kind = parse_anomaly_kind(j.at("anomaly_kind").get<std::string>());
    }
    s.sample_rate = j.value("sample_rate", s.sample_rate);
    s.duration_seconds = j.value("duration_seconds", s.duration_seconds);
    s.harmonics = j.value("harmonics", s.harmonics);
    s.signal_rms = j.value("signal_rms", s.signal_rms);
    s.anomaly_strength = j.value("anomaly_strength", s.anomaly_strength);
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfiguration, std::string("synth spec: ") + e.what());
  }
}

SynthSpec default_spec(MachineType machine, int snr_db, std::uint64_t seed) {
  SynthSpec s;
  s.machine = machine;
  s.snr_db = snr_db;
  s.seed = seed;
  switch (machine) {
    case MachineType::kValve:
      s.base_freqs = {1150.0, 2650.0};
      s.harmonics = 3;
      s.anomaly_kind = AnomalyKind::kDetunedHarmonics;
      s.anomaly_strength = 0.02;
      break;
    case MachineType::kPump:
      s.base_freqs = {95.0, 240.0};
      s.harmonics = 10;
      s.anomaly_kind = AnomalyKind::kDetunedHarmonics;
      break;
    case MachineType::kFan:
      s.base_freqs = {60.0, 410.0};
      s.harmonics = 8;
      s.anomaly_kind = AnomalyKind::kAmplitudeModulation;
      break;
    case MachineType::kSlideRail:
      s.base_freqs = {180.0, 520.0};
      s.harmonics = 10;
      s.anomaly_kind = AnomalyKind::kTransientBursts;
      break;
  }
  return s;
}

SynthComponents gen_clip_components(const SynthSpec& spec, std::size_t index, Label label) {
  spec.validate();
  const auto n = static_cast<std::size_t>(std::lround(spec.duration_seconds * spec.sample_rate));
  const int sr = spec.sample_rate;
  const bool anomalous = label == Label::kAnomalous;
  const double strength =
      spec.anomaly_strength > 0.0 ? spec.anomaly_strength : default_strength(spec.anomaly_kind);

  SynthComponents out;
  out.machine.assign(n, 0.0);
  out.anomaly.assign(n, 0.0);
  out.noise.assign(n, 0.0);
  out.background.assign(n, 0.0);

  std::mt19937_64 rng = stream(spec, index, label, 1);
  const double detune =
      anomalous && spec.anomaly_kind == AnomalyKind::kDetunedHarmonics ? strength : 0.0;

  std::vector<double> times;
  if (spec.machine == MachineType::kValve) {
    times = valve_event_times(spec, rng);
    std::uniform_real_distribution<double> gain(0.9, 1.1);
    const auto len = static_cast<std::size_t>(kValveEventSpan * kValveEventDecay * sr);
    for (double t : times) {
      const auto begin = static_cast<std::size_t>(t * sr);
      const double g = kValveEventPeak * gain(rng);
      // Draw the partials once so that normal and detuned versions share
      // phases and amplitudes; the anomaly is their difference.
      std::mt19937_64 partial_rng = rng;
      const auto normal = harmonic_partials(spec, partial_rng, spec.harmonics, 0.0);
      std::mt19937_64 detuned_rng = rng;
      const auto shifted = harmonic_partials(spec, detuned_rng, spec.harmonics, detune);
      rng = partial_rng;
      double norm = 0.0;
      for (const Partial& p : normal) norm += p.amp;
      add_partials(out.machine, normal, sr, begin, begin + len, kValveEventDecay, g / norm);
      if (detune > 0.0) {
        // A sticking valve also rings longer.
        const double decay = kValveEventDecay * (1.0 + kValveRingStretch * detune);
        const auto ring = static_cast<std::size_t>(kValveEventSpan * decay * sr);
        add_partials(out.anomaly, shifted, sr, begin, begin + ring, decay, g / norm);
        add_partials(out.anomaly, normal, sr, begin, begin + len, kValveEventDecay, -g / norm);
      }
    }
  } else {
    std::mt19937_64 partial_rng = rng;
    const auto normal = harmonic_partials(spec, partial_rng, spec.harmonics, 0.0);
    add_partials(out.machine, normal, sr);
    if (spec.machine == MachineType::kSlideRail) {
      // Back-and-forth travel: slow periodic level change.
      for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        out.machine[i] *= 1.0 + 0.3 * std::sin(kTwoPi * 0.5 * t);
      }
    }
    if (detune > 0.0) {
      std::mt19937_64 detuned_rng = rng;
      const auto shifted = harmonic_partials(spec, detuned_rng, spec.harmonics, detune);
      add_partials(out.anomaly, shifted, sr);
      add_partials(out.anomaly, normal, sr, 0, n, 0.0, -1.0);
      if (spec.machine == MachineType::kSlideRail) {
        for (std::size_t i = 0; i < n; ++i) {
          const double t = static_cast<double>(i) / sr;
          out.anomaly[i] *= 1.0 + 0.3 * std::sin(kTwoPi * 0.5 * t);
        }
      }
    }
    rng = partial_rng;
    const double scale = spec.signal_rms / std::sqrt(mean_power(out.machine));
    for (double& v : out.machine) v *= scale;
    for (double& v : out.anomaly) v *= scale;
  }

  if (anomalous && spec.anomaly_kind == AnomalyKind::kAmplitudeModulation) {
    std::mt19937_64 am = stream(spec, index, label, 2);
    std::uniform_real_distribution<double> rate(6.0, 12.0);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    const double f = rate(am);
    const double p = phase(am);
    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) / sr;
      out.anomaly[i] += strength * std::sin(kTwoPi * f * t + p) * out.machine[i];
    }
  }

  // White noise at the target SNR relative to the normal machine sound.
  {
    std::mt19937_64 noise_rng = stream(spec, index, label, 3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& v : out.noise) v = gauss(noise_rng);
    const double target = mean_power(out.machine) / std::pow(10.0, spec.snr_db / 10.0);
    const double scale = std::sqrt(target / mean_power(out.noise));
    for (double& v : out.noise) v *= scale;
  }

  if (spec.machine == MachineType::kValve) {
    // Non-stationary gap content (neighbouring machines): tones kept below
    // the actuation peaks.
    std::mt19937_64 bg = stream(spec, index, label, 4);
    std::uniform_int_distribution<int> count(0, 4);
    std::uniform_real_distribution<double> start(0.0, spec.duration_seconds - 2.0);
    std::uniform_real_distribution<double> length(0.5, 2.0);
    std::uniform_real_distribution<double> log_freq(std::log(200.0), std::log(6000.0));
    std::uniform_real_distribution<double> level(1.5, 3.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double noise_rms = std::sqrt(mean_power(out.noise));
    const int episodes = count(bg);
    std::vector<std::pair<double, double>> taken;
    for (int e = 0; e < episodes; ++e) {
      // Episodes stay clear of every actuation and of each other.
      double t0 = 0.0;
      double dur = 0.0;
      bool placed = false;
      for (int attempt = 0; attempt < 100 && !placed; ++attempt) {
        t0 = start(bg);
        dur = length(bg);
        placed = std::all_of(times.begin(), times.end(),
                             [&](double t) {
                               return t0 + dur + kGapClearance <= t || t + kGapClearance <= t0;
                             }) &&
                 std::all_of(taken.begin(), taken.end(), [&](const std::pair<double, double>& u) {
                   return t0 + dur <= u.first || u.second <= t0;
                 });
      }
      if (!placed) continue;
      taken.emplace_back(t0, t0 + dur);
      const auto begin = static_cast<std::size_t>(t0 * sr);
      const auto len = static_cast<std::size_t>(dur * sr);
      const double fc = std::exp(log_freq(bg));
      const double lvl = level(bg) * noise_rms;
      // Constant-envelope tone so the episode never reaches the peak threshold.
      std::vector<double> y(len, 0.0);
      const double p = kTwoPi * unit(bg);
      for (std::size_t i = 0; i < len; ++i) y[i] = std::sin(kTwoPi * fc * i / sr + p);
      const double rms = std::sqrt(mean_power(y));
      for (std::size_t i = 0; i < len && begin + i < n; ++i) {
        const double ramp = std::min({1.0, i / (0.05 * sr), (len - i) / (0.05 * sr)});
        out.background[begin + i] += lvl * ramp * y[i] / rms;
      }
    }
  }

  if (anomalous && spec.anomaly_kind == AnomalyKind::kTransientBursts) {
    std::vector<double> mix(n);
    for (std::size_t i = 0; i < n; ++i) mix[i] = out.machine[i] + out.noise[i] + out.background[i];
    const double median = median_envelope(mix, sr);
    std::mt19937_64 br = stream(spec, index, label, 5);
    std::uniform_int_distribution<int> count(5, 10);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> log_freq(std::log(1500.0), std::log(5000.0));
    const int bursts = count(br);
    const auto len = static_cast<std::size_t>(kBurstSpan * sr);
    const auto head = static_cast<std::size_t>(0.01 * sr);
    // Evenly spread slots with jitter keep bursts apart.
    const double slot = spec.duration_seconds / bursts;
    std::uniform_real_distribution<double> jitter(0.1, 0.6);
    for (int b = 0; b < bursts; ++b) {
      const auto begin = static_cast<std::size_t>((b + jitter(br)) * slot * sr);
      // Impact exciting a structural resonance.
      const double fc = std::exp(log_freq(br));
      const double a1 = 2.0 * kBurstPole * std::cos(kTwoPi * fc / sr);
      const double a2 = -kBurstPole * kBurstPole;
      std::vector<double> y(len, 0.0);
      double y1 = 0.0;
      double y2 = 0.0;
      for (std::size_t i = 0; i < len; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double v = std::exp(-t / kBurstDecay) * gauss(br) + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = v;
        y[i] = v;
      }
      // Scale so the mean magnitude over the first 10 ms is strength x median.
      double head_mag = 0.0;
      for (std::size_t i = 0; i < head; ++i) head_mag += std::fabs(y[i]);
      head_mag /= static_cast<double>(head);
      const double gain = strength * median / head_mag;
      for (std::size_t i = 0; i < len && begin + i < n; ++i) out.anomaly[begin + i] += gain * y[i];
    }
  }
  return out;
}

AudioClip gen_clip(const SynthSpec& spec, std::size_t index, Label label) {
  const SynthComponents c = gen_clip_components(spec, index, label);
  AudioClip clip;
  clip.channels = 1;
  clip.sample_rate = spec.sample_rate;
  clip.n_samples = c.machine.size();
  clip.samples.resize(clip.n_samples);
  constexpr double kMax = 32767.0 / 32768.0;
  for (std::size_t i = 0; i < clip.n_samples; ++i) {
    const double v = c.machine[i] + c.anomaly[i] + c.noise[i] + c.background[i];
    clip.samples[i] = static_cast<float>(std::clamp(v, -1.0, kMax));
  }
  clip.source_path = "synth:" + to_string(spec.machine) + "/" + spec.model_id + "/" +
                     std::to_string(index) + "/" + to_string(label);
  return clip;
}

GeneratedTree gen_dataset(const std::vector<SynthSpec>& specs, const fs::path& root,
                          bool overwrite) {
  if (fs::exists(root) && !fs::is_empty(root)) {
    if (!overwrite) {
      throw Error(ErrorKind::kUsage,
                  root.string() + " is not empty; pass the overwrite flag to regenerate");
    }
    fs::remove_all(root);
  }
  fs::create_directories(root);

  GeneratedTree tree;
  nlohmann::json manifest;
  manifest["generator"] = "aad synthgen";
  manifest["layout"] = "<snr>/<machine>/<model_id>/<normal|abnormal>/NNNN.wav";
  manifest["specs"] = nlohmann::json::array();
  for (const SynthSpec& spec : specs) {
    spec.validate();
    manifest["specs"].push_back(spec.to_json());
    const fs::path base =
        root / (std::to_string(spec.snr_db) + "dB") / to_string(spec.machine) / spec.model_id;
    auto write_label = [&](Label label, std::size_t count) {
      const fs::path dir = base / (label == Label::kNormal ? "normal" : "abnormal");
      fs::create_directories(dir);
      for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "%04zu.wav", i);
        const AudioClip clip = gen_clip(spec, i, label);
        write_wav(dir / name, clip.samples, clip.sample_rate);
        tree.files.push_back(dir / name);
      }
    };
    write_label(Label::kNormal, spec.n_normal);
    write_label(Label::kAnomalous, spec.n_anomalous);
  }
  tree.manifest = root / "manifest.json";
  std::ofstream(tree.manifest) << manifest.dump(2) << '\n';
  return tree;
}

GeneratedTree gen_dataset(const SynthSpec& spec, const fs::path& root, bool overwrite) {
  return gen_dataset(std::vector<SynthSpec>{spec}, root, overwrite);
}

}  // namespace aad
