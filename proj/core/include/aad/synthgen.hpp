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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aad/audio_io.hpp"

namespace aad {

enum class AnomalyKind { kTransientBursts, kDetunedHarmonics, kAmplitudeModulation };

std::string to_string(AnomalyKind kind);
AnomalyKind parse_anomaly_kind(const std::string& name);

// Parameters of one synthetic machine (one model ID at one SNR). Stationary
// machines are harmonic stacks over base_freqs; valves are silent apart from
// short tonal actuation events, with occasional background episodes in the
// gaps.
struct SynthSpec {
  MachineType machine = MachineType::kFan;
  std::string model_id = "id_00";
  std::size_t n_normal = 40;
  std::size_t n_anomalous = 10;
  int snr_db = 6;
  std::vector<double> base_freqs = {120.0, 310.0};
  AnomalyKind anomaly_kind = AnomalyKind::kAmplitudeModulation;
  std::uint64_t seed = 0;
  int sample_rate = 16000;
  double duration_seconds = 10.0;
  int harmonics = 8;
  double signal_rms = 0.05;
  // Anomaly strength, interpreted per kind: relative detuning, modulation
  // depth, or burst level in multiples of the median envelope.
  double anomaly_strength = 0.0;  // 0 selects the per-kind default

  void validate() const;
  nlohmann::json to_json() const;
  static SynthSpec from_json(const nlohmann::json& j);
};

// Reference presets, one per machine type.
SynthSpec default_spec(MachineType machine, int snr_db, std::uint64_t seed);

struct SynthComponents {
  std::vector<double> machine;  // normal operating sound
  std::vector<double> anomaly;  // additive anomaly component (zero for normals)
  std::vector<double> noise;    // white noise scaled against `machine`
  std::vector<double> background;  // valve gap episodes (zero otherwise)
};

// Separate components before mixing and quantization; fully determined by
// (spec.seed, index, label).
SynthComponents gen_clip_components(const SynthSpec& spec, std::size_t index, Label label);

// Mixed mono clip (machine + anomaly + noise), clamped to [-1, 1).
AudioClip gen_clip(const SynthSpec& spec, std::size_t index, Label label);

struct GeneratedTree {
  std::vector<std::filesystem::path> files;
  std::filesystem::path manifest;
};

// Writes <root>/<snr>dB/<machine>/<model_id>/<normal|abnormal>/NNNN.wav for
// each spec plus <root>/manifest.json. Refuses a non-empty root unless
// overwrite is set.
GeneratedTree gen_dataset(const std::vector<SynthSpec>& specs, const std::filesystem::path& root,
                          bool overwrite);
GeneratedTree gen_dataset(const SynthSpec& spec, const std::filesystem::path& root,
                          bool overwrite);

}  // namespace aad
