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
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace aad {

enum class MachineType { kValve, kPump, kFan, kSlideRail };
enum class Label { kNormal, kAnomalous };

std::string to_string(MachineType machine);
std::string to_string(Label label);
// Throws kConfiguration for unknown names. Accepts "slide_rail" and "slider".
MachineType parse_machine(const std::string& name);
bool try_parse_machine(const std::string& name, MachineType* out);

// PCM audio, channel-major: samples[c * n_samples + t].
struct AudioClip {
  int channels = 0;
  int sample_rate = 0;
  std::size_t n_samples = 0;
  std::vector<float> samples;
  std::string source_path;

  std::span<const float> channel(int index) const;
};

struct WavInfo {
  int channels = 0;
  int sample_rate = 0;
  int bits_per_sample = 0;
  std::size_t n_samples = 0;  // per channel
};

// Reads only the header chunks; validates that the file is 16-bit PCM.
WavInfo probe_wav(const std::filesystem::path& path);

// 16-bit PCM RIFF/WAVE of any channel count. Samples are divided by 32768,
// so -32768 maps to -1.0 exactly.
AudioClip read_wav(const std::filesystem::path& path);

// Writes mono 16-bit PCM. Samples are clamped to [-1, 1) before quantizing.
void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate);

// Bounds error unless 0 <= index < clip.channels.
AudioClip select_channel(const AudioClip& clip, int index);

struct ClipEntry {
  std::filesystem::path path;
  MachineType machine = MachineType::kValve;
  std::string model_id;
  std::string snr;  // normalized tag: "6dB", "0dB", "-6dB"
  Label label = Label::kNormal;

  friend bool operator==(const ClipEntry&, const ClipEntry&) = default;
};

using CellKey = std::tuple<MachineType, std::string, std::string, Label>;

struct ClipIndex {
  std::vector<ClipEntry> entries;
  std::vector<std::string> warnings;

  std::map<CellKey, std::size_t> counts() const;
  std::vector<ClipEntry> select(MachineType machine, const std::string& model_id,
                                const std::string& snr) const;
};

// Normalizes "6dB", "-6_dB", "6_dB_fan" (the public dataset naming) to "6dB".
// Returns false when the name carries no SNR tag.
bool parse_snr_tag(const std::string& name, std::string* tag);

// Walks root/<snr>/<machine>/<model_id>/<normal|abnormal>/*.wav. Entries are
// ordered lexicographically by path. Unknown machine directories are skipped
// and reported in warnings. Throws kEmptyInput when nothing is found.
ClipIndex scan_dataset(const std::filesystem::path& root);

// CSV with header `path,machine,model_id,snr,label`.
std::string to_csv(const ClipIndex& index);
ClipIndex index_from_csv(const std::string& text);

}  // namespace aad
