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
#include <span>
#include <string>
#include <vector>

#include "aad/audio_io.hpp"
#include "aad/grid.hpp"

namespace aad {

struct ValveConfig {
  double smoothing_seconds = 0.010;
  double threshold_factor = 5.0;  // times the median envelope
  double segment_seconds = 1.0;
};

struct FeatureConfig {
  int sample_rate = 16000;
  int frame_size = 1024;
  int hop_size = 512;
  int n_mels = 64;
  int n_stack = 5;       // frames per dense-AE input vector
  int window_frames = 64;  // frames per SVDD window (must equal n_mels)
  ValveConfig valve;
};

inline constexpr double kLogFloor = 1e-10;
inline constexpr double kStdFloor = 1e-8;

// Natural-log Mel energies, [n_frames x n_mels].
struct LogMelSpectrogram {
  Matrix values;
  int frame_size = 1024;
  int hop_size = 512;
  int sample_rate = 16000;

  std::size_t n_frames() const { return values.rows; }
  std::size_t n_mels() const { return values.cols; }
};

struct NormStats {
  double mean = 0.0;
  double std = 1.0;
};

// n_windows x size x size, row-major per window (frame-major within a window).
struct WindowStack {
  std::size_t n_windows = 0;
  std::size_t size = 0;
  std::vector<float> data;

  std::span<const float> window(std::size_t i) const {
    return {data.data() + i * size * size, size * size};
  }
};

struct FeatureBatch {
  Grid<float> ae_vectors;
  WindowStack svdd_windows;
  std::string clip_id;
};

// Periodic Hann window, reflect padding of frame_size/2 on both ends.
// Result is [floor(len / hop) + 1 x frame_size / 2 + 1] of |X_b|^2.
Matrix stft_power(std::span<const float> signal, int frame_size = 1024, int hop_size = 512);

// HTK Mel scale, triangles with unit peak, centers equally spaced in Mel
// between 0 Hz and sample_rate / 2. Shape [n_mels x frame_size / 2 + 1].
Matrix mel_filterbank(int n_mels = 64, int frame_size = 1024, int sample_rate = 16000);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// ln(max(fbank * power^T, kLogFloor))^T.
LogMelSpectrogram log_mel(const Matrix& power, const Matrix& fbank);

// Sliding stride-1 concatenation of n_stack consecutive frames.
Grid<float> stack_frames(const LogMelSpectrogram& spec, int n_stack = 5);

// Non-overlapping width x width windows; the trailing window is zero padded.
WindowStack tile_windows(const LogMelSpectrogram& spec, int width = 64);

NormStats fit_normalizer(std::span<const LogMelSpectrogram> train_specs);
LogMelSpectrogram apply_normalizer(const LogMelSpectrogram& spec, const NormStats& stats);


// Envelope peak picking on |x|. Returns the retained peak sample positions in
// time order.
std::vector<std::size_t> detect_valve_peaks(std::span<const float> signal, int sample_rate,
                                            const ValveConfig& config = {});

// Concatenates the 1-second segments centered on each detected peak; returns
// the input unchanged when nothing qualifies.
std::vector<float> preprocess_valve(std::span<const float> signal, int sample_rate,
                                    const ValveConfig& config = {});

// Channel 0, optional valve preprocessing (only applied when machine is a
// valve), STFT, log-Mel. Rejects sample rates other than config.sample_rate.
LogMelSpectrogram extract_log_mel(const AudioClip& clip, MachineType machine,
                                  bool valve_preprocess, const FeatureConfig& config = {});

FeatureBatch make_feature_batch(const LogMelSpectrogram& normalized, const std::string& clip_id,
                                const FeatureConfig& config = {});

// Binary cache: "AADF", u16 version, u32 n_frames, u16 n_mels, 4 reserved
// bytes, then little-endian float32 cells in row-major order.
inline constexpr std::uint16_t kFeatureFileVersion = 1;
void write_feature_file(const std::filesystem::path& path, const LogMelSpectrogram& spec);
LogMelSpectrogram read_feature_file(const std::filesystem::path& path,
                                    const FeatureConfig& config = {});

}  // namespace aad
