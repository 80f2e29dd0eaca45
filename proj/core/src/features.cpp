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

#include "aad/features.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "aad/error.hpp"

namespace aad {
namespace {

// The FFTW planner is not thread-safe; executing an existing plan on new
// arrays is.
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    out_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }
  const fftw_complex* execute() {
    fftw_execute(plan_);
    return out_;
  }
  int size() const { return n_; }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

// Reflection without edge repetition (numpy "reflect"), folded repeatedly for
// signals shorter than the pad.
std::size_t reflect_index(std::ptrdiff_t i, std::size_t n) {
  if (n == 1) return 0;
  const auto period = static_cast<std::ptrdiff_t>(2 * (n - 1));
  std::ptrdiff_t m = i % period;
  if (m < 0) m += period;
  if (m >= static_cast<std::ptrdiff_t>(n)) m = period - m;
  return static_cast<std::size_t>(m);
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix stft_power(std::span<const float> signal, int frame_size, int hop_size) {
  if (signal.empty()) throw Error(ErrorKind::kEmptyInput, "stft_power: empty signal");
  if (frame_size <= 0 || frame_size % 2 != 0 || hop_size <= 0) {
    throw Error(ErrorKind::kConfiguration, "stft_power: frame size must be positive and even");
  }
  const std::size_t len = signal.size();
  const std::size_t n_frames = len / static_cast<std::size_t>(hop_size) + 1;
  const std::size_t n_bins = static_cast<std::size_t>(frame_size) / 2 + 1;
  const std::ptrdiff_t pad = frame_size / 2;

  std::vector<double> window(static_cast<std::size_t>(frame_size));
  for (int n = 0; n < frame_size; ++n) {
    window[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / frame_size);
  }

  RealFft fft(frame_size);
  Matrix power(n_frames, n_bins);
  double* in = fft.input();
  for (std::size_t f = 0; f < n_frames; ++f) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(f) * hop_size - pad;
    for (int n = 0; n < frame_size; ++n) {
      in[n] = window[n] * signal[reflect_index(start + n, len)];
    }
    const fftw_complex* out = fft.execute();
    for (std::size_t b = 0; b < n_bins; ++b) {
      power(f, b) = out[b][0] * out[b][0] + out[b][1] * out[b][1];
    }
  }
  return power;
}

Matrix mel_filterbank(int n_mels, int frame_size, int sample_rate) {
  if (n_mels < 1 || sample_rate <= 0 || frame_size <= 0 || frame_size % 2 != 0) {
    throw Error(ErrorKind::kConfiguration, "mel_filterbank: invalid configuration");
  }
  const std::size_t n_bins = static_cast<std::size_t>(frame_size) / 2 + 1;
  if (static_cast<std::size_t>(n_mels) > n_bins) {
    throw Error(ErrorKind::kConfiguration, "mel_filterbank: " + std::to_string(n_mels) +
                                               " filters exceed " + std::to_string(n_bins) +
                                               " frequency bins");
  }
  const double mel_max = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(mel_max * static_cast<double>(i) / (n_mels + 1));
  }

  Matrix fbank(static_cast<std::size_t>(n_mels), n_bins);
  for (std::size_t m = 0; m < static_cast<std::size_t>(n_mels); ++m) {
    const double left = edges[m];
    const double center = edges[m + 1];
    const double right = edges[m + 2];
    double row_sum = 0.0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double hz = static_cast<double>(b) * sample_rate / frame_size;
      const double rise = (hz - left) / (center - left);
      const double fall = (right - hz) / (right - center);
      const double w = std::max(0.0, std::min(rise, fall));
      fbank(m, b) = w;
      row_sum += w;
    }
    if (row_sum <= 0.0) {
      throw Error(ErrorKind::kConfiguration,
                  "mel_filterbank: filter " + std::to_string(m) +
                      " covers no frequency bin; too many filters for this frame size");
    }
  }
  return fbank;
}

LogMelSpectrogram log_mel(const Matrix& power, const Matrix& fbank) {
  if (power.cols != fbank.cols) {
    throw Error(ErrorKind::kDimension, "log_mel: power has " + std::to_string(power.cols) +
                                           " bins, filterbank expects " +
                                           std::to_string(fbank.cols));
  }
  LogMelSpectrogram spec;
  spec.values = Matrix(power.rows, fbank.rows);
  spec.frame_size = static_cast<int>(2 * (fbank.cols - 1));
  for (std::size_t f = 0; f < power.rows; ++f) {
    const auto p = power.row(f);
    for (std::size_t m = 0; m < fbank.rows; ++m) {
      const auto w = fbank.row(m);
      double energy = 0.0;
      for (std::size_t b = 0; b < fbank.cols; ++b) energy += w[b] * p[b];
      spec.values(f, m) = std::log(std::max(energy, kLogFloor));
    }
  }
  return spec;
}

Grid<float> stack_frames(const LogMelSpectrogram& spec, int n_stack) {
  const std::size_t frames = spec.n_frames();
  const auto k = static_cast<std::size_t>(n_stack);
  if (n_stack < 1 || frames < k) {
    throw Error(ErrorKind::kInsufficientFrames, "stack_frames: " + std::to_string(frames) +
                                                    " frames, need " + std::to_string(n_stack));
  }
  const std::size_t mels = spec.n_mels();
  Grid<float> out(frames - k + 1, k * mels);
  for (std::size_t i = 0; i < out.rows; ++i) {
    auto dst = out.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      const auto src = spec.values.row(i + j);
      for (std::size_t m = 0; m < mels; ++m) dst[j * mels + m] = static_cast<float>(src[m]);
    }
  }
  return out;
}

WindowStack tile_windows(const LogMelSpectrogram& spec, int width) {
  const auto w = static_cast<std::size_t>(width);
  if (width < 1 || spec.n_mels() != w) {
    throw Error(ErrorKind::kDimension, "tile_windows: " + std::to_string(spec.n_mels()) +
                                           " Mel bins, window width " + std::to_string(width));
  }
  WindowStack out;
  out.size = w;
  out.n_windows = (spec.n_frames() + w - 1) / w;
  out.data.assign(out.n_windows * w * w, 0.0f);
  for (std::size_t f = 0; f < spec.n_frames(); ++f) {
    const auto src = spec.values.row(f);
    float* dst = out.data.data() + f * w;  // window-major layout is contiguous in frames
    for (std::size_t m = 0; m < w; ++m) dst[m] = static_cast<float>(src[m]);
  }
  return out;
}

NormStats fit_normalizer(std::span<const LogMelSpectrogram> train_specs) {
  // Welford accumulation over every cell.
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;
  for (const LogMelSpectrogram& spec : train_specs) {
    for (double x : spec.values.data) {
      ++count;
      const double delta = x - mean;
      mean += delta / static_cast<double>(count);
      m2 += delta * (x - mean);
    }
  }
  if (count == 0) throw Error(ErrorKind::kEmptyInput, "fit_normalizer: no training cells");
  NormStats stats;
  stats.mean = mean;
  stats.std = std::max(std::sqrt(m2 / static_cast<double>(count)), kStdFloor);
  return stats;
}

LogMelSpectrogram apply_normalizer(const LogMelSpectrogram& spec, const NormStats& stats) {
  LogMelSpectrogram out = spec;
  for (double& x : out.values.data) x = (x - stats.mean) / stats.std;
  return out;
}

std::vector<std::size_t> detect_valve_peaks(std::span<const float> signal, int sample_rate,
                                            const ValveConfig& config) {
  const std::size_t n = signal.size();
  const auto half = static_cast<std::size_t>(
      std::lround(config.smoothing_seconds * sample_rate / 2.0));

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + std::fabs(signal[i]);
  std::vector<double> envelope(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n, i + half + 1);
    envelope[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }

  std::vector<double> sorted = envelope;
  auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(sorted.begin(), mid, sorted.end());
  const double threshold = config.threshold_factor * *mid;

  // Local maxima; a plateau counts once, at its middle sample.
  struct Candidate {
    std::size_t pos;
    double value;
  };
  std::vector<Candidate> candidates;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && envelope[j + 1] == envelope[i]) ++j;
    const bool above_left = i == 0 || envelope[i] > envelope[i - 1];
    const bool above_right = j + 1 == n || envelope[i] > envelope[j + 1];
    if (above_left && above_right && envelope[i] > threshold) {
      candidates.push_back({(i + j) / 2, envelope[i]});
    }
    i = j + 1;
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.value != b.value ? a.value > b.value : a.pos < b.pos;
  });
  const auto min_gap = static_cast<std::size_t>(std::lround(config.segment_seconds * sample_rate));
  std::vector<std::size_t> kept;
  for (const Candidate& c : candidates) {
    const bool clear = std::all_of(kept.begin(), kept.end(), [&](std::size_t k) {
      return (c.pos > k ? c.pos - k : k - c.pos) >= min_gap;
    });
    if (clear) kept.push_back(c.pos);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

std::vector<float> preprocess_valve(std::span<const float> signal, int sample_rate,
                                    const ValveConfig& config) {
  const auto seg = static_cast<std::size_t>(std::lround(config.segment_seconds * sample_rate));
  if (sample_rate <= 0 || signal.size() < seg) {
    throw Error(ErrorKind::kInsufficientLength,
                "preprocess_valve: " + std::to_string(signal.size()) + " samples, need " +
                    std::to_string(seg));
  }
  const std::vector<std::size_t> peaks = detect_valve_peaks(signal, sample_rate, config);
  if (peaks.empty()) return {signal.begin(), signal.end()};

  std::vector<float> out;
  out.reserve(peaks.size() * seg);
  for (std::size_t p : peaks) {
    std::size_t start = p >= seg / 2 ? p - seg / 2 : 0;
    start = std::min(start, signal.size() - seg);
    out.insert(out.end(), signal.begin() + static_cast<std::ptrdiff_t>(start),
               signal.begin() + static_cast<std::ptrdiff_t>(start + seg));
  }
  return out;
}

LogMelSpectrogram extract_log_mel(const AudioClip& clip, MachineType machine,
                                  bool valve_preprocess, const FeatureConfig& config) {
  if (clip.sample_rate != config.sample_rate) {
    throw Error(ErrorKind::kConfiguration,
                clip.source_path + ": sample rate " + std::to_string(clip.sample_rate) +
                    " Hz, expected " + std::to_string(config.sample_rate) +
                    " Hz (resampling is not supported)");
  }
  std::span<const float> mono = clip.channel(0);
  std::vector<float> processed;
  if (valve_preprocess && machine == MachineType::kValve) {
    processed = preprocess_valve(mono, clip.sample_rate, config.valve);
    mono = processed;
  }
  static const Matrix default_bank = mel_filterbank(64, 1024, 16000);
  const bool default_config =
      config.n_mels == 64 && config.frame_size == 1024 && config.sample_rate == 16000;
  const Matrix custom_bank =
      default_config ? Matrix{} : mel_filterbank(config.n_mels, config.frame_size,
                                                 config.sample_rate);
  LogMelSpectrogram spec = log_mel(stft_power(mono, config.frame_size, config.hop_size),
                                   default_config ? default_bank : custom_bank);
  spec.frame_size = config.frame_size;
  spec.hop_size = config.hop_size;
  spec.sample_rate = config.sample_rate;
  return spec;
}

FeatureBatch make_feature_batch(const LogMelSpectrogram& normalized, const std::string& clip_id,
                                const FeatureConfig& config) {
  FeatureBatch batch;
  batch.ae_vectors = stack_frames(normalized, config.n_stack);
  batch.svdd_windows = tile_windows(normalized, config.window_frames);
  batch.clip_id = clip_id;
  return batch;
}

void write_feature_file(const std::filesystem::path& path, const LogMelSpectrogram& spec) {
  static_assert(std::endian::native == std::endian::little, "feature cache assumes little endian");
  std::string buf = "AADF";
  put_u16(buf, kFeatureFileVersion);
  put_u32(buf, static_cast<std::uint32_t>(spec.n_frames()));
  put_u16(buf, static_cast<std::uint16_t>(spec.n_mels()));
  put_u32(buf, 0);
  const std::size_t header = buf.size();
  buf.resize(header + spec.values.data.size() * sizeof(float));
  for (std::size_t i = 0; i < spec.values.data.size(); ++i) {
    const auto v = static_cast<float>(spec.values.data[i]);
    std::memcpy(buf.data() + header + i * sizeof(float), &v, sizeof(float));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out.write(buf.data(), static_cast<std::streamsize>(buf.size()))) {
    throw Error(ErrorKind::kIo, "cannot write " + path.string());
  }
}

LogMelSpectrogram read_feature_file(const std::filesystem::path& path,
                                    const FeatureConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  unsigned char header[16];
  if (!in.read(reinterpret_cast<char*>(header), sizeof(header)) ||
      std::memcmp(header, "AADF", 4) != 0) {
    throw Error(ErrorKind::kFormat, path.string() + ": not a feature file");
  }
  const auto version = static_cast<std::uint16_t>(header[4] | (header[5] << 8));
  if (version != kFeatureFileVersion) {
    throw Error(ErrorKind::kUnsupportedFormat,
                path.string() + ": feature file version " + std::to_string(version));
  }
  std::uint32_t frames = 0;
  std::memcpy(&frames, header + 6, 4);
  const auto mels = static_cast<std::uint16_t>(header[10] | (header[11] << 8));
  std::vector<float> cells(static_cast<std::size_t>(frames) * mels);
  if (!in.read(reinterpret_cast<char*>(cells.data()),
               static_cast<std::streamsize>(cells.size() * sizeof(float)))) {
    throw Error(ErrorKind::kFormat, path.string() + ": truncated feature data");
  }
  LogMelSpectrogram spec;
  spec.values = Matrix(frames, mels);
  std::copy(cells.begin(), cells.end(), spec.values.data.begin());
  spec.frame_size = config.frame_size;
  spec.hop_size = config.hop_size;
  spec.sample_rate = config.sample_rate;
  return spec;
}

}  // namespace aad
