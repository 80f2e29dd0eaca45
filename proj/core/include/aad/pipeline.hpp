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
#include <optional>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "aad/audio_io.hpp"
#include "aad/evaluation.hpp"
#include "aad/features.hpp"
#include "aad/training.hpp"

namespace aad {

// Reads a WAV and extracts its log-Mel spectrogram, no caching.
SpectrogramLoader make_loader(bool valve_preprocess, const FeatureConfig& config = {});

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
};

// On-disk log-Mel cache. Files live at
//   <root>/<raw|valve_pre>/<snr>/<machine>/<id>/<normal|abnormal>/<stem>.feat
// and <root>/feature_index.json maps each file to a digest of its source WAV
// bytes, so edited inputs are recomputed and unchanged ones are hits.
class FeatureStore {
 public:
  FeatureStore(std::filesystem::path root, bool valve_preprocess, FeatureConfig config = {});

  const std::filesystem::path& root() const { return root_; }
  bool valve_preprocess() const { return valve_preprocess_; }
  std::filesystem::path path_for(const ClipEntry& entry) const;

  // Cache hit when the .feat exists and the WAV digest matches; else extract.
  LogMelSpectrogram load(const ClipEntry& entry);
  // Cache only; throws kIo when the file is absent.
  LogMelSpectrogram load_cached(const ClipEntry& entry) const;

  // Makes every entry's cache fresh; misses are extracted on up to `threads`
  // workers. Per-clip work is pure, so the thread count never changes output.
  void prefetch(std::span<const ClipEntry> entries, unsigned threads = 1);

  SpectrogramLoader loader();
  SpectrogramLoader cached_loader() const;

  void save_index() const;
  const CacheStats& stats() const { return stats_; }

 private:
  std::filesystem::path root_;
  bool valve_preprocess_;
  FeatureConfig config_;
  nlohmann::json index_;
  CacheStats stats_;
};

// FNV-1a digest of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

// "ae", "ae_valve_pre", "svdd" or "svdd_soft".
std::string method_name(const TrainConfig& config, MachineType machine, bool valve_preprocess);

struct CellOptions {
  TrainConfig train;
  bool valve_preprocess = true;
  FeatureConfig features;
  // Defaults to make_loader(valve_preprocess, features).
  SpectrogramLoader loader;
};

struct CellResult {
  SplitSpec split;
  TrainResult trained;
  std::vector<ScoredClip> scores;
  EvalRecord record;
};

// Split, prepare features, train and score one (machine, id, snr) cell. The
// split uses the training seed. The checkpoint metadata gains a "cell" object
// (machine, model_id, snr, valve_preprocess) so it can be re-evaluated later.
CellResult run_cell(const ClipIndex& index, MachineType machine, const std::string& model_id,
                    const std::string& snr, const CellOptions& options,
                    const EpochCallback& on_epoch = nullptr);

// Re-scores a checkpoint produced by run_cell on its own test split, using the
// normalization stored in the checkpoint.
CellResult evaluate_checkpoint(const nn::Checkpoint& checkpoint, const ClipIndex& index,
                               const SpectrogramLoader& loader, const FeatureConfig& config = {});

}  // namespace aad
