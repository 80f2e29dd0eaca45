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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "aad/audio_io.hpp"
#include "aad/checkpoint.hpp"
#include "aad/features.hpp"
#include "aad/models.hpp"

namespace aad {

struct SplitSpec {
  std::vector<ClipEntry> train;  // normal only
  std::vector<ClipEntry> val;    // normal only
  std::vector<ClipEntry> test;   // every anomalous clip plus as many normals
  std::uint64_t rng_seed = 0;
};

// Anomalous clips all go to test together with an equal number of randomly
// chosen normals; ceil(10%) (at least one) of the remaining normals become
// validation. Throws kConfiguration when normals < 2 * anomalous.
SplitSpec make_split(const ClipIndex& index, MachineType machine, const std::string& model_id,
                     const std::string& snr, std::uint64_t seed);

struct TrainConfig {
  ModelKind model_kind = ModelKind::kDeepSvdd;
  std::size_t subspace_dim = 2;
  SvddVariant variant = SvddVariant::kOneClass;
  int max_epochs = 50;
  int patience = 10;
  std::size_t batch_size = 32;
  double learning_rate = 0.0005;
  double lambda = 1e-5;
  double nu = 0.1;
  int radius_warmup_epochs = 10;
  std::uint64_t seed = 0;

  static TrainConfig svdd_defaults();
  static TrainConfig ae_defaults();
  static TrainConfig defaults_for(ModelKind kind);

  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep the defaults for the model kind named in the JSON (or
  // for `base` when no kind is given).
  static TrainConfig from_json(const nlohmann::json& j,
                               std::optional<TrainConfig> base = std::nullopt);
  std::string digest() const;
  // True for subspace dims the reference protocol evaluates (2, 4, 8).
  bool paper_dim() const;
};

// Model inputs for one split, normalized with statistics fit on train only.
struct PreparedSplit {
  ModelKind kind = ModelKind::kDeepSvdd;
  NormStats stats;
  std::string stats_digest;
  std::vector<FeatureBatch> train;
  std::vector<FeatureBatch> val;
  std::vector<FeatureBatch> test;
  std::vector<Label> test_labels;
};

using SpectrogramLoader = std::function<LogMelSpectrogram(const ClipEntry&)>;

std::string stats_digest(const NormStats& stats);

PreparedSplit prepare_split(const SplitSpec& split, ModelKind kind,
                            const SpectrogramLoader& loader, const FeatureConfig& config = {});

// Test set only, normalized with previously fit statistics.
PreparedSplit prepare_test(const SplitSpec& split, ModelKind kind, const NormStats& stats,
                           const SpectrogramLoader& loader, const FeatureConfig& config = {});

// Patience counts epochs without strict improvement since the best one.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  struct Decision {
    bool is_best = false;
    bool stop = false;
  };
  Decision observe(double val_loss);

  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  double best_loss_ = 0.0;
};

enum class StopReason { kPatience, kMaxEpochs };
std::string to_string(StopReason reason);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  bool is_best = false;
};

struct TrainingLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  StopReason stop_reason = StopReason::kMaxEpochs;
  double initial_mean_dist_sq = 0.0;  // SVDD only, on training windows
  double final_mean_dist_sq = 0.0;

  // `epoch,train_loss,val_loss,is_best` with round-trip precision.
  std::string to_csv() const;
};

struct TrainResult {
  nn::Checkpoint checkpoint;  // best-validation parameters
  TrainingLog log;
};

// Invoked after each epoch; lets callers observe progress.
using EpochCallback = std::function<void(const EpochRecord&)>;

TrainResult train_model(const TrainConfig& config, const PreparedSplit& data,
                        const EpochCallback& on_epoch = nullptr);

struct ScoredClip {
  std::string clip_id;
  double score = 0.0;
  Label label = Label::kNormal;
};

// One score per test clip: mean reconstruction error (AE) or mean distance to
// the center (SVDD) over the clip's vectors/windows.
std::vector<ScoredClip> score_test_set(const nn::Checkpoint& checkpoint,
                                       const PreparedSplit& data);

}  // namespace aad
