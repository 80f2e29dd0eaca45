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

#include "aad/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>

#include "aad/adam.hpp"
#include "aad/error.hpp"

namespace aad {
namespace {

Grid<float> concat_vectors(const std::vector<FeatureBatch>& batches) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  for (const FeatureBatch& b : batches) {
    rows += b.ae_vectors.rows;
    cols = b.ae_vectors.cols;
  }
  Grid<float> out;
  out.rows = rows;
  out.cols = cols;
  out.data.reserve(rows * cols);
  for (const FeatureBatch& b : batches) {
    out.data.insert(out.data.end(), b.ae_vectors.data.begin(), b.ae_vectors.data.end());
  }
  return out;
}

WindowStack concat_windows(const std::vector<FeatureBatch>& batches) {
  WindowStack out;
  for (const FeatureBatch& b : batches) {
    out.size = b.svdd_windows.size;
    out.n_windows += b.svdd_windows.n_windows;
    out.data.insert(out.data.end(), b.svdd_windows.data.begin(), b.svdd_windows.data.end());
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void check_finite(double loss, int epoch) {
  if (!std::isfinite(loss)) {
    throw Error(ErrorKind::kDivergence,
                "non-finite training loss at epoch " + std::to_string(epoch));
  }
}

// Shared epoch loop; `run_epoch` returns the mean training loss and
// `validate` the validation loss for the current parameters.
template <typename RunEpoch, typename Validate, typename Snapshot>
TrainingLog run_training(const TrainConfig& config, RunEpoch run_epoch, Validate validate,
                         Snapshot snapshot, const EpochCallback& on_epoch) {
  TrainingLog log;
  EarlyStopping stopper(config.patience);
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double train_loss = run_epoch(epoch);
    check_finite(train_loss, epoch);
    const double val_loss = validate(epoch);
    check_finite(val_loss, epoch);
    const EarlyStopping::Decision d = stopper.observe(val_loss);
    if (d.is_best) snapshot();
    log.epochs.push_back({epoch, train_loss, val_loss, d.is_best});
    if (on_epoch) on_epoch(log.epochs.back());
    if (d.stop) {
      log.stop_reason = StopReason::kPatience;
      break;
    }
    log.stop_reason = StopReason::kMaxEpochs;
  }
  log.best_epoch = stopper.best_epoch();
  return log;
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::uint64_t seed, int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed + static_cast<std::uint64_t>(epoch));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<double> window_distances(const nn::NetworkParams<float>& params,
                                     const WindowStack& windows,
                                     const std::vector<double>& center) {
  return anomaly_scores(params, windows, center);
}

TrainResult train_svdd(const TrainConfig& config, const PreparedSplit& data,
                       const EpochCallback& on_epoch) {
  const WindowStack train = concat_windows(data.train);
  const WindowStack val = concat_windows(data.val);
  if (train.n_windows == 0 || val.n_windows == 0) {
    throw Error(ErrorKind::kUsage, "train_model: empty training or validation windows");
  }

  DeepSvddModel model = build_svdd_net(config.subspace_dim, config.seed);
  model.center = init_center(model.params, std::span<const WindowStack>(&train, 1));
  const std::vector<float> center_f(model.center.begin(), model.center.end());

  const std::vector<double> initial = window_distances(model.params, train, model.center);
  const bool soft = config.variant == SvddVariant::kSoftBoundary;
  if (soft) model.radius_sq = update_radius(initial, config.nu);

  nn::AdamState<float> adam(config.learning_rate);
  nn::NetworkParams<float> best = model.params;
  double best_radius_sq = model.radius_sq;

  auto run_epoch = [&](int epoch) {
    const std::vector<std::size_t> order = shuffled_order(train.n_windows, config.seed, epoch);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const nn::Tensor<float> x = window_batch(train, rows);
      nn::Tape<float> tape;
      model.params.zero_grad();
      const nn::Var loss =
          soft ? soft_boundary_loss<float>(tape, model.params, x, center_f, model.radius_sq,
                                           1.0 / (config.nu * static_cast<double>(rows.size())),
                                           config.lambda)
               : one_class_loss<float>(tape, model.params, x, center_f, config.lambda);
      const double value = tape.scalar(loss);
      check_finite(value, epoch);
      tape.backward(loss);
      nn::adam_step(model.params, adam);
      total += value;
      ++batches;
    }
    if (soft && epoch >= config.radius_warmup_epochs) {
      model.radius_sq =
          update_radius(window_distances(model.params, train, model.center), config.nu);
    }
    return total / static_cast<double>(batches);
  };
  auto validate = [&](int) { return mean_of(window_distances(model.params, val, model.center)); };
  auto snapshot = [&] {
    best = model.params;
    best_radius_sq = model.radius_sq;
  };

  TrainResult result;
  result.log = run_training(config, run_epoch, validate, snapshot, on_epoch);
  model.params = std::move(best);
  model.radius_sq = best_radius_sq;
  result.log.initial_mean_dist_sq = mean_of(initial);
  result.log.final_mean_dist_sq = mean_of(window_distances(model.params, train, model.center));
  result.checkpoint = to_checkpoint(model);
  result.checkpoint.metadata["variant"] = to_string(config.variant);
  result.checkpoint.metadata["nu"] = config.nu;
  result.checkpoint.metadata["lambda"] = config.lambda;
  return result;
}

TrainResult train_ae(const TrainConfig& config, const PreparedSplit& data,
                     const EpochCallback& on_epoch) {
  const Grid<float> train = concat_vectors(data.train);
  const Grid<float> val = concat_vectors(data.val);
  if (train.rows == 0 || val.rows == 0) {
    throw Error(ErrorKind::kUsage, "train_model: empty training or validation vectors");
  }

  DenseAeModel model = build_dense_ae(config.seed);
  nn::AdamState<float> adam(config.learning_rate);
  nn::NetworkParams<float> best = model.params;

  auto run_epoch = [&](int epoch) {
    const std::vector<std::size_t> order = shuffled_order(train.rows, config.seed, epoch);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t end = std::min(order.size(), begin + config.batch_size);
      const nn::Tensor<float> x =
          vector_batch(train, std::span<const std::size_t>(order.data() + begin, end - begin));
      nn::Tape<float> tape;
      model.params.zero_grad();
      const nn::Var loss = ae_loss<float>(tape, model.params, x);
      const double value = tape.scalar(loss);
      check_finite(value, epoch);
      tape.backward(loss);
      nn::adam_step(model.params, adam);
      total += value;
      ++batches;
    }
    return total / static_cast<double>(batches);
  };
  auto validate = [&](int) { return mean_of(ae_reconstruction_errors(model.params, val)); };
  auto snapshot = [&] { best = model.params; };

  TrainResult result;
  result.log = run_training(config, run_epoch, validate, snapshot, on_epoch);
  model.params = std::move(best);
  result.checkpoint = to_checkpoint(model);
  return result;
}

}  // namespace

SplitSpec make_split(const ClipIndex& index, MachineType machine, const std::string& model_id,
                     const std::string& snr, std::uint64_t seed) {
  std::vector<ClipEntry> normals;
  std::vector<ClipEntry> anomalies;
  for (const ClipEntry& e : index.select(machine, model_id, snr)) {
    (e.label == Label::kNormal ? normals : anomalies).push_back(e);
  }
  auto by_path = [](const ClipEntry& a, const ClipEntry& b) { return a.path < b.path; };
  std::sort(normals.begin(), normals.end(), by_path);
  std::sort(anomalies.begin(), anomalies.end(), by_path);
  if (normals.size() < 2 * anomalies.size() || normals.size() < 2) {
    const std::size_t needed = std::max<std::size_t>(2 * anomalies.size(), 2);
    throw Error(ErrorKind::kConfiguration,
                "split " + to_string(machine) + "/" + model_id + "/" + snr + ": " +
                    std::to_string(normals.size()) + " normal clips for " +
                    std::to_string(anomalies.size()) + " anomalous; short by " +
                    std::to_string(needed - normals.size()));
  }

  std::mt19937_64 rng(seed);
  std::shuffle(normals.begin(), normals.end(), rng);

  SplitSpec split;
  split.rng_seed = seed;
  const std::size_t n_test_normal = anomalies.size();
  split.test = anomalies;
  split.test.insert(split.test.end(), normals.begin(),
                    normals.begin() + static_cast<std::ptrdiff_t>(n_test_normal));
  const std::size_t pool = normals.size() - n_test_normal;
  const std::size_t n_val = std::max<std::size_t>(1, (pool + 9) / 10);
  auto pool_begin = normals.begin() + static_cast<std::ptrdiff_t>(n_test_normal);
  split.val.assign(pool_begin, pool_begin + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(pool_begin + static_cast<std::ptrdiff_t>(n_val), normals.end());
  std::sort(split.train.begin(), split.train.end(), by_path);
  std::sort(split.val.begin(), split.val.end(), by_path);
  std::sort(split.test.begin(), split.test.end(), by_path);
  return split;
}

TrainConfig TrainConfig::svdd_defaults() { return TrainConfig{}; }

TrainConfig TrainConfig::ae_defaults() {
  TrainConfig c;
  c.model_kind = ModelKind::kDenseAe;
  c.max_epochs = 100;
  c.batch_size = 256;
  c.learning_rate = 0.001;
  return c;
}

TrainConfig TrainConfig::defaults_for(ModelKind kind) {
  return kind == ModelKind::kDenseAe ? ae_defaults() : svdd_defaults();
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw Error(ErrorKind::kConfiguration, "max_epochs must be >= 1");
  if (patience < 1) throw Error(ErrorKind::kConfiguration, "patience must be >= 1");
  if (batch_size < 1) throw Error(ErrorKind::kConfiguration, "batch_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw Error(ErrorKind::kConfiguration, "learning_rate < 0");
  if (model_kind == ModelKind::kDeepSvdd) {
    if (subspace_dim < 1) throw Error(ErrorKind::kConfiguration, "subspace_dim must be >= 1");
    SvddObjectiveConfig{variant, lambda, nu}.validate();
  }
}

bool TrainConfig::paper_dim() const {
  return model_kind == ModelKind::kDenseAe || subspace_dim == 2 || subspace_dim == 4 ||
         subspace_dim == 8;
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j;
  j["model"] = to_string(model_kind);
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["seed"] = seed;
  if (model_kind == ModelKind::kDeepSvdd) {
    j["subspace_dim"] = subspace_dim;
    j["variant"] = to_string(variant);
    j["lambda"] = lambda;
    j["nu"] = nu;
    j["radius_warmup_epochs"] = radius_warmup_epochs;
  }
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, std::optional<TrainConfig> base) {
  TrainConfig c = base.value_or(TrainConfig{});
  if (j.contains("model")) {
    const ModelKind kind = parse_model_kind(j.at("model").get<std::string>());
    if (!base || base->model_kind != kind) c = defaults_for(kind);
  }
  try {
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.seed = j.value("seed", c.seed);
    c.subspace_dim = j.value("subspace_dim", c.subspace_dim);
    if (j.contains("variant")) c.variant = parse_svdd_variant(j.at("variant").get<std::string>());
    c.lambda = j.value("lambda", c.lambda);
    c.nu = j.value("nu", c.nu);
    c.radius_warmup_epochs = j.value("radius_warmup_epochs", c.radius_warmup_epochs);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfiguration, std::string("training config: ") + e.what());
  }
  return c;
}

std::string TrainConfig::digest() const { return nn::digest_hex(to_json().dump()); }

std::string stats_digest(const NormStats& stats) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g/%.17g", stats.mean, stats.std);
  return nn::digest_hex(buf);
}

namespace {

FeatureBatch to_batch(const LogMelSpectrogram& spec, const ClipEntry& e, const NormStats& stats,
                      ModelKind kind, const FeatureConfig& config) {
  const LogMelSpectrogram norm = apply_normalizer(spec, stats);
  FeatureBatch b;
  b.clip_id = e.path.string();
  if (kind == ModelKind::kDenseAe) {
    b.ae_vectors = stack_frames(norm, config.n_stack);
  } else {
    b.svdd_windows = tile_windows(norm, config.window_frames);
  }
  return b;
}

}  // namespace

PreparedSplit prepare_split(const SplitSpec& split, ModelKind kind,
                            const SpectrogramLoader& loader, const FeatureConfig& config) {
  if (split.train.empty()) throw Error(ErrorKind::kUsage, "prepare_split: empty training set");
  std::vector<LogMelSpectrogram> train_specs;
  train_specs.reserve(split.train.size());
  for (const ClipEntry& e : split.train) train_specs.push_back(loader(e));
  const NormStats stats = fit_normalizer(train_specs);

  PreparedSplit out = prepare_test(split, kind, stats, loader, config);
  for (std::size_t i = 0; i < split.train.size(); ++i) {
    out.train.push_back(to_batch(train_specs[i], split.train[i], stats, kind, config));
  }
  train_specs.clear();
  for (const ClipEntry& e : split.val) out.val.push_back(to_batch(loader(e), e, stats, kind, config));
  return out;
}

PreparedSplit prepare_test(const SplitSpec& split, ModelKind kind, const NormStats& stats,
                           const SpectrogramLoader& loader, const FeatureConfig& config) {
  PreparedSplit out;
  out.kind = kind;
  out.stats = stats;
  out.stats_digest = stats_digest(stats);
  for (const ClipEntry& e : split.test) {
    out.test.push_back(to_batch(loader(e), e, stats, kind, config));
    out.test_labels.push_back(e.label);
  }
  return out;
}

EarlyStopping::Decision EarlyStopping::observe(double val_loss) {
  ++epoch_;
  Decision d;
  if (epoch_ == 1 || val_loss < best_loss_) {
    best_loss_ = val_loss;
    best_epoch_ = epoch_;
    d.is_best = true;
  }
  d.stop = epoch_ - best_epoch_ >= patience_;
  return d;
}

std::string to_string(StopReason reason) {
  return reason == StopReason::kPatience ? "patience" : "max_epochs";
}

std::string TrainingLog::to_csv() const {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss,is_best\n";
  char buf[128];
  for (const EpochRecord& r : epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%d\n", r.epoch, r.train_loss, r.val_loss,
                  r.is_best ? 1 : 0);
    out << buf;
  }
  return out.str();
}

TrainResult train_model(const TrainConfig& config, const PreparedSplit& data,
                        const EpochCallback& on_epoch) {
  config.validate();
  if (data.train.empty() || data.val.empty()) {
    throw Error(ErrorKind::kUsage, "train_model: empty training or validation split");
  }
  if (data.kind != config.model_kind) {
    throw Error(ErrorKind::kUsage, "train_model: features were prepared for " +
                                       to_string(data.kind) + ", config trains " +
                                       to_string(config.model_kind));
  }
  TrainResult result = config.model_kind == ModelKind::kDeepSvdd
                           ? train_svdd(config, data, on_epoch)
                           : train_ae(config, data, on_epoch);
  nlohmann::json& meta = result.checkpoint.metadata;
  meta["train_config"] = config.to_json();
  meta["config_digest"] = config.digest();
  meta["norm_mean"] = data.stats.mean;
  meta["norm_std"] = data.stats.std;
  meta["stats_digest"] = data.stats_digest;
  meta["best_epoch"] = result.log.best_epoch;
  meta["stop_reason"] = to_string(result.log.stop_reason);
  meta["paper_dim"] = config.paper_dim();
  return result;
}

std::vector<ScoredClip> score_test_set(const nn::Checkpoint& checkpoint,
                                       const PreparedSplit& data) {
  const ModelKind kind = checkpoint_kind(checkpoint);
  if (kind != data.kind) {
    throw Error(ErrorKind::kUsage, "score_test_set: checkpoint is " + to_string(kind) +
                                       " but features were prepared for " + to_string(data.kind));
  }
  std::vector<ScoredClip> out;
  out.reserve(data.test.size());
  if (kind == ModelKind::kDeepSvdd) {
    const DeepSvddModel model = svdd_from_checkpoint(checkpoint);
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      out.push_back({data.test[i].clip_id,
                     svdd_clip_score(model.params, data.test[i].svdd_windows, model.center),
                     data.test_labels[i]});
    }
  } else {
    const DenseAeModel model = dense_ae_from_checkpoint(checkpoint);
    for (std::size_t i = 0; i < data.test.size(); ++i) {
      out.push_back({data.test[i].clip_id, ae_clip_score(model.params, data.test[i].ae_vectors),
                     data.test_labels[i]});
    }
  }
  return out;
}

}  // namespace aad
