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

#include "aad/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <thread>
#include <iterator>

#include "aad/checkpoint.hpp"
#include "aad/error.hpp"

namespace aad {
namespace fs = std::filesystem;

SpectrogramLoader make_loader(bool valve_preprocess, const FeatureConfig& config) {
  return [=](const ClipEntry& entry) {
    return extract_log_mel(read_wav(entry.path), entry.machine, valve_preprocess, config);
  };
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return nn::digest_hex(bytes);
}

FeatureStore::FeatureStore(fs::path root, bool valve_preprocess, FeatureConfig config)
    : root_(std::move(root)), valve_preprocess_(valve_preprocess), config_(config) {
  const fs::path index_path = root_ / "feature_index.json";
  if (fs::exists(index_path)) {
    std::ifstream in(index_path);
    try {
      index_ = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kFormat, index_path.string() + ": " + e.what());
    }
  }
  if (!index_.is_object()) index_ = nlohmann::json::object();
}

fs::path FeatureStore::path_for(const ClipEntry& entry) const {
  const bool pre = valve_preprocess_ && entry.machine == MachineType::kValve;
  return root_ / (pre ? "valve_pre" : "raw") / entry.snr / to_string(entry.machine) /
         entry.model_id / (entry.label == Label::kNormal ? "normal" : "abnormal") /
         (entry.path.stem().string() + ".feat");
}

LogMelSpectrogram FeatureStore::load(const ClipEntry& entry) {
  const fs::path path = path_for(entry);
  const std::string key = fs::relative(path, root_).generic_string();
  const std::string digest = file_digest(entry.path);
  const auto it = index_.find(key);
  if (fs::exists(path) && it != index_.end() && it->value("wav_digest", "") == digest) {
    ++stats_.hits;
    return read_feature_file(path, config_);
  }
  ++stats_.misses;
  LogMelSpectrogram spec =
      extract_log_mel(read_wav(entry.path), entry.machine, valve_preprocess_, config_);
  fs::create_directories(path.parent_path());
  write_feature_file(path, spec);
  index_[key] = {{"source", entry.path.generic_string()}, {"wav_digest", digest}};
  // Same float32 precision as a later cache hit.
  for (double& v : spec.values.data) v = static_cast<float>(v);
  return spec;
}

LogMelSpectrogram FeatureStore::load_cached(const ClipEntry& entry) const {
  const fs::path path = path_for(entry);
  if (!fs::exists(path)) {
    throw Error(ErrorKind::kIo, "no cached features for " + entry.path.string() + " (expected " +
                                    path.string() + ")");
  }
  return read_feature_file(path, config_);
}

void FeatureStore::prefetch(std::span<const ClipEntry> entries, unsigned threads) {
  struct Job {
    const ClipEntry* entry;
    fs::path path;
    std::string key;
    std::string digest;
  };
  std::vector<Job> misses;
  for (const ClipEntry& e : entries) {
    Job job{&e, path_for(e), "", file_digest(e.path)};
    job.key = fs::relative(job.path, root_).generic_string();
    const auto it = index_.find(job.key);
    if (fs::exists(job.path) && it != index_.end() && it->value("wav_digest", "") == job.digest) {
      ++stats_.hits;
    } else {
      misses.push_back(std::move(job));
    }
  }
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, misses.size()));
  std::vector<std::exception_ptr> errors(workers);
  auto work = [&](std::size_t w) {
    try {
      for (std::size_t i = w; i < misses.size(); i += workers) {
        const Job& job = misses[i];
        const LogMelSpectrogram spec = extract_log_mel(read_wav(job.entry->path),
                                                       job.entry->machine, valve_preprocess_,
                                                       config_);
        fs::create_directories(job.path.parent_path());
        write_feature_file(job.path, spec);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (const Job& job : misses) {
    index_[job.key] = {{"source", job.entry->path.generic_string()}, {"wav_digest", job.digest}};
  }
  stats_.misses += misses.size();
}

SpectrogramLoader FeatureStore::loader() {
  return [this](const ClipEntry& e) { return load(e); };
}

SpectrogramLoader FeatureStore::cached_loader() const {
  return [this](const ClipEntry& e) { return load_cached(e); };
}

void FeatureStore::save_index() const {
  fs::create_directories(root_);
  std::ofstream(root_ / "feature_index.json") << index_.dump(2) << '\n';
}

std::string method_name(const TrainConfig& config, MachineType machine, bool valve_preprocess) {
  if (config.model_kind == ModelKind::kDenseAe) {
    return valve_preprocess && machine == MachineType::kValve ? "ae_valve_pre" : "ae";
  }
  return config.variant == SvddVariant::kSoftBoundary ? "svdd_soft" : "svdd";
}

namespace {

EvalRecord make_record(const std::vector<ScoredClip>& scored, MachineType machine,
                       const std::string& model_id, const std::string& snr,
                       const TrainConfig& config, bool valve_preprocess) {
  std::vector<double> scores;
  std::vector<Label> labels;
  for (const ScoredClip& s : scored) {
    scores.push_back(s.score);
    labels.push_back(s.label);
  }
  EvalRecord r;
  r.machine = machine;
  r.model_id = model_id;
  r.snr = snr;
  r.seed = config.seed;
  r.method = method_name(config, machine, valve_preprocess);
  r.dim = config.model_kind == ModelKind::kDeepSvdd ? config.subspace_dim : 0;
  r.auc = auc(scores, labels);
  r.n_test = scores.size();
  return r;
}

}  // namespace

CellResult run_cell(const ClipIndex& index, MachineType machine, const std::string& model_id,
                    const std::string& snr, const CellOptions& options,
                    const EpochCallback& on_epoch) {
  options.train.validate();
  CellResult out;
  out.split = make_split(index, machine, model_id, snr, options.train.seed);
  const SpectrogramLoader loader =
      options.loader ? options.loader : make_loader(options.valve_preprocess, options.features);
  const PreparedSplit data =
      prepare_split(out.split, options.train.model_kind, loader, options.features);
  out.trained = train_model(options.train, data, on_epoch);
  out.trained.checkpoint.metadata["cell"] = {{"machine", to_string(machine)},
                                             {"model_id", model_id},
                                             {"snr", snr},
                                             {"valve_preprocess", options.valve_preprocess}};
  out.scores = score_test_set(out.trained.checkpoint, data);
  out.record = make_record(out.scores, machine, model_id, snr, options.train,
                           options.valve_preprocess);
  return out;
}

CellResult evaluate_checkpoint(const nn::Checkpoint& checkpoint, const ClipIndex& index,
                               const SpectrogramLoader& loader, const FeatureConfig& config) {
  const nlohmann::json& meta = checkpoint.metadata;
  if (!meta.contains("cell") || !meta.contains("train_config")) {
    throw Error(ErrorKind::kUsage, "checkpoint carries no cell/train_config metadata");
  }
  const nlohmann::json& cell = meta.at("cell");
  const MachineType machine = parse_machine(cell.at("machine").get<std::string>());
  const std::string model_id = cell.at("model_id").get<std::string>();
  const std::string snr = cell.at("snr").get<std::string>();
  const bool valve_preprocess = cell.at("valve_preprocess").get<bool>();
  const TrainConfig train = TrainConfig::from_json(meta.at("train_config"));

  CellResult out;
  out.split = make_split(index, machine, model_id, snr, train.seed);
  const NormStats stats{meta.at("norm_mean").get<double>(), meta.at("norm_std").get<double>()};
  const PreparedSplit data = prepare_test(out.split, train.model_kind, stats, loader, config);
  out.scores = score_test_set(checkpoint, data);
  out.record = make_record(out.scores, machine, model_id, snr, train, valve_preprocess);
  return out;
}

}  // namespace aad
