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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "aad/error.hpp"
#include "aad/training.hpp"

namespace {

using aad::ClipEntry;
using aad::ClipIndex;
using aad::ErrorKind;
using aad::Label;
using aad::MachineType;

ClipIndex make_index(std::size_t normals, std::size_t anomalies) {
  ClipIndex index;
  for (std::size_t i = 0; i < normals + anomalies; ++i) {
    const bool anomalous = i >= normals;
    ClipEntry e;
    e.machine = MachineType::kPump;
    e.model_id = "id_00";
    e.snr = "0dB";
    e.label = anomalous ? Label::kAnomalous : Label::kNormal;
    e.path = std::string("root/0dB/pump/id_00/") + (anomalous ? "abnormal/" : "normal/") +
             std::to_string(1000 + i) + ".wav";
    index.entries.push_back(e);
  }
  return index;
}

// Normal clips carry a fixed spectral ridge; anomalies add a second one.
aad::LogMelSpectrogram synthetic_spec(const ClipEntry& e) {
  std::mt19937_64 rng(std::hash<std::string>{}(e.path.string()));
  std::normal_distribution<double> g(0.0, 0.3);
  aad::LogMelSpectrogram s;
  s.values = aad::Matrix(313, 64);
  for (std::size_t f = 0; f < 313; ++f)
    for (std::size_t m = 0; m < 64; ++m) {
      double v = g(rng) + (m == 10 ? 3.0 : 0.0);
      if (e.label == Label::kAnomalous && m == 40) v += 3.0;
      s.values(f, m) = v;
    }
  return s;
}

std::set<std::string> paths(const std::vector<ClipEntry>& v) {
  std::set<std::string> s;
  for (const ClipEntry& e : v) s.insert(e.path.string());
  return s;
}

TEST(MakeSplit, ArithmeticFromTheRules) {
  const aad::SplitSpec a = aad::make_split(make_index(400, 100), MachineType::kPump, "id_00", "0dB", 1);
  EXPECT_EQ(a.test.size(), 200u);
  EXPECT_EQ(a.train.size(), 270u);
  EXPECT_EQ(a.val.size(), 30u);
  const aad::SplitSpec b = aad::make_split(make_index(10, 5), MachineType::kPump, "id_00", "0dB", 1);
  EXPECT_EQ(b.test.size(), 10u);
  EXPECT_EQ(b.train.size(), 4u);
  EXPECT_EQ(b.val.size(), 1u);
  try {
    aad::make_split(make_index(4, 3), MachineType::kPump, "id_00", "0dB", 1);
    FAIL();
  } catch (const aad::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kConfiguration);
    EXPECT_NE(std::string(e.what()).find("short by 2"), std::string::npos);
  }
}

TEST(MakeSplit, DisjointBalancedAndSeedOnlyMovesNormals) {
  const ClipIndex index = make_index(60, 12);
  const aad::SplitSpec a = aad::make_split(index, MachineType::kPump, "id_00", "0dB", 1);
  const aad::SplitSpec b = aad::make_split(index, MachineType::kPump, "id_00", "0dB", 2);
  for (const aad::SplitSpec& s : {a, b}) {
    std::size_t anomalous = 0;
    for (const ClipEntry& e : s.test) anomalous += e.label == Label::kAnomalous;
    EXPECT_EQ(anomalous * 2, s.test.size());
    for (const ClipEntry& e : s.train) EXPECT_EQ(e.label, Label::kNormal);
    for (const ClipEntry& e : s.val) EXPECT_EQ(e.label, Label::kNormal);
    std::set<std::string> all = paths(s.train);
    for (const auto& part : {s.val, s.test})
      for (const ClipEntry& e : part) EXPECT_TRUE(all.insert(e.path.string()).second);
    EXPECT_EQ(all.size(), 72u);
  }
  auto anomalies = [](const aad::SplitSpec& s) {
    std::set<std::string> out;
    for (const ClipEntry& e : s.test) if (e.label == Label::kAnomalous) out.insert(e.path.string());
    return out;
  };
  EXPECT_EQ(anomalies(a), anomalies(b));
  EXPECT_NE(paths(a.train), paths(b.train));
  EXPECT_EQ(paths(a.train), paths(aad::make_split(index, MachineType::kPump, "id_00", "0dB", 1).train));
}

TEST(EarlyStopping, PatienceArithmetic) {
  aad::EarlyStopping s(10);
  const double losses[] = {5, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4, 4};
  int stopped = 0;
  for (int i = 0; i < 12; ++i) {
    const auto d = s.observe(losses[i]);
    EXPECT_EQ(d.is_best, i < 2);
    if (d.stop) stopped = i + 1;
  }
  EXPECT_EQ(stopped, 12);
  EXPECT_EQ(s.best_epoch(), 2);
}

aad::PreparedSplit prepared(aad::ModelKind kind, std::size_t normals = 40, std::size_t anomalies = 8) {
  const ClipIndex index = make_index(normals, anomalies);
  const aad::SplitSpec split = aad::make_split(index, MachineType::kPump, "id_00", "0dB", 3);
  return aad::prepare_split(split, kind, synthetic_spec);
}

TEST(PrepareSplit, StatsSeeTrainingClipsOnly) {
  const ClipIndex index = make_index(40, 8);
  const aad::SplitSpec split = aad::make_split(index, MachineType::kPump, "id_00", "0dB", 3);
  const aad::PreparedSplit data = aad::prepare_split(split, aad::ModelKind::kDeepSvdd, synthetic_spec);
  std::vector<aad::LogMelSpectrogram> train;
  for (const ClipEntry& e : split.train) train.push_back(synthetic_spec(e));
  EXPECT_EQ(data.stats_digest, aad::stats_digest(aad::fit_normalizer(train)));
  std::vector<aad::LogMelSpectrogram> everything = train;
  for (const ClipEntry& e : split.test) everything.push_back(synthetic_spec(e));
  EXPECT_NE(data.stats_digest, aad::stats_digest(aad::fit_normalizer(everything)));
  EXPECT_EQ(data.test.size(), data.test_labels.size());
}

TEST(TrainModel, SingleEpochStopsAtCap) {
  aad::TrainConfig c = aad::TrainConfig::svdd_defaults();
  c.max_epochs = 1;
  const aad::TrainResult r = aad::train_model(c, prepared(aad::ModelKind::kDeepSvdd));
  ASSERT_EQ(r.log.epochs.size(), 1u);
  EXPECT_EQ(r.log.stop_reason, aad::StopReason::kMaxEpochs);
  EXPECT_EQ(r.log.best_epoch, 1);
}

TEST(TrainModel, OneClassContractsOnSeparableData) {
  aad::TrainConfig c = aad::TrainConfig::svdd_defaults();
  c.max_epochs = 5;
  const aad::PreparedSplit data = prepared(aad::ModelKind::kDeepSvdd);
  const aad::TrainResult r = aad::train_model(c, data);
  ASSERT_EQ(r.log.epochs.size(), 5u);
  for (std::size_t i = 1; i < 5; ++i) EXPECT_LE(r.log.epochs[i].train_loss, r.log.epochs[i - 1].train_loss);
  EXPECT_LT(r.log.epochs.back().train_loss, r.log.epochs.front().train_loss);
  EXPECT_LT(r.log.final_mean_dist_sq, r.log.initial_mean_dist_sq);
  EXPECT_EQ(r.checkpoint.metadata.at("model_kind"), "svdd");

  const std::vector<aad::ScoredClip> scores = aad::score_test_set(r.checkpoint, data);
  EXPECT_EQ(scores.size(), data.test.size());
  const std::vector<aad::ScoredClip> again = aad::score_test_set(r.checkpoint, data);
  for (std::size_t i = 0; i < scores.size(); ++i) EXPECT_EQ(scores[i].score, again[i].score);
}

TEST(TrainModel, BestCheckpointIsValidationMinimum) {
  aad::TrainConfig c = aad::TrainConfig::ae_defaults();
  c.max_epochs = 12;
  c.learning_rate = 0.01;
  const aad::TrainResult r = aad::train_model(c, prepared(aad::ModelKind::kDenseAe, 20, 4));
  double running = std::numeric_limits<double>::infinity();
  double best = running;
  for (const aad::EpochRecord& e : r.log.epochs) {
    EXPECT_EQ(e.is_best, e.val_loss < running);
    running = std::min(running, e.val_loss);
    if (e.epoch == r.log.best_epoch) best = e.val_loss;
  }
  EXPECT_EQ(best, running);
  const std::string csv = r.log.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,val_loss,is_best");
}

TEST(TrainModel, AeClipScoreIsMeanOfVectors) {
  aad::TrainConfig c = aad::TrainConfig::ae_defaults();
  c.max_epochs = 2;
  const aad::PreparedSplit data = prepared(aad::ModelKind::kDenseAe, 20, 4);
  const aad::TrainResult r = aad::train_model(c, data);
  const std::vector<aad::ScoredClip> scores = aad::score_test_set(r.checkpoint, data);
  const aad::DenseAeModel m = aad::dense_ae_from_checkpoint(r.checkpoint);
  const std::vector<double> errors = aad::ae_reconstruction_errors(m.params, data.test[0].ae_vectors);
  ASSERT_EQ(errors.size(), 309u);
  double mean = 0.0;
  for (double e : errors) mean += e;
  EXPECT_NEAR(scores[0].score, mean / 309.0, 1e-12);
  EXPECT_THROW(aad::score_test_set(r.checkpoint, prepared(aad::ModelKind::kDeepSvdd, 20, 4)), aad::Error);
}

TEST(TrainModel, NanAndEmptyInputs) {
  aad::PreparedSplit data = prepared(aad::ModelKind::kDeepSvdd, 20, 4);
  aad::TrainConfig c = aad::TrainConfig::svdd_defaults();
  c.max_epochs = 2;
  aad::PreparedSplit bad = data;
  bad.train[0].svdd_windows.data[5] = std::numeric_limits<float>::quiet_NaN();
  try {
    aad::train_model(c, bad);
    FAIL();
  } catch (const aad::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDivergence);
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
  }
  aad::PreparedSplit empty = data;
  empty.val.clear();
  try {
    aad::train_model(c, empty);
    FAIL();
  } catch (const aad::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUsage);
  }
}

TEST(TrainConfig, ReferenceDefaultsAndJson) {
  const aad::TrainConfig s = aad::TrainConfig::svdd_defaults();
  EXPECT_EQ(s.learning_rate, 0.0005);
  EXPECT_EQ(s.batch_size, 32u);
  EXPECT_EQ(s.max_epochs, 50);
  EXPECT_EQ(s.patience, 10);
  EXPECT_EQ(s.lambda, 1e-5);
  const aad::TrainConfig a = aad::TrainConfig::ae_defaults();
  EXPECT_EQ(a.learning_rate, 0.001);
  EXPECT_EQ(a.batch_size, 256u);
  EXPECT_EQ(a.max_epochs, 100);
  for (const aad::TrainConfig& c : {s, a}) {
    const aad::TrainConfig back = aad::TrainConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
    EXPECT_EQ(back.digest(), c.digest());
  }
  aad::TrainConfig odd = s;
  odd.subspace_dim = 3;
  EXPECT_FALSE(odd.paper_dim());
  odd.max_epochs = 0;
  EXPECT_THROW(odd.validate(), aad::Error);
}

}  // namespace
