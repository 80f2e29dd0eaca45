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
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "aad/error.hpp"
#include "aad/models.hpp"
#include "support/oracles.hpp"

namespace {

using aad::ErrorKind;
using aad::nn::NetworkParams;
using aad::nn::Tape;
using aad::nn::Tensor;

aad::WindowStack random_windows(std::size_t n, std::uint64_t seed) {
  aad::WindowStack w;
  w.n_windows = n;
  w.size = 64;
  w.data.resize(n * 64 * 64);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (float& v : w.data) v = g(rng);
  return w;
}

std::vector<double> window_data(const aad::WindowStack& w) {
  return std::vector<double>(w.data.begin(), w.data.end());
}

TEST(DenseAe, ParameterCountPerLayer) {
  const aad::DenseAeModel m = aad::build_dense_ae(1);
  EXPECT_EQ(m.params.total_parameter_count(), 50760u);
  const std::size_t expected[] = {20544, 4160, 520, 576, 4160, 20800};
  ASSERT_EQ(m.params.layout.layers.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(aad::nn::layer_parameter_count(m.params.layout.layers[i]), expected[i]);
  }
  const aad::DenseAeModel again = aad::build_dense_ae(1);
  for (std::size_t i = 0; i < m.params.tensors.size(); ++i) {
    EXPECT_EQ(oracle::as_double(m.params.tensors[i].second),
              oracle::as_double(again.params.tensors[i].second));
  }
}

TEST(DeepSvdd, CountsDeltasAndNoBias) {
  std::size_t counts[3];
  const std::size_t dims[3] = {2, 4, 8};
  for (int i = 0; i < 3; ++i) {
    const aad::DeepSvddModel m = aad::build_svdd_net(dims[i], 3);
    counts[i] = m.params.total_parameter_count();
    EXPECT_FALSE(m.params.has_bias());
    for (const auto& [name, t] : m.params.tensors) EXPECT_EQ(name.find("bias"), std::string::npos);
  }
  EXPECT_EQ(counts[0], 6344u);
  EXPECT_EQ(counts[1] - counts[0], 512u);
  EXPECT_EQ(counts[2] - counts[1], 1024u);
  EXPECT_LE(std::fabs(double(counts[0]) - 6848.0) / 6848.0, 0.10);
}

TEST(DeepSvdd, BiasedParametersRejected) {
  aad::nn::Layout l = aad::svdd_layout(2);
  l.layers.back().bias = true;
  const NetworkParams<float> p = aad::nn::init_network<float>(l, 0);
  EXPECT_THROW(aad::require_bias_free(p), aad::Error);
}

TEST(AeReconstruction, ZeroFixedPointAndOracle) {
  aad::DenseAeModel m = aad::build_dense_ae(2);
  aad::Grid<float> zeros(3, 320, 0.0f);
  for (auto& [name, t] : m.params.tensors) {
    if (name.starts_with("layer5")) std::fill(t.data().begin(), t.data().end(), 0.0f);
  }
  for (double e : aad::ae_reconstruction_errors(m.params, zeros)) EXPECT_EQ(e, 0.0);

  const aad::DenseAeModel r = aad::build_dense_ae(3);
  aad::Grid<float> x(7, 320);
  std::mt19937_64 rng(4);
  std::normal_distribution<float> g(0.0f, 1.0f);
  for (float& v : x.data) v = g(rng);
  const std::vector<double> errors = aad::ae_reconstruction_errors(r.params, x);
  const std::vector<double> xs(x.data.begin(), x.data.end());
  const std::vector<double> y = oracle::forward(r.params, xs, 7);
  double mean = 0.0;
  for (std::size_t i = 0; i < 7; ++i) {
    double e = 0.0;
    for (std::size_t j = 0; j < 320; ++j) e += (y[i * 320 + j] - xs[i * 320 + j]) * (y[i * 320 + j] - xs[i * 320 + j]);
    EXPECT_NEAR(errors[i], e / 320.0, 1e-6 * std::max(1.0, e / 320.0));
    mean += errors[i] / 7.0;
  }
  EXPECT_NEAR(aad::ae_clip_score(r.params, x), mean, 1e-9);
  EXPECT_THROW(aad::ae_reconstruction_errors(r.params, aad::Grid<float>(2, 64)), aad::Error);
}

TEST(Center, GuardAndMeanOracle) {
  EXPECT_EQ(aad::guard_center({0.0, 0.0}), (std::vector<double>{0.1, 0.1}));
  EXPECT_EQ(aad::guard_center({-0.05, 0.5, 2.0}), (std::vector<double>{-0.1, 0.5, 2.0}));

  const aad::DeepSvddModel m = aad::build_svdd_net(4, 5);
  const aad::WindowStack w = random_windows(100, 6);
  const std::vector<double> c = aad::init_center(m.params, std::span<const aad::WindowStack>(&w, 1));
  const std::vector<double> phi = oracle::forward(m.params, window_data(w), 100);
  std::vector<double> mean(4, 0.0);
  for (std::size_t i = 0; i < 100; ++i)
    for (std::size_t j = 0; j < 4; ++j) mean[j] += phi[i * 4 + j] / 100.0;
  mean = aad::guard_center(mean);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(c[j], mean[j], 1e-6);
  EXPECT_THROW(aad::init_center(m.params, {}), aad::Error);
}

TEST(OneClassLoss, HandCasesAndOracle) {
  NetworkParams<double> p = aad::build_svdd_net(2, 7).params.cast<double>();
  const aad::WindowStack w = random_windows(1, 8);
  const Tensor<double> x({1, 1, 64, 64}, window_data(w));
  const std::vector<double> phi = oracle::forward(p, window_data(w), 1);
  {
    Tape<double> t;
    EXPECT_NEAR(t.scalar(aad::one_class_loss<double>(t, p, x, phi, 0.0)), 0.0, 1e-24);
  }
  {
    const std::vector<double> c{phi[0] + 2.0, phi[1]};
    Tape<double> t;
    EXPECT_NEAR(t.scalar(aad::one_class_loss<double>(t, p, x, c, 0.0)), 4.0, 1e-12);
  }
  const aad::WindowStack batch = random_windows(6, 9);
  const Tensor<double> xb({6, 1, 64, 64}, window_data(batch));
  const std::vector<double> c{0.3, -0.2};
  Tape<double> t;
  EXPECT_NEAR(t.scalar(aad::one_class_loss<double>(t, p, xb, c, 1e-3)),
              oracle::one_class_loss(p, window_data(batch), 6, c, 1e-3), 1e-6);
}

TEST(SoftBoundaryLoss, HandCasesOracleAndLimit) {
  NetworkParams<double> p = aad::build_svdd_net(2, 10).params.cast<double>();
  const aad::WindowStack w = random_windows(1, 11);
  const Tensor<double> x({1, 1, 64, 64}, window_data(w));
  const std::vector<double> phi = oracle::forward(p, window_data(w), 1);
  {
    Tape<double> t;
    EXPECT_NEAR(t.scalar(aad::soft_boundary_loss<double>(t, p, x, phi, 2.5, 1.0, 0.0)), 2.5, 1e-12);
  }
  {
    // distance^2 = R^2 + 3 with C = 2.
    const double r2 = 1.0;
    const std::vector<double> c{phi[0] + 2.0, phi[1]};
    Tape<double> t;
    EXPECT_NEAR(t.scalar(aad::soft_boundary_loss<double>(t, p, x, c, r2, 2.0, 0.0)), r2 + 6.0, 1e-12);
  }
  const aad::WindowStack batch = random_windows(5, 12);
  const Tensor<double> xb({5, 1, 64, 64}, window_data(batch));
  const std::vector<double> c{0.1, 0.4};
  {
    Tape<double> t;
    EXPECT_NEAR(t.scalar(aad::soft_boundary_loss<double>(t, p, xb, c, 0.2, 0.7, 1e-3)),
                oracle::soft_boundary_loss(p, window_data(batch), 5, c, 0.2, 0.7, 1e-3), 1e-6);
  }
  // R = 0 and C = 1/N reduce to the one-class objective.
  Tape<double> a, b;
  EXPECT_NEAR(a.scalar(aad::soft_boundary_loss<double>(a, p, xb, c, 0.0, 1.0 / 5.0, 1e-3)),
              b.scalar(aad::one_class_loss<double>(b, p, xb, c, 1e-3)), 1e-12);
  Tape<double> e;
  EXPECT_THROW(aad::soft_boundary_loss<double>(e, p, xb, c, -1.0, 1.0, 0.0), aad::Error);
}

TEST(SoftBoundaryLoss, BiasCollapseIsExactWithFreeCenter) {
  // With a bias and a zero final weight every window maps to the bias, so the
  // free center at that bias leaves only the decay term.
  aad::nn::Layout l = aad::svdd_layout(2);
  l.layers.back().bias = true;
  NetworkParams<double> p = aad::nn::init_network<double>(l, 13);
  const std::string last = "layer" + std::to_string(l.layers.size() - 1);
  for (double& v : p.find(last + ".weight")->data()) v = 0.0;
  Tensor<double>& bias = *p.find(last + ".bias");
  bias[0] = 0.7;
  bias[1] = -0.4;
  const std::vector<double> c{0.7, -0.4};
  const double lambda = 1e-2;
  const aad::WindowStack batch = random_windows(4, 14);
  const Tensor<double> xb({4, 1, 64, 64}, window_data(batch));
  Tape<double> t;
  const double loss = t.scalar(aad::one_class_loss<double>(t, p, xb, c, lambda));
  EXPECT_LE(loss, 0.5 * lambda * oracle::weight_norm_sq(p) + 1e-15);
  EXPECT_FALSE(aad::build_svdd_net(2, 13).params.has_bias());
}

TEST(Radius, QuantileConvention) {
  EXPECT_EQ(aad::update_radius({4, 1, 3, 2}, 0.25), 3.0);
  EXPECT_EQ(aad::update_radius({4, 1, 3, 2}, 1.0), 1.0);
  EXPECT_EQ(aad::update_radius({2.5, 2.5, 2.5}, 0.1), 2.5);
  EXPECT_THROW(aad::update_radius({}, 0.1), aad::Error);
  EXPECT_THROW(aad::update_radius({1.0}, 0.0), aad::Error);
}

TEST(AnomalyScore, CenterPointAndClipMean) {
  const aad::DeepSvddModel m = aad::build_svdd_net(2, 15);
  const aad::WindowStack w = random_windows(5, 16);
  const std::vector<double> phi = aad::embed_windows(m.params, w);
  const std::vector<double> c0{phi[0], phi[1]};
  EXPECT_EQ(aad::anomaly_scores(m.params, w, c0)[0], 0.0);
  const std::vector<double> c{0.2, -0.3};
  const std::vector<double> s = aad::anomaly_scores(m.params, w, c);
  double mean = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    const double d0 = phi[2 * i] - c[0], d1 = phi[2 * i + 1] - c[1];
    EXPECT_DOUBLE_EQ(s[i], d0 * d0 + d1 * d1);
    mean += s[i];
  }
  EXPECT_DOUBLE_EQ(aad::svdd_clip_score(m.params, w, c), mean / 5.0);
}

TEST(AnomalyScore, RotationInvariant) {
  const aad::DeepSvddModel m = aad::build_svdd_net(4, 17);
  const aad::WindowStack w = random_windows(6, 18);
  const std::vector<double> phi = aad::embed_windows(m.params, w);
  const std::vector<double> c{0.3, -0.1, 0.2, 0.5};
  // Random orthogonal 4x4 via Gram-Schmidt.
  std::mt19937_64 rng(19);
  std::normal_distribution<double> g(0.0, 1.0);
  double q[4][4];
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) q[i][j] = g(rng);
    for (int k = 0; k < i; ++k) {
      double dot = 0.0;
      for (int j = 0; j < 4; ++j) dot += q[i][j] * q[k][j];
      for (int j = 0; j < 4; ++j) q[i][j] -= dot * q[k][j];
    }
    double n = 0.0;
    for (int j = 0; j < 4; ++j) n += q[i][j] * q[i][j];
    for (int j = 0; j < 4; ++j) q[i][j] /= std::sqrt(n);
  }
  auto rotate = [&](const double* v) {
    std::vector<double> r(4, 0.0);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) r[i] += q[i][j] * v[j];
    return r;
  };
  const std::vector<double> s = aad::anomaly_scores(m.params, w, c);
  const std::vector<double> rc = rotate(c.data());
  for (std::size_t n = 0; n < 6; ++n) {
    const std::vector<double> rp = rotate(&phi[n * 4]);
    double d = 0.0;
    for (int j = 0; j < 4; ++j) d += (rp[j] - rc[j]) * (rp[j] - rc[j]);
    EXPECT_NEAR(d, s[n], 1e-6);
  }
}

TEST(ModelCheckpoint, RoundTripsAndAssertsCounts) {
  aad::DeepSvddModel m = aad::build_svdd_net(4, 20);
  m.center = {0.1, 0.2, -0.3, 0.4};
  m.radius_sq = 1.5;
  const aad::DeepSvddModel back = aad::svdd_from_checkpoint(aad::to_checkpoint(m));
  EXPECT_EQ(back.center, m.center);
  EXPECT_EQ(back.radius_sq, 1.5);
  EXPECT_EQ(back.subspace_dim, 4u);

  const aad::nn::Checkpoint ae = aad::to_checkpoint(aad::build_dense_ae(21));
  EXPECT_EQ(aad::dense_ae_from_checkpoint(ae).params.total_parameter_count(), 50760u);
  aad::nn::Checkpoint drifted = ae;
  drifted.params.tensors.pop_back();
  EXPECT_THROW(aad::dense_ae_from_checkpoint(drifted), aad::Error);
  EXPECT_THROW(aad::svdd_from_checkpoint(ae), aad::Error);
}

}  // namespace
