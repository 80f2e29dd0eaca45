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
#include <span>
#include <string>
#include <vector>

#include "aad/autodiff.hpp"
#include "aad/checkpoint.hpp"
#include "aad/features.hpp"
#include "aad/network.hpp"

namespace aad {

enum class ModelKind { kDenseAe, kDeepSvdd };
enum class SvddVariant { kOneClass, kSoftBoundary };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
std::string to_string(SvddVariant variant);
SvddVariant parse_svdd_variant(const std::string& name);

inline constexpr std::size_t kDenseAeParameterCount = 50760;
inline constexpr double kLeakySlope = 0.2;
inline constexpr double kCenterGuard = 0.1;

// 320-64-64-8-64-64-320, biased, ReLU hidden, linear output.
nn::Layout dense_ae_layout();

// Four bias-free 3x3 stride-2 convs (1->8->16->16->16, LeakyReLU 0.2) on
// 1x64x64, flattened to 256 features, then a bias-free dense 256->dim.
nn::Layout svdd_layout(std::size_t subspace_dim);
inline constexpr std::size_t kSvddFlatFeatures = 256;

struct DenseAeModel {
  nn::NetworkParams<float> params;
  std::uint64_t seed = 0;
};

struct DeepSvddModel {
  nn::NetworkParams<float> params;
  std::size_t subspace_dim = 2;
  std::vector<double> center;
  double radius_sq = 0.0;
  std::uint64_t seed = 0;
};

struct SvddObjectiveConfig {
  SvddVariant variant = SvddVariant::kOneClass;
  double lambda = 1e-5;
  double nu = 0.1;

  void validate() const;
};

DenseAeModel build_dense_ae(std::uint64_t seed);
DeepSvddModel build_svdd_net(std::size_t subspace_dim, std::uint64_t seed);

// Throws kConfiguration if any bias tensor is present.
template <typename T>
void require_bias_free(const nn::NetworkParams<T>& params);

// Packs vectors [n x 320] / windows into batch tensors for rows [begin, end).
nn::Tensor<float> vector_batch(const Grid<float>& vectors, std::span<const std::size_t> rows);
nn::Tensor<float> window_batch(const WindowStack& windows, std::span<const std::size_t> rows);
nn::Tensor<float> window_batch(const WindowStack& windows, std::size_t begin, std::size_t end);

// Differentiable objectives, recorded on the tape.

// (lambda / 2) * sum of squared weights over every parameter tensor.
template <typename T>
nn::Var weight_decay(nn::Tape<T>& tape, nn::NetworkParams<T>& params, double lambda);

// Mean over rows of the per-row MSE between the network output and the input.
template <typename T>
nn::Var ae_loss(nn::Tape<T>& tape, nn::NetworkParams<T>& params, const nn::Tensor<T>& vectors);

// (1/N) sum ||phi(x) - c||^2 + (lambda/2) ||W||^2.
template <typename T>
nn::Var one_class_loss(nn::Tape<T>& tape, nn::NetworkParams<T>& params,
                       const nn::Tensor<T>& windows, std::span<const T> center, double lambda);

// R^2 + C sum max(0, ||phi(x) - c||^2 - R^2) + (lambda/2) ||W||^2. R is a
// constant here; it is updated outside the gradient step.
template <typename T>
nn::Var soft_boundary_loss(nn::Tape<T>& tape, nn::NetworkParams<T>& params,
                           const nn::Tensor<T>& windows, std::span<const T> center,
                           double radius_sq, double outlier_weight, double lambda);

// Inference on frozen parameters.

// Per-vector mean squared reconstruction error.
std::vector<double> ae_reconstruction_errors(const nn::NetworkParams<float>& params,
                                             const Grid<float>& vectors);
double ae_clip_score(const nn::NetworkParams<float>& params, const Grid<float>& vectors);

// phi(x) for every window, [n x dim] row-major.
std::vector<double> embed_windows(const nn::NetworkParams<float>& params,
                                  const WindowStack& windows);

// c = mean phi(x) over all windows, then |c_i| < 0.1 pushed to +-0.1 keeping
// sign (zero goes to +0.1).
std::vector<double> init_center(const nn::NetworkParams<float>& params,
                                std::span<const WindowStack> train_windows);
std::vector<double> guard_center(std::vector<double> center);

// (1 - nu) empirical quantile of squared distances, lower-nearest convention.
double update_radius(std::vector<double> dist_sq, double nu);

// ||phi(x) - c||^2 per window.
std::vector<double> anomaly_scores(const nn::NetworkParams<float>& params,
                                   const WindowStack& windows, std::span<const double> center);
double svdd_clip_score(const nn::NetworkParams<float>& params, const WindowStack& windows,
                       std::span<const double> center);

// Checkpoint metadata carries model_kind, subspace_dim, center, radius_sq,
// seed and init_scheme; callers may add more before saving.
nn::Checkpoint to_checkpoint(const DenseAeModel& model);
nn::Checkpoint to_checkpoint(const DeepSvddModel& model);
ModelKind checkpoint_kind(const nn::Checkpoint& checkpoint);
// Both loaders validate architecture invariants (AE count, SVDD bias-free).
DenseAeModel dense_ae_from_checkpoint(const nn::Checkpoint& checkpoint);
DeepSvddModel svdd_from_checkpoint(const nn::Checkpoint& checkpoint);

}  // namespace aad
