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

#include "aad/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aad/error.hpp"

namespace aad {
namespace {

constexpr std::size_t kInferenceChunk = 256;

nn::LayerSpec dense(std::size_t in, std::size_t out, bool bias, nn::Activation act,
                    double slope = 0.0) {
  nn::LayerSpec l;
  l.kind = nn::LayerKind::kDense;
  l.in = in;
  l.out = out;
  l.bias = bias;
  l.activation = act;
  l.slope = slope;
  return l;
}

nn::LayerSpec conv(std::size_t in, std::size_t out) {
  nn::LayerSpec l;
  l.kind = nn::LayerKind::kConv2d;
  l.in = in;
  l.out = out;
  l.kernel = 3;
  l.stride = 2;
  l.pad = 1;
  l.bias = false;
  l.activation = nn::Activation::kLeakyRelu;
  l.slope = kLeakySlope;
  return l;
}

}  // namespace

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kDenseAe ? "ae" : "svdd";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "ae" || name == "dense_ae") return ModelKind::kDenseAe;
  if (name == "svdd" || name == "deep_svdd") return ModelKind::kDeepSvdd;
  throw Error(ErrorKind::kConfiguration, "unknown model kind '" + name + "'");
}

std::string to_string(SvddVariant variant) {
  return variant == SvddVariant::kOneClass ? "one_class" : "soft_boundary";
}

SvddVariant parse_svdd_variant(const std::string& name) {
  if (name == "one_class") return SvddVariant::kOneClass;
  if (name == "soft_boundary") return SvddVariant::kSoftBoundary;
  throw Error(ErrorKind::kConfiguration, "unknown SVDD variant '" + name + "'");
}

void SvddObjectiveConfig::validate() const {
  if (!(lambda > 0.0)) throw Error(ErrorKind::kConfiguration, "weight decay must be positive");
  if (variant == SvddVariant::kSoftBoundary && !(nu > 0.0 && nu <= 1.0)) {
    throw Error(ErrorKind::kConfiguration, "nu must lie in (0, 1]");
  }
}

nn::Layout dense_ae_layout() {
  nn::Layout layout;
  layout.input = {320};
  const std::size_t widths[] = {320, 64, 64, 8, 64, 64, 320};
  for (std::size_t i = 0; i + 1 < std::size(widths); ++i) {
    const bool last = i + 2 == std::size(widths);
    layout.layers.push_back(dense(widths[i], widths[i + 1], true,
                                  last ? nn::Activation::kNone : nn::Activation::kRelu));
  }
  return layout;
}

nn::Layout svdd_layout(std::size_t subspace_dim) {
  if (subspace_dim < 1) throw Error(ErrorKind::kConfiguration, "subspace dimension must be >= 1");
  nn::Layout layout;
  layout.input = {1, 64, 64};
  layout.layers = {conv(1, 8), conv(8, 16), conv(16, 16), conv(16, 16),
                   dense(kSvddFlatFeatures, subspace_dim, false, nn::Activation::kNone)};
  return layout;
}

template <typename T>
void require_bias_free(const nn::NetworkParams<T>& params) {
  for (const nn::LayerSpec& l : params.layout.layers) {
    if (l.bias) throw Error(ErrorKind::kConfiguration, "deep SVDD layout has a biased layer");
  }
  if (params.has_bias()) {
    throw Error(ErrorKind::kConfiguration, "deep SVDD parameters contain a bias tensor");
  }
}

template void require_bias_free<float>(const nn::NetworkParams<float>&);
template void require_bias_free<double>(const nn::NetworkParams<double>&);

DenseAeModel build_dense_ae(std::uint64_t seed) {
  DenseAeModel model;
  model.seed = seed;
  model.params = nn::init_network<float>(dense_ae_layout(), seed);
  return model;
}

DeepSvddModel build_svdd_net(std::size_t subspace_dim, std::uint64_t seed) {
  DeepSvddModel model;
  model.seed = seed;
  model.subspace_dim = subspace_dim;
  model.params = nn::init_network<float>(svdd_layout(subspace_dim), seed);
  require_bias_free(model.params);
  model.center.assign(subspace_dim, kCenterGuard);
  return model;
}

nn::Tensor<float> vector_batch(const Grid<float>& vectors, std::span<const std::size_t> rows) {
  nn::Tensor<float> out({rows.size(), vectors.cols});
  auto dst = out.data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = vectors.row(rows[i]);
    std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(i * vectors.cols));
  }
  return out;
}

nn::Tensor<float> window_batch(const WindowStack& windows, std::span<const std::size_t> rows) {
  const std::size_t cells = windows.size * windows.size;
  nn::Tensor<float> out({rows.size(), 1, windows.size, windows.size});
  auto dst = out.data();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = windows.window(rows[i]);
    std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(i * cells));
  }
  return out;
}

nn::Tensor<float> window_batch(const WindowStack& windows, std::size_t begin, std::size_t end) {
  std::vector<std::size_t> rows(end - begin);
  std::iota(rows.begin(), rows.end(), begin);
  return window_batch(windows, rows);
}

template <typename T>
nn::Var weight_decay(nn::Tape<T>& tape, nn::NetworkParams<T>& params, double lambda) {
  nn::Var total = tape.input(nn::Tensor<T>({}, std::vector<T>{T{}}));
  for (auto& [name, t] : params.tensors) {
    total = tape.add(total, tape.sum_squares(tape.parameter(&t)));
  }
  return tape.scale(total, static_cast<T>(lambda / 2.0));
}

template <typename T>
nn::Var ae_loss(nn::Tape<T>& tape, nn::NetworkParams<T>& params, const nn::Tensor<T>& vectors) {
  const nn::Var out = nn::forward(tape, params, tape.input(vectors));
  return tape.mean(tape.row_mse(out, vectors));
}

template <typename T>
nn::Var one_class_loss(nn::Tape<T>& tape, nn::NetworkParams<T>& params,
                       const nn::Tensor<T>& windows, std::span<const T> center, double lambda) {
  const nn::Var phi = nn::forward(tape, params, tape.input(windows));
  const nn::Var fit = tape.mean(tape.row_sq_dist(phi, center));
  if (lambda == 0.0) return fit;
  return tape.add(fit, weight_decay(tape, params, lambda));
}

template <typename T>
nn::Var soft_boundary_loss(nn::Tape<T>& tape, nn::NetworkParams<T>& params,
                           const nn::Tensor<T>& windows, std::span<const T> center,
                           double radius_sq, double outlier_weight, double lambda) {
  if (radius_sq < 0.0) throw Error(ErrorKind::kConfiguration, "radius must be non-negative");
  const nn::Var phi = nn::forward(tape, params, tape.input(windows));
  const nn::Var violations =
      tape.sum(tape.hinge(tape.row_sq_dist(phi, center), static_cast<T>(radius_sq)));
  nn::Var loss = tape.add_scalar(tape.scale(violations, static_cast<T>(outlier_weight)),
                                 static_cast<T>(radius_sq));
  if (lambda != 0.0) loss = tape.add(loss, weight_decay(tape, params, lambda));
  return loss;
}

#define AAD_INSTANTIATE_LOSSES(T)                                                             \
  template nn::Var weight_decay<T>(nn::Tape<T>&, nn::NetworkParams<T>&, double);              \
  template nn::Var ae_loss<T>(nn::Tape<T>&, nn::NetworkParams<T>&, const nn::Tensor<T>&);     \
  template nn::Var one_class_loss<T>(nn::Tape<T>&, nn::NetworkParams<T>&,                     \
                                     const nn::Tensor<T>&, std::span<const T>, double);       \
  template nn::Var soft_boundary_loss<T>(nn::Tape<T>&, nn::NetworkParams<T>&,                 \
                                         const nn::Tensor<T>&, std::span<const T>, double,    \
                                         double, double);
AAD_INSTANTIATE_LOSSES(float)
AAD_INSTANTIATE_LOSSES(double)
#undef AAD_INSTANTIATE_LOSSES

std::vector<double> ae_reconstruction_errors(const nn::NetworkParams<float>& params,
                                             const Grid<float>& vectors) {
  const std::size_t width = params.layout.input.empty() ? 0 : params.layout.input[0];
  if (vectors.cols != width) {
    throw Error(ErrorKind::kDimension, "reconstruction: vectors have " +
                                           std::to_string(vectors.cols) + " dims, model expects " +
                                           std::to_string(width));
  }
  std::vector<double> errors;
  errors.reserve(vectors.rows);
  for (std::size_t begin = 0; begin < vectors.rows; begin += kInferenceChunk) {
    const std::size_t end = std::min(vectors.rows, begin + kInferenceChunk);
    std::vector<std::size_t> rows(end - begin);
    std::iota(rows.begin(), rows.end(), begin);
    const nn::Tensor<float> x = vector_batch(vectors, rows);
    const nn::Tensor<float> y = nn::predict(params, x);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < width; ++j) {
        const double d = static_cast<double>(y[r * width + j]) - x[r * width + j];
        acc += d * d;
      }
      errors.push_back(acc / static_cast<double>(width));
    }
  }
  return errors;
}

double ae_clip_score(const nn::NetworkParams<float>& params, const Grid<float>& vectors) {
  const std::vector<double> e = ae_reconstruction_errors(params, vectors);
  if (e.empty()) throw Error(ErrorKind::kEmptyInput, "clip has no feature vectors");
  return std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
}

std::vector<double> embed_windows(const nn::NetworkParams<float>& params,
                                  const WindowStack& windows) {
  std::vector<double> out;
  for (std::size_t begin = 0; begin < windows.n_windows; begin += kInferenceChunk) {
    const std::size_t end = std::min(windows.n_windows, begin + kInferenceChunk);
    const nn::Tensor<float> y = nn::predict(params, window_batch(windows, begin, end));
    out.insert(out.end(), y.data().begin(), y.data().end());
  }
  return out;
}

std::vector<double> guard_center(std::vector<double> center) {
  for (double& v : center) {
    if (std::fabs(v) < kCenterGuard) v = v < 0.0 ? -kCenterGuard : kCenterGuard;
  }
  return center;
}

std::vector<double> init_center(const nn::NetworkParams<float>& params,
                                std::span<const WindowStack> train_windows) {
  const std::size_t dim = params.layout.layers.empty() ? 0 : params.layout.layers.back().out;
  std::vector<double> sum(dim, 0.0);
  std::size_t count = 0;
  for (const WindowStack& w : train_windows) {
    const std::vector<double> phi = embed_windows(params, w);
    for (std::size_t i = 0; i < w.n_windows; ++i) {
      for (std::size_t j = 0; j < dim; ++j) sum[j] += phi[i * dim + j];
    }
    count += w.n_windows;
  }
  if (count == 0) throw Error(ErrorKind::kEmptyInput, "init_center: no training windows");
  for (double& v : sum) v /= static_cast<double>(count);
  return guard_center(std::move(sum));
}

double update_radius(std::vector<double> dist_sq, double nu) {
  if (dist_sq.empty()) throw Error(ErrorKind::kEmptyInput, "update_radius: no distances");
  if (!(nu > 0.0 && nu <= 1.0)) throw Error(ErrorKind::kConfiguration, "nu must lie in (0, 1]");
  std::sort(dist_sq.begin(), dist_sq.end());
  const double pos = (1.0 - nu) * static_cast<double>(dist_sq.size() - 1);
  // Small tolerance so that e.g. 0.75 * 3 does not round below 2.25's floor.
  const auto idx = static_cast<std::size_t>(std::floor(pos + 1e-9));
  return dist_sq[std::min(idx, dist_sq.size() - 1)];
}

std::vector<double> anomaly_scores(const nn::NetworkParams<float>& params,
                                   const WindowStack& windows, std::span<const double> center) {
  const std::size_t dim = center.size();
  if (params.layout.layers.empty() || params.layout.layers.back().out != dim) {
    throw Error(ErrorKind::kDimension, "center length does not match the embedding width");
  }
  const std::vector<double> phi = embed_windows(params, windows);
  std::vector<double> scores(windows.n_windows);
  for (std::size_t i = 0; i < windows.n_windows; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      const double d = phi[i * dim + j] - center[j];
      acc += d * d;
    }
    scores[i] = acc;
  }
  return scores;
}

double svdd_clip_score(const nn::NetworkParams<float>& params, const WindowStack& windows,
                       std::span<const double> center) {
  const std::vector<double> s = anomaly_scores(params, windows, center);
  if (s.empty()) throw Error(ErrorKind::kEmptyInput, "clip has no windows");
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

nn::Checkpoint to_checkpoint(const DenseAeModel& model) {
  nn::Checkpoint cp;
  cp.params = model.params;
  cp.metadata["model_kind"] = to_string(ModelKind::kDenseAe);
  cp.metadata["seed"] = model.seed;
  cp.metadata["init_scheme"] = nn::kInitScheme;
  cp.metadata["parameter_count"] = model.params.total_parameter_count();
  return cp;
}

nn::Checkpoint to_checkpoint(const DeepSvddModel& model) {
  nn::Checkpoint cp;
  cp.params = model.params;
  cp.metadata["model_kind"] = to_string(ModelKind::kDeepSvdd);
  cp.metadata["seed"] = model.seed;
  cp.metadata["init_scheme"] = nn::kInitScheme;
  cp.metadata["subspace_dim"] = model.subspace_dim;
  cp.metadata["center"] = model.center;
  cp.metadata["radius_sq"] = model.radius_sq;
  cp.metadata["parameter_count"] = model.params.total_parameter_count();
  return cp;
}

ModelKind checkpoint_kind(const nn::Checkpoint& checkpoint) {
  if (!checkpoint.metadata.contains("model_kind")) {
    throw Error(ErrorKind::kFormat, "checkpoint has no model_kind");
  }
  return parse_model_kind(checkpoint.metadata.at("model_kind").get<std::string>());
}

DenseAeModel dense_ae_from_checkpoint(const nn::Checkpoint& checkpoint) {
  if (checkpoint_kind(checkpoint) != ModelKind::kDenseAe) {
    throw Error(ErrorKind::kUsage, "checkpoint is not a dense AE");
  }
  DenseAeModel model;
  model.params = checkpoint.params;
  model.seed = checkpoint.metadata.value("seed", std::uint64_t{0});
  if (model.params.total_parameter_count() != kDenseAeParameterCount ||
      model.params.layout != dense_ae_layout()) {
    throw Error(ErrorKind::kConfiguration,
                "dense AE checkpoint has " +
                    std::to_string(model.params.total_parameter_count()) +
                    " parameters, expected " + std::to_string(kDenseAeParameterCount));
  }
  return model;
}

DeepSvddModel svdd_from_checkpoint(const nn::Checkpoint& checkpoint) {
  if (checkpoint_kind(checkpoint) != ModelKind::kDeepSvdd) {
    throw Error(ErrorKind::kUsage, "checkpoint is not a deep SVDD model");
  }
  DeepSvddModel model;
  model.params = checkpoint.params;
  require_bias_free(model.params);
  model.seed = checkpoint.metadata.value("seed", std::uint64_t{0});
  model.subspace_dim = checkpoint.metadata.at("subspace_dim").get<std::size_t>();
  model.center = checkpoint.metadata.at("center").get<std::vector<double>>();
  model.radius_sq = checkpoint.metadata.value("radius_sq", 0.0);
  if (model.center.size() != model.subspace_dim) {
    throw Error(ErrorKind::kFormat, "checkpoint center length does not match subspace_dim");
  }
  return model;
}

}  // namespace aad
