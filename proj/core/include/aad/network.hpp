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
#include <string>
#include <utility>
#include <vector>

#include "aad/autodiff.hpp"
#include "aad/tensor.hpp"

namespace aad::nn {

enum class LayerKind { kDense, kConv2d };
enum class Activation { kNone, kRelu, kLeakyRelu };

struct LayerSpec {
  LayerKind kind = LayerKind::kDense;
  std::size_t in = 0;   // features (dense) or channels (conv)
  std::size_t out = 0;
  std::size_t kernel = 1;
  int stride = 1;
  int pad = 0;
  bool bias = false;
  Activation activation = Activation::kNone;
  double slope = 0.0;  // LeakyReLU negative slope

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Ordered layer description; a dense layer following a conv layer flattens
// its input.
struct Layout {
  Shape input;  // per-example shape, e.g. {320} or {1, 64, 64}
  std::vector<LayerSpec> layers;

  std::string to_text() const;
  static Layout parse(const std::string& text);

  friend bool operator==(const Layout&, const Layout&) = default;
};

inline constexpr const char* kLayoutVersionLine = "aad-layout v1";
inline constexpr const char* kInitScheme = "glorot_uniform";

template <typename T>
struct NetworkParams {
  Layout layout;
  std::vector<std::pair<std::string, Tensor<T>>> tensors;

  std::size_t total_parameter_count() const {
    std::size_t n = 0;
    for (const auto& [name, t] : tensors) n += t.size();
    return n;
  }
  Tensor<T>* find(const std::string& name) {
    for (auto& [n, t] : tensors) {
      if (n == name) return &t;
    }
    return nullptr;
  }
  const Tensor<T>* find(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
      if (n == name) return &t;
    }
    return nullptr;
  }
  bool has_bias() const {
    for (const auto& [n, t] : tensors) {
      if (n.ends_with(".bias")) return true;
    }
    return false;
  }
  void zero_grad() {
    for (auto& [n, t] : tensors) {
      t.ensure_grad();
      t.zero_grad();
    }
  }
  template <typename U>
  NetworkParams<U> cast() const {
    NetworkParams<U> out;
    out.layout = layout;
    for (const auto& [n, t] : tensors) out.tensors.emplace_back(n, t.template cast<U>());
    return out;
  }
};

// Per-layer element count: weights plus optional bias.
std::size_t layer_parameter_count(const LayerSpec& layer);

// Weights uniform in +-sqrt(6 / (fan_in + fan_out)); biases start at zero.
// Tensor names are "layer<i>.weight" and "layer<i>.bias".
template <typename T>
NetworkParams<T> init_network(const Layout& layout, std::uint64_t seed);

// Records the whole network on the tape for a batch x [B x input...].
template <typename T>
Var forward(Tape<T>& tape, NetworkParams<T>& params, Var x);

// Tape-free inference for frozen parameters.
template <typename T>
Tensor<T> predict(const NetworkParams<T>& params, const Tensor<T>& x);

}  // namespace aad::nn
