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
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "aad/tensor.hpp"

namespace aad::nn {

// Handle to a value recorded on a Tape. A default-constructed Var refers to
// nothing and is rejected by every Tape operation.
struct Var {
  static constexpr std::size_t kInvalid = std::numeric_limits<std::size_t>::max();
  std::size_t id = kInvalid;
  const void* owner = nullptr;

  bool valid() const { return id != kInvalid && owner != nullptr; }
};

// Reverse-mode recorder for the fixed set of operations the two model
// families need. Each forward call appends a node; backward() walks the nodes
// in reverse creation order.
template <typename T>
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Constant leaf; receives no gradient.
  Var input(Tensor<T> value);
  // Leaf bound to a parameter; backward() accumulates into param->grad().
  // The parameter must outlive the tape.
  Var parameter(Tensor<T>* param);

  // x [B x In] * w [In x Out] (+ b [Out]).
  Var dense(Var x, Var w, std::optional<Var> b = std::nullopt);
  // Cross-correlation, x [B x C x H x W], k [C' x C x kh x kw], zero padding.
  Var conv2d(Var x, Var k, int stride, int pad);
  Var leaky_relu(Var x, T slope);
  Var relu(Var x);
  // [B x ...] -> [B x prod(...)].
  Var flatten(Var x);

  Var sum(Var x);
  Var mean(Var x);
  // Scalar sum of squared entries.
  Var sum_squares(Var x);
  // [B x D] -> [B], squared Euclidean distance of each row to a constant center.
  Var row_sq_dist(Var x, std::span<const T> center);
  // [B x D] -> [B], mean over D of (x - target)^2; target is constant.
  Var row_mse(Var x, const Tensor<T>& target);
  // max(0, x - offset) elementwise.
  Var hinge(Var x, T offset);
  Var add(Var a, Var b);
  Var scale(Var x, T factor);
  Var add_scalar(Var x, T value);

  const Tensor<T>& value(Var v) const;
  T scalar(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and propagates. Throws kUsage if loss is not a
  // scalar recorded on this tape.
  void backward(Var loss);

 private:
  struct Node {
    Tensor<T> value;
    std::vector<T> grad;
    std::vector<std::size_t> parents;
    Tensor<T>* param = nullptr;
    // Receives the node itself and the tape's node list.
    std::function<void(Node&, std::vector<Node>&)> backward;
  };

  Var push(Tensor<T> value, std::vector<std::size_t> parents,
           std::function<void(Node&, std::vector<Node>&)> fn);
  const Node& node(Var v) const;
  static std::vector<T>& grad_of(std::vector<Node>& nodes, std::size_t id);

  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace aad::nn
