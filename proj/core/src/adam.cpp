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

#include "aad/adam.hpp"

#include <cmath>

namespace aad::nn {

template <typename T>
void adam_step(NetworkParams<T>& params, AdamState<T>& state) {
  for (const auto& [name, t] : params.tensors) {
    if (t.size() > 0 && t.grad().size() != t.size()) {
      throw Error(ErrorKind::kUsage, "adam_step: parameter " + name + " has no gradient");
    }
  }
  if (state.m.empty()) {
    for (const auto& [name, t] : params.tensors) {
      state.m.emplace_back(t.size(), 0.0);
      state.v.emplace_back(t.size(), 0.0);
    }
  }
  if (state.m.size() != params.tensors.size()) {
    throw Error(ErrorKind::kUsage, "adam_step: optimizer state does not match parameters");
  }

  ++state.t;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t k = 0; k < params.tensors.size(); ++k) {
    Tensor<T>& p = params.tensors[k].second;
    auto data = p.data();
    auto grad = p.grad();
    std::vector<double>& m = state.m[k];
    std::vector<double>& v = state.v[k];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = static_cast<double>(grad[i]);
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      data[i] = static_cast<T>(static_cast<double>(data[i]) -
                               state.lr * m_hat / (std::sqrt(v_hat) + state.eps));
    }
    p.zero_grad();
  }
}

template void adam_step<float>(NetworkParams<float>&, AdamState<float>&);
template void adam_step<double>(NetworkParams<double>&, AdamState<double>&);

}  // namespace aad::nn
