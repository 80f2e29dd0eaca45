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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aad/audio_io.hpp"
#include "aad/grad_check.hpp"
#include "aad/network.hpp"

namespace aad {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  int grad_seeds = 10;
  double grad_tolerance = 1e-5;
  int auc_instances = 1000;
  std::size_t auc_max_n = 500;
  std::uint64_t seed = 0;
  // Applied to analytic gradients before comparison (fault injection).
  nn::GradientHook gradient_hook;
  // Replace the built layouts (architecture-drift checks).
  std::optional<nn::Layout> ae_layout;
  std::optional<nn::Layout> svdd_dim2_layout;
  std::optional<nn::Layout> svdd_dim4_layout;
  std::optional<nn::Layout> svdd_dim8_layout;
};

// Pair-counting AUC in O(n^2) with half weight for ties.
double auc_pairwise(std::span<const double> scores, std::span<const Label> labels);

std::vector<CheckResult> verify_gradients(const VerifyOptions& options);
CheckResult verify_auc_oracle(const VerifyOptions& options);
std::vector<CheckResult> verify_shape_laws();
std::vector<CheckResult> verify_parameter_counts(const VerifyOptions& options);

// All of the above in order.
std::vector<CheckResult> run_verify(const VerifyOptions& options);

}  // namespace aad
