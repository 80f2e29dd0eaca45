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

#include <functional>
#include <string>
#include <vector>

#include "aad/network.hpp"

namespace aad::nn {

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  double tolerance = 1e-5;
  std::vector<GradCheckEntry> entries;

  double worst() const;
  bool passed() const { return worst() < tolerance; }
};

// Builds a scalar loss on the tape from the given parameters. Must be
// deterministic.
using LossClosure = std::function<Var(Tape<double>&, NetworkParams<double>&)>;

// Optional hook applied to the analytic gradients before comparison; used to
// verify that the checker detects corrupted gradients.
using GradientHook = std::function<void(NetworkParams<double>&)>;

// Central differences with step h per parameter element. Error per element is
// |analytic - numeric| / max(1e-12, |analytic| + |numeric|); the report keeps
// the per-tensor maximum.
GradCheckReport grad_check(const LossClosure& loss, NetworkParams<double>& params,
                           double tolerance, double h = 1e-5,
                           const GradientHook& hook = nullptr);

}  // namespace aad::nn
