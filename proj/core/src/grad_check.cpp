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

#include "aad/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace aad::nn {

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const GradCheckEntry& e : entries) w = std::max(w, e.max_rel_error);
  return w;
}

GradCheckReport grad_check(const LossClosure& loss, NetworkParams<double>& params,
                           double tolerance, double h, const GradientHook& hook) {
  params.zero_grad();
  {
    Tape<double> tape;
    tape.backward(loss(tape, params));
  }
  if (hook) hook(params);

  auto evaluate = [&] {
    Tape<double> tape;
    return tape.scalar(loss(tape, params));
  };

  GradCheckReport report;
  report.tolerance = tolerance;
  for (auto& [name, tensor] : params.tensors) {
    std::vector<double> analytic(tensor.grad().begin(), tensor.grad().end());
    double worst = 0.0;
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor[i];
      tensor[i] = saved + h;
      const double up = evaluate();
      tensor[i] = saved - h;
      const double down = evaluate();
      tensor[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = std::fabs(analytic[i] - numeric) /
                         std::max(1e-12, std::fabs(analytic[i]) + std::fabs(numeric));
      worst = std::max(worst, err);
    }
    report.entries.push_back({name, worst});
  }
  return report;
}

}  // namespace aad::nn
