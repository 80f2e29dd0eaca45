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

#include "aad/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "aad/evaluation.hpp"
#include "aad/features.hpp"
#include "aad/models.hpp"

namespace aad {
namespace {

using nn::Activation;
using nn::LayerKind;
using nn::LayerSpec;
using nn::Layout;
using nn::Tape;
using nn::Tensor;
using nn::Var;

std::string format(const char* fmt, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

Tensor<double> random_tensor(nn::Shape shape, std::mt19937_64& rng) {
  Tensor<double> t(std::move(shape));
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = g(rng);
  return t;
}

LayerSpec dense_layer(std::size_t in, std::size_t out, bool bias, Activation act) {
  LayerSpec l;
  l.kind = LayerKind::kDense;
  l.in = in;
  l.out = out;
  l.bias = bias;
  l.activation = act;
  l.slope = act == Activation::kLeakyRelu ? 0.2 : 0.0;
  return l;
}

LayerSpec conv_layer(std::size_t in, std::size_t out, Activation act) {
  LayerSpec l;
  l.kind = LayerKind::kConv2d;
  l.in = in;
  l.out = out;
  l.kernel = 3;
  l.stride = 2;
  l.pad = 1;
  l.activation = act;
  l.slope = act == Activation::kLeakyRelu ? 0.2 : 0.0;
  return l;
}

// Small SVDD-shaped network: two bias-free convs and a bias-free projection.
Layout tiny_svdd() {
  Layout layout;
  layout.input = {1, 8, 8};
  layout.layers = {conv_layer(1, 2, Activation::kLeakyRelu),
                   conv_layer(2, 3, Activation::kLeakyRelu),
                   dense_layer(3 * 2 * 2, 2, false, Activation::kNone)};
  return layout;
}

struct GradCase {
  std::string name;
  Layout layout;
  std::function<nn::LossClosure(std::mt19937_64&, nn::NetworkParams<double>&)> make;
};

std::vector<GradCase> grad_cases() {
  std::vector<GradCase> cases;

  auto sum_squares_of_forward = [](nn::Shape input) {
    return [input](std::mt19937_64& rng, nn::NetworkParams<double>&) -> nn::LossClosure {
      nn::Shape batch{3};
      batch.insert(batch.end(), input.begin(), input.end());
      Tensor<double> x = random_tensor(batch, rng);
      return [x](Tape<double>& tape, nn::NetworkParams<double>& p) {
        return tape.sum_squares(nn::forward(tape, p, tape.input(x)));
      };
    };
  };

  Layout dense;
  dense.input = {6};
  dense.layers = {dense_layer(6, 5, true, Activation::kNone)};
  cases.push_back({"dense", dense, sum_squares_of_forward(dense.input)});

  Layout conv;
  conv.input = {2, 9, 9};
  conv.layers = {conv_layer(2, 3, Activation::kNone)};
  cases.push_back({"conv2d", conv, sum_squares_of_forward(conv.input)});

  Layout leaky;
  leaky.input = {6};
  leaky.layers = {dense_layer(6, 8, true, Activation::kLeakyRelu),
                  dense_layer(8, 3, true, Activation::kNone)};
  cases.push_back({"leaky_relu", leaky, sum_squares_of_forward(leaky.input)});

  Layout relu;
  relu.input = {6};
  relu.layers = {dense_layer(6, 8, true, Activation::kRelu),
                 dense_layer(8, 3, true, Activation::kNone)};
  cases.push_back({"relu", relu, sum_squares_of_forward(relu.input)});

  Layout ae;
  ae.input = {6};
  ae.layers = {dense_layer(6, 4, true, Activation::kRelu),
               dense_layer(4, 6, true, Activation::kNone)};
  cases.push_back({"mse", ae, [](std::mt19937_64& rng, nn::NetworkParams<double>&) {
                     Tensor<double> x = random_tensor({5, 6}, rng);
                     return nn::LossClosure([x](Tape<double>& tape, nn::NetworkParams<double>& p) {
                       return ae_loss(tape, p, x);
                     });
                   }});

  cases.push_back({"one_class", tiny_svdd(), [](std::mt19937_64& rng, nn::NetworkParams<double>&) {
                     Tensor<double> x = random_tensor({4, 1, 8, 8}, rng);
                     std::normal_distribution<double> g(0.0, 1.0);
                     std::vector<double> c{g(rng), g(rng)};
                     return nn::LossClosure([x, c](Tape<double>& tape,
                                                   nn::NetworkParams<double>& p) {
                       return one_class_loss<double>(tape, p, x, c, 1e-3);
                     });
                   }});

  cases.push_back(
      {"soft_boundary", tiny_svdd(), [](std::mt19937_64& rng, nn::NetworkParams<double>& params) {
         Tensor<double> x = random_tensor({6, 1, 8, 8}, rng);
         std::normal_distribution<double> g(0.0, 1.0);
         std::vector<double> c{g(rng), g(rng)};
         // Radius at the median distance so the hinge is active for some rows.
         const Tensor<double> phi = nn::predict(params, x);
         std::vector<double> d;
         for (std::size_t i = 0; i < 6; ++i) {
           const double a = phi[2 * i] - c[0];
           const double b = phi[2 * i + 1] - c[1];
           d.push_back(a * a + b * b);
         }
         std::sort(d.begin(), d.end());
         const double r2 = 0.5 * (d[2] + d[3]);
         const double weight = 1.0 / (0.1 * 6.0);
         return nn::LossClosure([x, c, r2, weight](Tape<double>& tape,
                                                   nn::NetworkParams<double>& p) {
           return soft_boundary_loss<double>(tape, p, x, c, r2, weight, 1e-3);
         });
       }});
  return cases;
}

std::vector<float> noise_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 0.1f);
  std::vector<float> x(n);
  for (float& v : x) v = g(rng);
  return x;
}

}  // namespace

double auc_pairwise(std::span<const double> scores, std::span<const Label> labels) {
  double wins = 0.0;
  std::size_t n_a = 0;
  std::size_t n_n = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == Label::kAnomalous) ++n_a; else ++n_n;
  }
  if (n_a == 0 || n_n == 0) return std::nan("");
  // Count in units of half a pair so the sum stays an exact integer.
  std::uint64_t halves = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != Label::kAnomalous) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != Label::kNormal) continue;
      if (scores[i] > scores[j]) halves += 2;
      else if (scores[i] == scores[j]) halves += 1;
    }
  }
  wins = static_cast<double>(halves);
  return wins / (2.0 * static_cast<double>(n_a) * static_cast<double>(n_n));
}

std::vector<CheckResult> verify_gradients(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  for (const GradCase& gc : grad_cases()) {
    double worst = 0.0;
    for (int s = 0; s < options.grad_seeds; ++s) {
      const std::uint64_t seed = options.seed * 1000 + static_cast<std::uint64_t>(s);
      std::mt19937_64 rng(seed + 17);
      nn::NetworkParams<double> params = nn::init_network<double>(gc.layout, seed);
      // Nonzero biases so bias gradients are exercised away from the origin.
      std::normal_distribution<double> g(0.0, 0.1);
      for (auto& [name, t] : params.tensors) {
        if (name.ends_with(".bias")) {
          for (std::size_t i = 0; i < t.size(); ++i) t[i] = g(rng);
        }
      }
      const nn::LossClosure loss = gc.make(rng, params);
      const nn::GradCheckReport report =
          nn::grad_check(loss, params, options.grad_tolerance, 1e-5, options.gradient_hook);
      worst = std::max(worst, report.worst());
    }
    out.push_back({"gradient/" + gc.name, worst < options.grad_tolerance,
                   format("max relative error %.3g over %.0f seeds", worst, options.grad_seeds)});
  }
  return out;
}

CheckResult verify_auc_oracle(const VerifyOptions& options) {
  std::mt19937_64 rng(options.seed + 4242);
  int mismatches = 0;
  for (int k = 0; k < options.auc_instances; ++k) {
    std::uniform_int_distribution<std::size_t> size(2, options.auc_max_n);
    const std::size_t n = size(rng);
    // Every third instance draws from a handful of values to force ties.
    std::uniform_int_distribution<int> coarse(0, 4);
    std::normal_distribution<double> fine(0.0, 1.0);
    std::vector<double> scores(n);
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = k % 3 == 0 ? coarse(rng) : fine(rng);
      labels[i] = rng() % 2 ? Label::kAnomalous : Label::kNormal;
    }
    labels[0] = Label::kAnomalous;
    labels[1] = Label::kNormal;
    if (auc(scores, labels) != auc_pairwise(scores, labels)) ++mismatches;
  }
  return {"auc/oracle_equivalence", mismatches == 0,
          std::to_string(mismatches) + " mismatches in " + std::to_string(options.auc_instances) +
              " instances"};
}

std::vector<CheckResult> verify_shape_laws() {
  std::vector<CheckResult> out;
  const FeatureConfig config;
  const std::vector<float> x = noise_signal(160000, 1);
  const LogMelSpectrogram spec = log_mel(stft_power(x), mel_filterbank());
  out.push_back({"shape/log_mel", spec.values.rows == 313 && spec.values.cols == 64,
                 std::to_string(spec.values.rows) + "x" + std::to_string(spec.values.cols)});
  const Grid<float> vectors = stack_frames(spec, config.n_stack);
  out.push_back({"shape/ae_vectors", vectors.rows == 309 && vectors.cols == 320,
                 std::to_string(vectors.rows) + "x" + std::to_string(vectors.cols)});
  const WindowStack windows = tile_windows(spec, config.window_frames);
  bool padded = windows.n_windows == 5 && windows.size == 64;
  std::size_t zero_frames = 0;
  if (padded) {
    const std::span<const float> last = windows.window(4);
    for (std::size_t f = 0; f < 64; ++f) {
      bool zero = true;
      for (std::size_t m = 0; m < 64; ++m) zero = zero && last[f * 64 + m] == 0.0f;
      if (zero) ++zero_frames;
    }
    padded = zero_frames == 7;
  }
  out.push_back({"shape/svdd_windows", padded,
                 std::to_string(windows.n_windows) + " windows, " + std::to_string(zero_frames) +
                     " zero frames in the last"});
  return out;
}

std::vector<CheckResult> verify_parameter_counts(const VerifyOptions& options) {
  std::vector<CheckResult> out;
  auto count = [](const Layout& l) {
    std::size_t n = 0;
    for (const LayerSpec& s : l.layers) n += nn::layer_parameter_count(s);
    return n;
  };
  const std::size_t ae = count(options.ae_layout.value_or(dense_ae_layout()));
  out.push_back({"params/dense_ae", ae == kDenseAeParameterCount,
                 std::to_string(ae) + " (expected " + std::to_string(kDenseAeParameterCount) + ")"});

  const std::size_t d2 = count(options.svdd_dim2_layout.value_or(svdd_layout(2)));
  const std::size_t d4 = count(options.svdd_dim4_layout.value_or(svdd_layout(4)));
  const std::size_t d8 = count(options.svdd_dim8_layout.value_or(svdd_layout(8)));
  out.push_back({"params/svdd_deltas", d4 - d2 == 512 && d8 - d4 == 1024,
                 "dim4-dim2 = " + std::to_string(static_cast<long>(d4 - d2)) +
                     ", dim8-dim4 = " + std::to_string(static_cast<long>(d8 - d4))});
  const double refs[] = {6848.0, 7360.0, 8384.0};
  const std::size_t got[] = {d2, d4, d8};
  bool within = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const double rel = std::fabs(static_cast<double>(got[i]) - refs[i]) / refs[i];
    within = within && rel <= 0.10;
    detail += (i ? ", " : "") + std::to_string(got[i]) + format(" (%.1f%%)", 100.0 * rel);
  }
  out.push_back({"params/svdd_totals", within, detail});
  return out;
}

std::vector<CheckResult> run_verify(const VerifyOptions& options) {
  std::vector<CheckResult> out = verify_gradients(options);
  out.push_back(verify_auc_oracle(options));
  for (CheckResult& r : verify_shape_laws()) out.push_back(std::move(r));
  for (CheckResult& r : verify_parameter_counts(options)) out.push_back(std::move(r));
  return out;
}

}  // namespace aad
