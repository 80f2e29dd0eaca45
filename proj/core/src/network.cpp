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

#include "aad/network.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace aad::nn {
namespace {

std::string activation_name(const LayerSpec& l) {
  switch (l.activation) {
    case Activation::kNone: return "none";
    case Activation::kRelu: return "relu";
    case Activation::kLeakyRelu: {
      std::ostringstream s;
      s.precision(17);
      s << "leaky_relu:" << l.slope;
      return s.str();
    }
  }
  return "none";
}

std::size_t weight_count(const LayerSpec& l) {
  return l.kind == LayerKind::kDense ? l.in * l.out : l.out * l.in * l.kernel * l.kernel;
}

Shape weight_shape(const LayerSpec& l) {
  if (l.kind == LayerKind::kDense) return {l.in, l.out};
  return {l.out, l.in, l.kernel, l.kernel};
}

template <typename T>
Var apply_activation(Tape<T>& tape, Var v, const LayerSpec& l) {
  switch (l.activation) {
    case Activation::kNone: return v;
    case Activation::kRelu: return tape.relu(v);
    case Activation::kLeakyRelu: return tape.leaky_relu(v, static_cast<T>(l.slope));
  }
  return v;
}

}  // namespace

std::size_t layer_parameter_count(const LayerSpec& layer) {
  return weight_count(layer) + (layer.bias ? layer.out : 0);
}

std::string Layout::to_text() const {
  std::ostringstream out;
  out << kLayoutVersionLine << "\ninput";
  for (std::size_t d : input) out << ' ' << d;
  out << '\n';
  for (const LayerSpec& l : layers) {
    if (l.kind == LayerKind::kDense) {
      out << "dense in=" << l.in << " out=" << l.out;
    } else {
      out << "conv2d in=" << l.in << " out=" << l.out << " kernel=" << l.kernel
          << " stride=" << l.stride << " pad=" << l.pad;
    }
    out << " bias=" << (l.bias ? 1 : 0) << " act=" << activation_name(l) << '\n';
  }
  return out.str();
}

Layout Layout::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kLayoutVersionLine) {
    throw Error(ErrorKind::kFormat, "layout: expected '" + std::string(kLayoutVersionLine) + "'");
  }
  Layout layout;
  if (!std::getline(in, line) || !line.starts_with("input")) {
    throw Error(ErrorKind::kFormat, "layout: missing input line");
  }
  {
    std::istringstream s(line.substr(5));
    std::size_t d = 0;
    while (s >> d) layout.input.push_back(d);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream s(line);
    std::string kind;
    s >> kind;
    LayerSpec l;
    if (kind == "dense") {
      l.kind = LayerKind::kDense;
    } else if (kind == "conv2d") {
      l.kind = LayerKind::kConv2d;
    } else {
      throw Error(ErrorKind::kFormat, "layout: unknown layer kind '" + kind + "'");
    }
    std::string field;
    while (s >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw Error(ErrorKind::kFormat, "layout: bad field " + field);
      const std::string key = field.substr(0, eq);
      const std::string val = field.substr(eq + 1);
      if (key == "in") {
        l.in = std::stoul(val);
      } else if (key == "out") {
        l.out = std::stoul(val);
      } else if (key == "kernel") {
        l.kernel = std::stoul(val);
      } else if (key == "stride") {
        l.stride = std::stoi(val);
      } else if (key == "pad") {
        l.pad = std::stoi(val);
      } else if (key == "bias") {
        l.bias = val == "1";
      } else if (key == "act") {
        if (val == "none") {
          l.activation = Activation::kNone;
        } else if (val == "relu") {
          l.activation = Activation::kRelu;
        } else if (val.starts_with("leaky_relu:")) {
          l.activation = Activation::kLeakyRelu;
          l.slope = std::stod(val.substr(11));
        } else {
          throw Error(ErrorKind::kFormat, "layout: unknown activation " + val);
        }
      } else {
        throw Error(ErrorKind::kFormat, "layout: unknown key " + key);
      }
    }
    layout.layers.push_back(l);
  }
  return layout;
}

template <typename T>
NetworkParams<T> init_network(const Layout& layout, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  NetworkParams<T> params;
  params.layout = layout;
  for (std::size_t i = 0; i < layout.layers.size(); ++i) {
    const LayerSpec& l = layout.layers[i];
    const std::size_t receptive = l.kind == LayerKind::kDense ? 1 : l.kernel * l.kernel;
    const double fan_in = static_cast<double>(l.in * receptive);
    const double fan_out = static_cast<double>(l.out * receptive);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor<T> w(weight_shape(l));
    for (T& v : w.data()) v = static_cast<T>(dist(rng));
    const std::string prefix = "layer" + std::to_string(i);
    params.tensors.emplace_back(prefix + ".weight", std::move(w));
    if (l.bias) params.tensors.emplace_back(prefix + ".bias", Tensor<T>({l.out}));
  }
  return params;
}

template <typename T>
Var forward(Tape<T>& tape, NetworkParams<T>& params, Var x) {
  const Layout& layout = params.layout;
  Var h = x;
  for (std::size_t i = 0; i < layout.layers.size(); ++i) {
    const LayerSpec& l = layout.layers[i];
    const std::string prefix = "layer" + std::to_string(i);
    Tensor<T>* w = params.find(prefix + ".weight");
    Tensor<T>* b = params.find(prefix + ".bias");
    if (w == nullptr || (l.bias != (b != nullptr))) {
      throw Error(ErrorKind::kUsage, "parameters do not match layout at " + prefix);
    }
    if (l.kind == LayerKind::kConv2d) {
      if (l.bias) throw Error(ErrorKind::kConfiguration, "conv2d layers carry no bias");
      h = tape.conv2d(h, tape.parameter(w), l.stride, l.pad);
    } else {
      if (tape.value(h).rank() != 2) h = tape.flatten(h);
      h = b ? tape.dense(h, tape.parameter(w), tape.parameter(b))
            : tape.dense(h, tape.parameter(w));
    }
    h = apply_activation(tape, h, l);
  }
  return h;
}

template <typename T>
Tensor<T> predict(const NetworkParams<T>& params, const Tensor<T>& x) {
  NetworkParams<T> frozen = params;
  Tape<T> tape;
  return tape.value(forward(tape, frozen, tape.input(x)));
}

template NetworkParams<float> init_network<float>(const Layout&, std::uint64_t);
template NetworkParams<double> init_network<double>(const Layout&, std::uint64_t);
template Var forward<float>(Tape<float>&, NetworkParams<float>&, Var);
template Var forward<double>(Tape<double>&, NetworkParams<double>&, Var);
template Tensor<float> predict<float>(const NetworkParams<float>&, const Tensor<float>&);
template Tensor<double> predict<double>(const NetworkParams<double>&, const Tensor<double>&);

}  // namespace aad::nn
