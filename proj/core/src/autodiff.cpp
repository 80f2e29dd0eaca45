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

#include "aad/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <memory>
#include <sstream>

namespace aad::nn {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapMat = Eigen::Map<const RowMat<T>>;

struct ConvGeometry {
  std::size_t batch, in_ch, height, width, out_ch, kh, kw, out_h, out_w;
  int stride, pad;
  std::size_t patch() const { return in_ch * kh * kw; }
  std::size_t pixels() const { return out_h * out_w; }
};

// cols [C*kh*kw x out_h*out_w] for one image.
template <typename T>
void im2col(const T* image, const ConvGeometry& g, T* cols) {
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        T* dst = cols + ((c * g.kh + ki) * g.kw + kj) * g.pixels();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - g.pad;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - g.pad;
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.height) &&
                                ix < static_cast<std::ptrdiff_t>(g.width);
            dst[oy * g.out_w + ox] =
                inside ? image[(c * g.height + static_cast<std::size_t>(iy)) * g.width +
                               static_cast<std::size_t>(ix)]
                       : T{};
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* cols, const ConvGeometry& g, T* image) {
  for (std::size_t c = 0; c < g.in_ch; ++c) {
    for (std::size_t ki = 0; ki < g.kh; ++ki) {
      for (std::size_t kj = 0; kj < g.kw; ++kj) {
        const T* src = cols + ((c * g.kh + ki) * g.kw + kj) * g.pixels();
        for (std::size_t oy = 0; oy < g.out_h; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy * g.stride + ki) - g.pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          for (std::size_t ox = 0; ox < g.out_w; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox * g.stride + kj) - g.pad;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
            image[(c * g.height + static_cast<std::size_t>(iy)) * g.width +
                  static_cast<std::size_t>(ix)] += src[oy * g.out_w + ox];
          }
        }
      }
    }
  }
}

void require(bool ok, ErrorKind kind, const std::string& message) {
  if (!ok) throw Error(kind, message);
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? " x " : "") << shape[i];
  out << ']';
  return out.str();
}

template <typename T>
Var Tape<T>::push(Tensor<T> value, std::vector<std::size_t> parents,
                  std::function<void(Node&, std::vector<Node>&)> fn) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1, this};
}

template <typename T>
const typename Tape<T>::Node& Tape<T>::node(Var v) const {
  require(v.valid() && v.owner == this && v.id < nodes_.size(), ErrorKind::kUsage,
          "value was not recorded on this tape");
  return nodes_[v.id];
}

template <typename T>
std::vector<T>& Tape<T>::grad_of(std::vector<Node>& nodes, std::size_t id) {
  Node& n = nodes[id];
  if (n.grad.size() != n.value.size()) n.grad.assign(n.value.size(), T{});
  return n.grad;
}

template <typename T>
Var Tape<T>::input(Tensor<T> value) {
  return push(std::move(value), {}, nullptr);
}

template <typename T>
Var Tape<T>::parameter(Tensor<T>* param) {
  require(param != nullptr, ErrorKind::kUsage, "null parameter");
  Var v = push(Tensor<T>(param->shape(), std::vector<T>(param->data().begin(),
                                                        param->data().end())),
               {}, nullptr);
  nodes_[v.id].param = param;
  return v;
}

template <typename T>
Var Tape<T>::dense(Var x, Var w, std::optional<Var> b) {
  const Tensor<T>& xv = node(x).value;
  const Tensor<T>& wv = node(w).value;
  require(xv.rank() == 2 && wv.rank() == 2 && xv.dim(1) == wv.dim(0), ErrorKind::kDimension,
          "dense: input " + shape_string(xv.shape()) + " vs weight " + shape_string(wv.shape()));
  const std::size_t batch = xv.dim(0);
  const std::size_t in = wv.dim(0);
  const std::size_t out = wv.dim(1);
  if (b) {
    const Tensor<T>& bv = node(*b).value;
    require(bv.rank() == 1 && bv.dim(0) == out, ErrorKind::kDimension,
            "dense: bias " + shape_string(bv.shape()) + " for " + std::to_string(out) + " outputs");
  }

  Tensor<T> y({batch, out});
  MapMat<T> ym(y.data().data(), batch, out);
  ym.noalias() = ConstMapMat<T>(xv.data().data(), batch, in) *
                 ConstMapMat<T>(wv.data().data(), in, out);
  if (b) {
    const Tensor<T>& bv = node(*b).value;
    for (std::size_t r = 0; r < batch; ++r) {
      for (std::size_t c = 0; c < out; ++c) ym(r, c) += bv[c];
    }
  }

  std::vector<std::size_t> parents{x.id, w.id};
  if (b) parents.push_back(b->id);
  const bool has_bias = b.has_value();
  return push(std::move(y), std::move(parents),
              [batch, in, out, has_bias](Node& self, std::vector<Node>& nodes) {
                const std::size_t xi = self.parents[0];
                const std::size_t wi = self.parents[1];
                ConstMapMat<T> gy(self.grad.data(), batch, out);
                {
                  auto& gw = grad_of(nodes, wi);
                  MapMat<T>(gw.data(), in, out).noalias() +=
                      ConstMapMat<T>(nodes[xi].value.data().data(), batch, in).transpose() * gy;
                }
                if (nodes[xi].param || nodes[xi].backward) {
                  auto& gx = grad_of(nodes, xi);
                  MapMat<T>(gx.data(), batch, in).noalias() +=
                      gy * ConstMapMat<T>(nodes[wi].value.data().data(), in, out).transpose();
                }
                if (has_bias) {
                  auto& gb = grad_of(nodes, self.parents[2]);
                  for (std::size_t r = 0; r < batch; ++r) {
                    for (std::size_t c = 0; c < out; ++c) gb[c] += gy(r, c);
                  }
                }
              });
}

template <typename T>
Var Tape<T>::conv2d(Var x, Var k, int stride, int pad) {
  const Tensor<T>& xv = node(x).value;
  const Tensor<T>& kv = node(k).value;
  require(xv.rank() == 4 && kv.rank() == 4 && xv.dim(1) == kv.dim(1), ErrorKind::kDimension,
          "conv2d: input " + shape_string(xv.shape()) + " vs kernel " + shape_string(kv.shape()));
  require(stride >= 1 && pad >= 0, ErrorKind::kConfiguration, "conv2d: stride/pad");
  ConvGeometry g{};
  g.batch = xv.dim(0);
  g.in_ch = xv.dim(1);
  g.height = xv.dim(2);
  g.width = xv.dim(3);
  g.out_ch = kv.dim(0);
  g.kh = kv.dim(2);
  g.kw = kv.dim(3);
  g.stride = stride;
  g.pad = pad;
  const auto span_h = static_cast<std::ptrdiff_t>(g.height) + 2 * pad - static_cast<std::ptrdiff_t>(g.kh);
  const auto span_w = static_cast<std::ptrdiff_t>(g.width) + 2 * pad - static_cast<std::ptrdiff_t>(g.kw);
  require(span_h >= 0 && span_w >= 0, ErrorKind::kConfiguration,
          "conv2d: kernel larger than padded input " + shape_string(xv.shape()) +
              ", kernel " + std::to_string(g.kh) + ", stride " + std::to_string(stride) +
              ", pad " + std::to_string(pad));
  g.out_h = static_cast<std::size_t>(span_h / stride) + 1;
  g.out_w = static_cast<std::size_t>(span_w / stride) + 1;

  const std::size_t image = g.in_ch * g.height * g.width;
  const std::size_t out_image = g.out_ch * g.pixels();
  auto cols = std::make_shared<std::vector<T>>(g.batch * g.patch() * g.pixels());
  Tensor<T> y({g.batch, g.out_ch, g.out_h, g.out_w});
  ConstMapMat<T> km(kv.data().data(), g.out_ch, g.patch());
  for (std::size_t bi = 0; bi < g.batch; ++bi) {
    T* c = cols->data() + bi * g.patch() * g.pixels();
    im2col(xv.data().data() + bi * image, g, c);
    MapMat<T>(y.data().data() + bi * out_image, g.out_ch, g.pixels()).noalias() =
        km * ConstMapMat<T>(c, g.patch(), g.pixels());
  }

  return push(std::move(y), {x.id, k.id},
              [g, cols, image, out_image](Node& self, std::vector<Node>& nodes) {
                const std::size_t xi = self.parents[0];
                const std::size_t ki = self.parents[1];
                const bool want_x = nodes[xi].param || nodes[xi].backward;
                auto& gk = grad_of(nodes, ki);
                MapMat<T> gkm(gk.data(), g.out_ch, g.patch());
                ConstMapMat<T> km(nodes[ki].value.data().data(), g.out_ch, g.patch());
                std::vector<T> dcols(want_x ? g.patch() * g.pixels() : 0);
                std::vector<T>* gx = want_x ? &grad_of(nodes, xi) : nullptr;
                for (std::size_t bi = 0; bi < g.batch; ++bi) {
                  ConstMapMat<T> gy(self.grad.data() + bi * out_image, g.out_ch, g.pixels());
                  ConstMapMat<T> c(cols->data() + bi * g.patch() * g.pixels(), g.patch(),
                                   g.pixels());
                  gkm.noalias() += gy * c.transpose();
                  if (want_x) {
                    MapMat<T>(dcols.data(), g.patch(), g.pixels()).noalias() = km.transpose() * gy;
                    col2im_add(dcols.data(), g, gx->data() + bi * image);
                  }
                }
              });
}

template <typename T>
Var Tape<T>::leaky_relu(Var x, T slope) {
  const Tensor<T>& xv = node(x).value;
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] > T{} ? xv[i] : slope * xv[i];
  return push(std::move(y), {x.id}, [slope](Node& self, std::vector<Node>& nodes) {
    const std::size_t xi = self.parents[0];
    auto& gx = grad_of(nodes, xi);
    const Tensor<T>& xv = nodes[xi].value;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      gx[i] += xv[i] > T{} ? self.grad[i] : slope * self.grad[i];
    }
  });
}

template <typename T>
Var Tape<T>::relu(Var x) {
  return leaky_relu(x, T{});
}

template <typename T>
Var Tape<T>::flatten(Var x) {
  const Tensor<T>& xv = node(x).value;
  require(xv.rank() >= 1, ErrorKind::kDimension, "flatten: scalar input");
  const std::size_t batch = xv.dim(0);
  Tensor<T> y = xv.reshaped({batch, batch ? xv.size() / batch : 0});
  return push(std::move(y), {x.id}, [](Node& self, std::vector<Node>& nodes) {
    auto& gx = grad_of(nodes, self.parents[0]);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
  });
}

template <typename T>
Var Tape<T>::sum(Var x) {
  const Tensor<T>& xv = node(x).value;
  T total{};
  for (T v : xv.data()) total += v;
  return push(Tensor<T>({}, std::vector<T>{total}), {x.id},
              [](Node& self, std::vector<Node>& nodes) {
                auto& gx = grad_of(nodes, self.parents[0]);
                for (T& g : gx) g += self.grad[0];
              });
}

template <typename T>
Var Tape<T>::mean(Var x) {
  const std::size_t n = node(x).value.size();
  require(n > 0, ErrorKind::kEmptyInput, "mean of empty tensor");
  return scale(sum(x), T{1} / static_cast<T>(n));
}

template <typename T>
Var Tape<T>::sum_squares(Var x) {
  const Tensor<T>& xv = node(x).value;
  T total{};
  for (T v : xv.data()) total += v * v;
  return push(Tensor<T>({}, std::vector<T>{total}), {x.id},
              [](Node& self, std::vector<Node>& nodes) {
                const std::size_t xi = self.parents[0];
                auto& gx = grad_of(nodes, xi);
                const Tensor<T>& xv = nodes[xi].value;
                for (std::size_t i = 0; i < xv.size(); ++i) gx[i] += T{2} * xv[i] * self.grad[0];
              });
}

template <typename T>
Var Tape<T>::row_sq_dist(Var x, std::span<const T> center) {
  const Tensor<T>& xv = node(x).value;
  require(xv.rank() == 2 && xv.dim(1) == center.size(), ErrorKind::kDimension,
          "row_sq_dist: input " + shape_string(xv.shape()) + " vs center of length " +
              std::to_string(center.size()));
  const std::size_t batch = xv.dim(0);
  const std::size_t d = xv.dim(1);
  Tensor<T> y({batch});
  for (std::size_t r = 0; r < batch; ++r) {
    T acc{};
    for (std::size_t j = 0; j < d; ++j) {
      const T diff = xv[r * d + j] - center[j];
      acc += diff * diff;
    }
    y[r] = acc;
  }
  std::vector<T> c(center.begin(), center.end());
  return push(std::move(y), {x.id},
              [c = std::move(c), batch, d](Node& self, std::vector<Node>& nodes) {
                const std::size_t xi = self.parents[0];
                auto& gx = grad_of(nodes, xi);
                const Tensor<T>& xv = nodes[xi].value;
                for (std::size_t r = 0; r < batch; ++r) {
                  for (std::size_t j = 0; j < d; ++j) {
                    gx[r * d + j] += T{2} * (xv[r * d + j] - c[j]) * self.grad[r];
                  }
                }
              });
}

template <typename T>
Var Tape<T>::row_mse(Var x, const Tensor<T>& target) {
  const Tensor<T>& xv = node(x).value;
  require(xv.rank() == 2 && target.shape() == xv.shape(), ErrorKind::kDimension,
          "row_mse: output " + shape_string(xv.shape()) + " vs target " +
              shape_string(target.shape()));
  const std::size_t batch = xv.dim(0);
  const std::size_t d = xv.dim(1);
  Tensor<T> y({batch});
  for (std::size_t r = 0; r < batch; ++r) {
    T acc{};
    for (std::size_t j = 0; j < d; ++j) {
      const T diff = xv[r * d + j] - target[r * d + j];
      acc += diff * diff;
    }
    y[r] = acc / static_cast<T>(d);
  }
  std::vector<T> t(target.data().begin(), target.data().end());
  return push(std::move(y), {x.id},
              [t = std::move(t), batch, d](Node& self, std::vector<Node>& nodes) {
                const std::size_t xi = self.parents[0];
                auto& gx = grad_of(nodes, xi);
                const Tensor<T>& xv = nodes[xi].value;
                const T k = T{2} / static_cast<T>(d);
                for (std::size_t r = 0; r < batch; ++r) {
                  for (std::size_t j = 0; j < d; ++j) {
                    gx[r * d + j] += k * (xv[r * d + j] - t[r * d + j]) * self.grad[r];
                  }
                }
              });
}

template <typename T>
Var Tape<T>::hinge(Var x, T offset) {
  const Tensor<T>& xv = node(x).value;
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = std::max(T{}, xv[i] - offset);
  return push(std::move(y), {x.id}, [offset](Node& self, std::vector<Node>& nodes) {
    const std::size_t xi = self.parents[0];
    auto& gx = grad_of(nodes, xi);
    const Tensor<T>& xv = nodes[xi].value;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      if (xv[i] - offset > T{}) gx[i] += self.grad[i];
    }
  });
}

template <typename T>
Var Tape<T>::add(Var a, Var b) {
  const Tensor<T>& av = node(a).value;
  const Tensor<T>& bv = node(b).value;
  require(av.shape() == bv.shape(), ErrorKind::kDimension,
          "add: " + shape_string(av.shape()) + " vs " + shape_string(bv.shape()));
  Tensor<T> y(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) y[i] = av[i] + bv[i];
  return push(std::move(y), {a.id, b.id}, [](Node& self, std::vector<Node>& nodes) {
    for (std::size_t p : self.parents) {
      auto& g = grad_of(nodes, p);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

template <typename T>
Var Tape<T>::scale(Var x, T factor) {
  const Tensor<T>& xv = node(x).value;
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = factor * xv[i];
  return push(std::move(y), {x.id}, [factor](Node& self, std::vector<Node>& nodes) {
    auto& gx = grad_of(nodes, self.parents[0]);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += factor * self.grad[i];
  });
}

template <typename T>
Var Tape<T>::add_scalar(Var x, T value) {
  const Tensor<T>& xv = node(x).value;
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) y[i] = xv[i] + value;
  return push(std::move(y), {x.id}, [](Node& self, std::vector<Node>& nodes) {
    auto& gx = grad_of(nodes, self.parents[0]);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
  });
}

template <typename T>
const Tensor<T>& Tape<T>::value(Var v) const {
  return node(v).value;
}

template <typename T>
T Tape<T>::scalar(Var v) const {
  const Tensor<T>& t = node(v).value;
  require(t.size() == 1, ErrorKind::kDimension, "scalar(): tensor " + shape_string(t.shape()));
  return t[0];
}

template <typename T>
void Tape<T>::backward(Var loss) {
  require(loss.valid() && loss.owner == this && loss.id < nodes_.size(), ErrorKind::kUsage,
          "backward: loss was not produced by a computation recorded on this tape");
  require(nodes_[loss.id].value.size() == 1, ErrorKind::kUsage,
          "backward: loss must be a scalar, got " + shape_string(nodes_[loss.id].value.shape()));
  for (Node& n : nodes_) n.grad.clear();
  grad_of(nodes_, loss.id)[0] = T{1};
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.grad.empty()) continue;
    if (n.backward) n.backward(n, nodes_);
    if (n.param) {
      n.param->ensure_grad();
      auto pg = n.param->grad();
      for (std::size_t j = 0; j < pg.size(); ++j) pg[j] += n.grad[j];
    }
    // Intermediate gradients are not needed once propagated.
    if (!n.param && i != loss.id) std::vector<T>().swap(n.grad);
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace aad::nn
