#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "egoav/kernels.hpp"

namespace egoav::ad {

// Reverse-mode tape over Tensor<T>. Ops append nodes in topological order;
// backward() walks the tape in reverse. One tape is built per training step
// and dropped afterwards. Templated on the scalar so tests can run the same
// graphs in double for finite-difference checks.
template <typename T>
class Tape {
 public:
  using NodeId = int;

  Tape() = default;
  Tape(const Tape&) = delete;             // backward closures capture `this`
  Tape& operator=(const Tape&) = delete;

  NodeId leaf(Tensor<T> v, bool requires_grad = false) {
    nodes_.push_back(Node{std::move(v), {}, requires_grad, nullptr});
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  const Tensor<T>& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Tensor<T>& grad(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool requires_grad(NodeId id) const {
    return nodes_[static_cast<std::size_t>(id)].requires_grad;
  }
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(root)/d(root) = 1 and accumulates gradients into every node that
  // requires them. `root` must be scalar.
  void backward(NodeId root) {
    auto& rn = nodes_[static_cast<std::size_t>(root)];
    if (rn.value.size() != 1) throw std::invalid_argument("Tape::backward: root must be scalar");
    for (auto& n : nodes_)
      if (n.requires_grad) n.grad = Tensor<T>(n.value.shape());
    if (!rn.requires_grad) return;
    rn.grad[0] = T(1);
    for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
      auto& n = nodes_[static_cast<std::size_t>(i)];
      if (n.backward && n.requires_grad) n.backward(*this);
    }
  }

  // ---- elementwise -------------------------------------------------------

  NodeId add(NodeId a, NodeId b) {
    return binary_elementwise(
        a, b, [](T x, T y) { return x + y; },
        [this, a, b](const Tensor<T>& gy) {
          accumulate(a, gy);
          accumulate(b, gy);
        });
  }

  NodeId sub(NodeId a, NodeId b) {
    return binary_elementwise(
        a, b, [](T x, T y) { return x - y; },
        [this, a, b](const Tensor<T>& gy) {
          accumulate(a, gy);
          if (requires_grad(b)) {
            Tensor<T> neg(gy.shape());
            for (std::size_t i = 0; i < gy.size(); ++i) neg[i] = -gy[i];
            accumulate(b, neg);
          }
        });
  }

  NodeId mul(NodeId a, NodeId b) {
    const Tensor<T>& va = value(a);
    const Tensor<T>& vb = value(b);
    if (!va.same_shape(vb)) throw std::invalid_argument("Tape::mul: shape mismatch");
    Tensor<T> out(va.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] * vb[i];
    return make_node(std::move(out), {a, b}, [this, a, b](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      if (t.requires_grad(a)) {
        Tensor<T> ga(gy.shape());
        for (std::size_t i = 0; i < gy.size(); ++i) ga[i] = gy[i] * t.value(b)[i];
        t.accumulate(a, ga);
      }
      if (t.requires_grad(b)) {
        Tensor<T> gb(gy.shape());
        for (std::size_t i = 0; i < gy.size(); ++i) gb[i] = gy[i] * t.value(a)[i];
        t.accumulate(b, gb);
      }
    });
  }

  NodeId div(NodeId a, NodeId b) {
    const Tensor<T>& va = value(a);
    const Tensor<T>& vb = value(b);
    if (!va.same_shape(vb)) throw std::invalid_argument("Tape::div: shape mismatch");
    Tensor<T> out(va.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = va[i] / vb[i];
    return make_node(std::move(out), {a, b}, [this, a, b](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      const Tensor<T>& xa = t.value(a);
      const Tensor<T>& xb = t.value(b);
      if (t.requires_grad(a)) {
        Tensor<T> ga(gy.shape());
        for (std::size_t i = 0; i < gy.size(); ++i) ga[i] = gy[i] / xb[i];
        t.accumulate(a, ga);
      }
      if (t.requires_grad(b)) {
        Tensor<T> gb(gy.shape());
        for (std::size_t i = 0; i < gy.size(); ++i) gb[i] = -gy[i] * xa[i] / (xb[i] * xb[i]);
        t.accumulate(b, gb);
      }
    });
  }

  // scale * x + shift
  NodeId affine(NodeId x, T scale, T shift) {
    const Tensor<T>& vx = value(x);
    Tensor<T> out(vx.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = scale * vx[i] + shift;
    return make_node(std::move(out), {x}, [this, x, scale](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      Tensor<T> gx(gy.shape());
      for (std::size_t i = 0; i < gy.size(); ++i) gx[i] = scale * gy[i];
      t.accumulate(x, gx);
    });
  }

  NodeId relu(NodeId x) {
    return unary(
        x, [](T v) { return v > T(0) ? v : T(0); },
        [](T v, T /*y*/) { return v > T(0) ? T(1) : T(0); });
  }

  NodeId leaky_relu(NodeId x, T slope) {
    return unary(
        x, [slope](T v) { return v > T(0) ? v : slope * v; },
        [slope](T v, T /*y*/) { return v > T(0) ? T(1) : slope; });
  }

  NodeId sigmoid(NodeId x) {
    return unary(
        x, [](T v) { return T(1) / (T(1) + std::exp(-v)); },
        [](T /*v*/, T y) { return y * (T(1) - y); });
  }

  NodeId softplus(NodeId x) {
    return unary(
        x,
        [](T v) {
          return v > T(0) ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
        },
        [](T v, T /*y*/) { return T(1) / (T(1) + std::exp(-v)); });
  }

  // ---- shape plumbing ----------------------------------------------------

  NodeId reshape(NodeId x, std::vector<int> shape) {
    Tensor<T> out = value(x).reshaped(shape);
    return make_node(std::move(out), {x}, [this, x](Tape& t, NodeId self) {
      t.accumulate(x, t.grad(self).reshaped(t.value(x).shape()));
    });
  }

  // Slice (N,C,H,W) -> (C,H,W) at batch index i.
  NodeId select_n(NodeId x, int i) {
    const Tensor<T>& vx = value(x);
    if (vx.rank() != 4) throw std::invalid_argument("Tape::select_n: rank-4 input required");
    const int c = vx.dim(1), h = vx.dim(2), w = vx.dim(3);
    Tensor<T> out({c, h, w});
    const std::size_t plane = static_cast<std::size_t>(c) * h * w;
    for (std::size_t k = 0; k < plane; ++k) out[k] = vx[static_cast<std::size_t>(i) * plane + k];
    return make_node(std::move(out), {x}, [this, x, i, plane](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      Tensor<T>& gx = t.grad_mut(x);
      for (std::size_t k = 0; k < plane; ++k) gx[static_cast<std::size_t>(i) * plane + k] += gy[k];
    });
  }

  // Concatenate along the channel axis: rank-3 on dim 0, rank-4 on dim 1.
  NodeId concat_channels(NodeId a, NodeId b) {
    const Tensor<T>& va = value(a);
    const Tensor<T>& vb = value(b);
    if (va.rank() != vb.rank()) throw std::invalid_argument("concat_channels: rank mismatch");
    Tensor<T> out;
    if (va.rank() == 3) {
      if (va.dim(1) != vb.dim(1) || va.dim(2) != vb.dim(2))
        throw std::invalid_argument("concat_channels: spatial mismatch");
      out = Tensor<T>({va.dim(0) + vb.dim(0), va.dim(1), va.dim(2)});
      std::size_t off = 0;
      for (std::size_t i = 0; i < va.size(); ++i) out[off + i] = va[i];
      off = va.size();
      for (std::size_t i = 0; i < vb.size(); ++i) out[off + i] = vb[i];
    } else if (va.rank() == 4) {
      if (va.dim(0) != vb.dim(0) || va.dim(2) != vb.dim(2) || va.dim(3) != vb.dim(3))
        throw std::invalid_argument("concat_channels: shape mismatch");
      const int n = va.dim(0);
      out = Tensor<T>({n, va.dim(1) + vb.dim(1), va.dim(2), va.dim(3)});
      const std::size_t pa = va.size() / n, pb = vb.size() / n;
      for (int ni = 0; ni < n; ++ni) {
        for (std::size_t i = 0; i < pa; ++i) out[ni * (pa + pb) + i] = va[ni * pa + i];
        for (std::size_t i = 0; i < pb; ++i) out[ni * (pa + pb) + pa + i] = vb[ni * pb + i];
      }
    } else {
      throw std::invalid_argument("concat_channels: rank-3 or rank-4 input required");
    }
    return make_node(std::move(out), {a, b}, [this, a, b](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      const Tensor<T>& va = t.value(a);
      const Tensor<T>& vb = t.value(b);
      if (va.rank() == 3) {
        if (t.requires_grad(a)) {
          Tensor<T>& ga = t.grad_mut(a);
          for (std::size_t i = 0; i < va.size(); ++i) ga[i] += gy[i];
        }
        if (t.requires_grad(b)) {
          Tensor<T>& gb = t.grad_mut(b);
          for (std::size_t i = 0; i < vb.size(); ++i) gb[i] += gy[va.size() + i];
        }
      } else {
        const int n = va.dim(0);
        const std::size_t pa = va.size() / n, pb = vb.size() / n;
        if (t.requires_grad(a)) {
          Tensor<T>& ga = t.grad_mut(a);
          for (int ni = 0; ni < n; ++ni)
            for (std::size_t i = 0; i < pa; ++i) ga[ni * pa + i] += gy[ni * (pa + pb) + i];
        }
        if (t.requires_grad(b)) {
          Tensor<T>& gb = t.grad_mut(b);
          for (int ni = 0; ni < n; ++ni)
            for (std::size_t i = 0; i < pb; ++i) gb[ni * pb + i] += gy[ni * (pa + pb) + pa + i];
        }
      }
    });
  }

  // (c) -> (c,h,w) broadcast.
  NodeId tile_vector(NodeId v, int h, int w) {
    const Tensor<T>& vv = value(v);
    if (vv.rank() != 1) throw std::invalid_argument("tile_vector: rank-1 input required");
    const int c = vv.dim(0);
    Tensor<T> out({c, h, w});
    for (int ch = 0; ch < c; ++ch)
      for (int i = 0; i < h * w; ++i) out[static_cast<std::size_t>(ch) * h * w + i] = vv[ch];
    return make_node(std::move(out), {v}, [this, v, h, w](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      Tensor<T>& gv = t.grad_mut(v);
      const int c = t.value(v).dim(0);
      for (int ch = 0; ch < c; ++ch) {
        T acc = T(0);
        for (int i = 0; i < h * w; ++i) acc += gy[static_cast<std::size_t>(ch) * h * w + i];
        gv[ch] += acc;
      }
    });
  }

  // ---- reductions --------------------------------------------------------

  NodeId sum_all(NodeId x) {
    Tensor<T> out({1});
    out[0] = value(x).sum();
    return make_node(std::move(out), {x}, [this, x](Tape& t, NodeId self) {
      const T g = t.grad(self)[0];
      Tensor<T>& gx = t.grad_mut(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
  }

  NodeId mean_all(NodeId x) {
    const T inv = T(1) / static_cast<T>(value(x).size());
    Tensor<T> out({1});
    out[0] = value(x).sum() * inv;
    return make_node(std::move(out), {x}, [this, x, inv](Tape& t, NodeId self) {
      const T g = t.grad(self)[0] * inv;
      Tensor<T>& gx = t.grad_mut(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
    });
  }

  NodeId spatial_mean(NodeId grid) {
    Tensor<T> out = detail::spatial_mean_fwd(value(grid));
    return make_node(std::move(out), {grid}, [this, grid](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      const Tensor<T>& vg = t.value(grid);
      const int c = vg.dim(0), hw = vg.dim(1) * vg.dim(2);
      const T inv = T(1) / static_cast<T>(hw);
      Tensor<T>& gx = t.grad_mut(grid);
      for (int ch = 0; ch < c; ++ch)
        for (int i = 0; i < hw; ++i) gx[static_cast<std::size_t>(ch) * hw + i] += gy[ch] * inv;
    });
  }

  NodeId max_hw(NodeId grid) {
    auto argmax = std::make_shared<std::vector<int>>();
    Tensor<T> out = detail::max_hw_fwd(value(grid), argmax.get());
    return make_node(std::move(out), {grid}, [this, grid, argmax](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      const Tensor<T>& vg = t.value(grid);
      const int c = vg.dim(0), hw = vg.dim(1) * vg.dim(2);
      Tensor<T>& gx = t.grad_mut(grid);
      for (int ch = 0; ch < c; ++ch)
        gx[static_cast<std::size_t>(ch) * hw + (*argmax)[ch]] += gy[ch];
    });
  }

  // Elementwise max over same-shape nodes; the first maximal entry wins.
  NodeId max_list(const std::vector<NodeId>& xs) {
    if (xs.empty()) throw std::invalid_argument("max_list: empty input");
    const Tensor<T>& v0 = value(xs[0]);
    auto winner = std::make_shared<std::vector<int>>(v0.size(), 0);
    Tensor<T> out = v0;
    for (std::size_t j = 1; j < xs.size(); ++j) {
      const Tensor<T>& vj = value(xs[j]);
      if (!vj.same_shape(v0)) throw std::invalid_argument("max_list: shape mismatch");
      for (std::size_t i = 0; i < out.size(); ++i)
        if (vj[i] > out[i]) {
          out[i] = vj[i];
          (*winner)[i] = static_cast<int>(j);
        }
    }
    return make_node(std::move(out), xs, [this, xs, winner](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      for (std::size_t i = 0; i < gy.size(); ++i) {
        const NodeId src = xs[static_cast<std::size_t>((*winner)[i])];
        if (t.requires_grad(src)) t.grad_mut(src)[i] += gy[i];
      }
    });
  }

  NodeId mean_list(const std::vector<NodeId>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean_list: empty input");
    const Tensor<T>& v0 = value(xs[0]);
    Tensor<T> out(v0.shape());
    for (NodeId x : xs) {
      const Tensor<T>& v = value(x);
      if (!v.same_shape(v0)) throw std::invalid_argument("mean_list: shape mismatch");
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += v[i];
    }
    const T inv = T(1) / static_cast<T>(xs.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= inv;
    return make_node(std::move(out), xs, [this, xs, inv](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      for (NodeId x : xs) {
        if (!t.requires_grad(x)) continue;
        Tensor<T>& gx = t.grad_mut(x);
        for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * inv;
      }
    });
  }

  // ---- network layers ----------------------------------------------------

  NodeId conv2d(NodeId x, NodeId w, NodeId b, int stride, int pad) {
    Tensor<T> out = detail::conv2d_fwd(value(x), value(w), value(b), stride, pad);
    return make_node(std::move(out), {x, w, b}, [this, x, w, b, stride, pad](Tape& t, NodeId self) {
      detail::conv2d_bwd(t.value(x), t.value(w), t.grad(self), stride, pad,
                         t.requires_grad(x) ? &t.grad_mut(x) : nullptr,
                         t.requires_grad(w) ? &t.grad_mut(w) : nullptr,
                         t.requires_grad(b) ? &t.grad_mut(b) : nullptr);
    });
  }

  NodeId conv_transpose2d(NodeId x, NodeId w, NodeId b, int stride, int pad) {
    Tensor<T> out = detail::conv_transpose2d_fwd(value(x), value(w), value(b), stride, pad);
    return make_node(std::move(out), {x, w, b}, [this, x, w, b, stride, pad](Tape& t, NodeId self) {
      detail::conv_transpose2d_bwd(t.value(x), t.value(w), t.grad(self), stride, pad,
                                   t.requires_grad(x) ? &t.grad_mut(x) : nullptr,
                                   t.requires_grad(w) ? &t.grad_mut(w) : nullptr,
                                   t.requires_grad(b) ? &t.grad_mut(b) : nullptr);
    });
  }

  // Batch normalization; running stats live outside the tape and are updated
  // in place during training forwards.
  NodeId batch_norm(NodeId x, NodeId gamma, NodeId beta, Tensor<T>* running_mean,
                    Tensor<T>* running_var, bool training, T momentum, T eps) {
    auto cache = std::make_shared<detail::BatchNormCache<T>>();
    Tensor<T> out = detail::batchnorm_fwd(value(x), value(gamma), value(beta), training,
                                          running_mean, running_var, momentum, eps, cache.get());
    return make_node(std::move(out), {x, gamma, beta},
                     [this, x, gamma, beta, training, cache](Tape& t, NodeId self) {
                       detail::batchnorm_bwd(t.value(x), t.value(gamma), t.grad(self), training,
                                             *cache, t.requires_grad(x) ? &t.grad_mut(x) : nullptr,
                                             t.requires_grad(gamma) ? &t.grad_mut(gamma) : nullptr,
                                             t.requires_grad(beta) ? &t.grad_mut(beta) : nullptr);
                     });
  }

  // ---- attention / localization ops --------------------------------------

  NodeId cosine_map(NodeId grid, NodeId vec, T eps) {
    Tensor<T> out = detail::cosine_map_fwd(value(grid), value(vec), eps);
    return make_node(std::move(out), {grid, vec}, [this, grid, vec, eps](Tape& t, NodeId self) {
      detail::cosine_map_bwd(t.value(grid), t.value(vec), eps, t.value(self), t.grad(self),
                             t.requires_grad(grid) ? &t.grad_mut(grid) : nullptr,
                             t.requires_grad(vec) ? &t.grad_mut(vec) : nullptr);
    });
  }

  NodeId softmax_flat(NodeId map) {
    Tensor<T> out = detail::softmax_flat_fwd(value(map));
    return make_node(std::move(out), {map}, [this, map](Tape& t, NodeId self) {
      detail::softmax_flat_bwd(t.value(self), t.grad(self), &t.grad_mut(map));
    });
  }

  NodeId scale_cells(NodeId grid, NodeId weights) {
    Tensor<T> out = detail::scale_cells_fwd(value(grid), value(weights));
    return make_node(std::move(out), {grid, weights}, [this, grid, weights](Tape& t, NodeId self) {
      detail::scale_cells_bwd(t.value(grid), t.value(weights), t.grad(self),
                              t.requires_grad(grid) ? &t.grad_mut(grid) : nullptr,
                              t.requires_grad(weights) ? &t.grad_mut(weights) : nullptr);
    });
  }

  // Fixed-transform bilinear warp; `map` sends output cells to source coords.
  NodeId warp_bilinear(NodeId grid, const Mat3& map) {
    Tensor<T> out = detail::warp_bilinear_fwd(value(grid), map);
    return make_node(std::move(out), {grid}, [this, grid, map](Tape& t, NodeId self) {
      detail::warp_bilinear_bwd(t.value(grid), map, t.grad(self), &t.grad_mut(grid));
    });
  }

  NodeId temporal_attention(NodeId query, const std::vector<NodeId>& stack, T scale) {
    auto weights = std::make_shared<Tensor<T>>();
    std::vector<const Tensor<T>*> vs;
    vs.reserve(stack.size());
    for (NodeId s : stack) vs.push_back(&value(s));
    Tensor<T> out = detail::temporal_attention_fwd(value(query), vs, scale, weights.get());
    std::vector<NodeId> inputs = stack;
    inputs.push_back(query);
    return make_node(std::move(out), inputs,
                     [this, query, stack, scale, weights](Tape& t, NodeId self) {
                       std::vector<const Tensor<T>*> vs2;
                       std::vector<Tensor<T>*> gs;
                       vs2.reserve(stack.size());
                       gs.reserve(stack.size());
                       for (NodeId s : stack) {
                         vs2.push_back(&t.value(s));
                         gs.push_back(t.requires_grad(s) ? &t.grad_mut(s) : nullptr);
                       }
                       detail::temporal_attention_bwd(
                           t.value(query), vs2, scale, *weights, t.grad(self),
                           t.requires_grad(query) ? &t.grad_mut(query) : nullptr, gs);
                     });
  }

  NodeId mil_pool(const std::vector<NodeId>& maps) {
    auto weights = std::make_shared<Tensor<T>>();
    std::vector<const Tensor<T>*> vs;
    vs.reserve(maps.size());
    for (NodeId m : maps) vs.push_back(&value(m));
    Tensor<T> out = detail::mil_pool_fwd(vs, weights.get());
    return make_node(std::move(out), maps, [this, maps, weights](Tape& t, NodeId self) {
      std::vector<const Tensor<T>*> vs2;
      std::vector<Tensor<T>*> gs;
      for (NodeId m : maps) {
        vs2.push_back(&t.value(m));
        gs.push_back(t.requires_grad(m) ? &t.grad_mut(m) : nullptr);
      }
      detail::mil_pool_bwd(vs2, *weights, t.value(self), t.grad(self), gs);
    });
  }

  Tensor<T>& grad_mut(NodeId id) { return nodes_[static_cast<std::size_t>(id)].grad; }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backward;
  };

  void accumulate(NodeId id, const Tensor<T>& g) {
    if (!requires_grad(id)) return;
    Tensor<T>& dst = grad_mut(id);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
  }

  template <typename Fwd, typename BwdFn>
  NodeId binary_elementwise(NodeId a, NodeId b, Fwd fwd, BwdFn bwd) {
    const Tensor<T>& va = value(a);
    const Tensor<T>& vb = value(b);
    if (!va.same_shape(vb)) throw std::invalid_argument("Tape: elementwise shape mismatch");
    Tensor<T> out(va.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(va[i], vb[i]);
    return make_node(std::move(out), {a, b},
                     [bwd](Tape& t, NodeId self) { bwd(t.grad(self)); });
  }

  template <typename Fwd, typename Deriv>
  NodeId unary(NodeId x, Fwd fwd, Deriv deriv) {
    const Tensor<T>& vx = value(x);
    Tensor<T> out(vx.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(vx[i]);
    return make_node(std::move(out), {x}, [this, x, deriv](Tape& t, NodeId self) {
      const Tensor<T>& gy = t.grad(self);
      const Tensor<T>& vx = t.value(x);
      const Tensor<T>& vy = t.value(self);
      Tensor<T>& gx = t.grad_mut(x);
      for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * deriv(vx[i], vy[i]);
    });
  }

  NodeId make_node(Tensor<T> value, const std::vector<NodeId>& inputs,
                   std::function<void(Tape&, NodeId)> bwd) {
    bool rg = false;
    for (NodeId i : inputs) rg = rg || requires_grad(i);
    Node n{std::move(value), {}, rg, nullptr};
    nodes_.push_back(std::move(n));
    const NodeId self = static_cast<NodeId>(nodes_.size() - 1);
    if (rg && bwd)
      nodes_.back().backward = [bwd, self](Tape& t) { bwd(t, self); };
    return self;
  }

  std::vector<Node> nodes_;
};

}  // namespace egoav::ad
