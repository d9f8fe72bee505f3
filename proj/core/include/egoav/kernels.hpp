#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "egoav/core.hpp"
#include "egoav/parallel.hpp"
#include "egoav/tensor.hpp"

// Forward/backward numeric kernels shared by the spec-level operations and the
// autodiff tape. Backward kernels ACCUMULATE into the provided gradient
// tensors (callers allocate them zero-filled). All backward passes are written
// in gather form wherever they are parallelized, so writes stay disjoint and
// results are bitwise independent of the worker count.

namespace egoav::detail {

// ---------------------------------------------------------------------------
// conv2d: x (N,Ci,H,W), w (Co,Ci,kh,kw), b (Co) -> y (N,Co,Ho,Wo)
// ---------------------------------------------------------------------------
template <typename T>
Tensor<T> conv2d_fwd(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride,
                     int pad) {
  const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != ci) throw std::invalid_argument("conv2d: channel mismatch");
  const int ho = (h + 2 * pad - kh) / stride + 1;
  const int wo = (wd + 2 * pad - kw) / stride + 1;
  if (ho <= 0 || wo <= 0) throw std::invalid_argument("conv2d: empty output");
  Tensor<T> y({n, co, ho, wo});
  parallel_for(n * co, [&](int idx) {
    const int ni = idx / co, c = idx % co;
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        T acc = b[c];
        const int iy0 = oy * stride - pad, ix0 = ox * stride - pad;
        for (int ic = 0; ic < ci; ++ic) {
          for (int ky = 0; ky < kh; ++ky) {
            const int iy = iy0 + ky;
            if (iy < 0 || iy >= h) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ix = ix0 + kx;
              if (ix < 0 || ix >= wd) continue;
              acc += x.at(ni, ic, iy, ix) * w.at(c, ic, ky, kx);
            }
          }
        }
        y.at(ni, c, oy, ox) = acc;
      }
    }
  });
  return y;
}

template <typename T>
void conv2d_bwd(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gy, int stride, int pad,
                Tensor<T>* gx, Tensor<T>* gw, Tensor<T>* gb) {
  const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int ho = gy.dim(2), wo = gy.dim(3);
  if (gx) {
    parallel_for(n * ci, [&](int idx) {
      const int ni = idx / ci, ic = idx % ci;
      for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < wd; ++ix) {
          T acc = T(0);
          for (int c = 0; c < co; ++c) {
            for (int ky = 0; ky < kh; ++ky) {
              const int ty = iy + pad - ky;
              if (ty < 0 || ty % stride != 0) continue;
              const int oy = ty / stride;
              if (oy >= ho) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int tx = ix + pad - kx;
                if (tx < 0 || tx % stride != 0) continue;
                const int ox = tx / stride;
                if (ox >= wo) continue;
                acc += gy.at(ni, c, oy, ox) * w.at(c, ic, ky, kx);
              }
            }
          }
          gx->at(ni, ic, iy, ix) += acc;
        }
      }
    });
  }
  if (gw) {
    parallel_for(co, [&](int c) {
      for (int ic = 0; ic < ci; ++ic) {
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            T acc = T(0);
            for (int ni = 0; ni < n; ++ni) {
              for (int oy = 0; oy < ho; ++oy) {
                const int iy = oy * stride - pad + ky;
                if (iy < 0 || iy >= h) continue;
                for (int ox = 0; ox < wo; ++ox) {
                  const int ix = ox * stride - pad + kx;
                  if (ix < 0 || ix >= wd) continue;
                  acc += gy.at(ni, c, oy, ox) * x.at(ni, ic, iy, ix);
                }
              }
            }
            gw->at(c, ic, ky, kx) += acc;
          }
        }
      }
    });
  }
  if (gb) {
    for (int c = 0; c < co; ++c) {
      T acc = T(0);
      for (int ni = 0; ni < n; ++ni)
        for (int oy = 0; oy < ho; ++oy)
          for (int ox = 0; ox < wo; ++ox) acc += gy.at(ni, c, oy, ox);
      (*gb)[static_cast<std::size_t>(c)] += acc;
    }
  }
}

// ---------------------------------------------------------------------------
// conv_transpose2d: x (N,Ci,H,W), w (Ci,Co,kh,kw), b (Co)
//   -> y (N,Co,(H-1)*stride-2*pad+kh, ...)
// ---------------------------------------------------------------------------
template <typename T>
Tensor<T> conv_transpose2d_fwd(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                               int stride, int pad) {
  const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  if (w.dim(0) != ci) throw std::invalid_argument("conv_transpose2d: channel mismatch");
  const int co = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const int ho = (h - 1) * stride - 2 * pad + kh;
  const int wo = (wd - 1) * stride - 2 * pad + kw;
  if (ho <= 0 || wo <= 0) throw std::invalid_argument("conv_transpose2d: empty output");
  Tensor<T> y({n, co, ho, wo});
  parallel_for(n * co, [&](int idx) {
    const int ni = idx / co, c = idx % co;
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox) {
        T acc = b[c];
        for (int ky = 0; ky < kh; ++ky) {
          const int ty = oy + pad - ky;
          if (ty < 0 || ty % stride != 0) continue;
          const int iy = ty / stride;
          if (iy >= h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int tx = ox + pad - kx;
            if (tx < 0 || tx % stride != 0) continue;
            const int ix = tx / stride;
            if (ix >= wd) continue;
            for (int ic = 0; ic < ci; ++ic)
              acc += x.at(ni, ic, iy, ix) * w.at(ic, c, ky, kx);
          }
        }
        y.at(ni, c, oy, ox) = acc;
      }
    }
  });
  return y;
}

template <typename T>
void conv_transpose2d_bwd(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& gy, int stride,
                          int pad, Tensor<T>* gx, Tensor<T>* gw, Tensor<T>* gb) {
  const int n = x.dim(0), ci = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const int co = w.dim(1), kh = w.dim(2), kw = w.dim(3);
  const int ho = gy.dim(2), wo = gy.dim(3);
  if (gx) {
    parallel_for(n * ci, [&](int idx) {
      const int ni = idx / ci, ic = idx % ci;
      for (int iy = 0; iy < h; ++iy) {
        for (int ix = 0; ix < wd; ++ix) {
          T acc = T(0);
          for (int ky = 0; ky < kh; ++ky) {
            const int oy = iy * stride - pad + ky;
            if (oy < 0 || oy >= ho) continue;
            for (int kx = 0; kx < kw; ++kx) {
              const int ox = ix * stride - pad + kx;
              if (ox < 0 || ox >= wo) continue;
              for (int c = 0; c < co; ++c)
                acc += gy.at(ni, c, oy, ox) * w.at(ic, c, ky, kx);
            }
          }
          gx->at(ni, ic, iy, ix) += acc;
        }
      }
    });
  }
  if (gw) {
    parallel_for(ci, [&](int ic) {
      for (int c = 0; c < co; ++c) {
        for (int ky = 0; ky < kh; ++ky) {
          for (int kx = 0; kx < kw; ++kx) {
            T acc = T(0);
            for (int ni = 0; ni < n; ++ni) {
              for (int iy = 0; iy < h; ++iy) {
                const int oy = iy * stride - pad + ky;
                if (oy < 0 || oy >= ho) continue;
                for (int ix = 0; ix < wd; ++ix) {
                  const int ox = ix * stride - pad + kx;
                  if (ox < 0 || ox >= wo) continue;
                  acc += x.at(ni, ic, iy, ix) * gy.at(ni, c, oy, ox);
                }
              }
            }
            gw->at(ic, c, ky, kx) += acc;
          }
        }
      }
    });
  }
  if (gb) {
    for (int c = 0; c < co; ++c) {
      T acc = T(0);
      for (int ni = 0; ni < n; ++ni)
        for (int oy = 0; oy < ho; ++oy)
          for (int ox = 0; ox < wo; ++ox) acc += gy.at(ni, c, oy, ox);
      (*gb)[static_cast<std::size_t>(c)] += acc;
    }
  }
}

// ---------------------------------------------------------------------------
// Batch normalization over (N,H,W) per channel.
// ---------------------------------------------------------------------------
template <typename T>
struct BatchNormCache {
  std::vector<T> mean;     // per channel
  std::vector<T> inv_std;  // 1/sqrt(var + eps)
};

template <typename T>
Tensor<T> batchnorm_fwd(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                        bool training, Tensor<T>* running_mean, Tensor<T>* running_var,
                        T momentum, T eps, BatchNormCache<T>* cache) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const T m = static_cast<T>(n) * h * w;
  Tensor<T> y(x.shape());
  cache->mean.assign(static_cast<std::size_t>(c), T(0));
  cache->inv_std.assign(static_cast<std::size_t>(c), T(0));
  for (int ch = 0; ch < c; ++ch) {
    T mu, iv;
    if (training) {
      T s = T(0);
      for (int ni = 0; ni < n; ++ni)
        for (int y0 = 0; y0 < h; ++y0)
          for (int x0 = 0; x0 < w; ++x0) s += x.at(ni, ch, y0, x0);
      mu = s / m;
      T var = T(0);
      for (int ni = 0; ni < n; ++ni)
        for (int y0 = 0; y0 < h; ++y0)
          for (int x0 = 0; x0 < w; ++x0) {
            const T d = x.at(ni, ch, y0, x0) - mu;
            var += d * d;
          }
      var /= m;
      iv = T(1) / std::sqrt(var + eps);
      if (running_mean && running_var) {
        (*running_mean)[ch] = (T(1) - momentum) * (*running_mean)[ch] + momentum * mu;
        (*running_var)[ch] = (T(1) - momentum) * (*running_var)[ch] + momentum * var;
      }
    } else {
      mu = (*running_mean)[ch];
      iv = T(1) / std::sqrt((*running_var)[ch] + eps);
    }
    cache->mean[ch] = mu;
    cache->inv_std[ch] = iv;
    const T g = gamma[ch], b = beta[ch];
    for (int ni = 0; ni < n; ++ni)
      for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0)
          y.at(ni, ch, y0, x0) = g * (x.at(ni, ch, y0, x0) - mu) * iv + b;
  }
  return y;
}

template <typename T>
void batchnorm_bwd(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& gy, bool training,
                   const BatchNormCache<T>& cache, Tensor<T>* gx, Tensor<T>* ggamma,
                   Tensor<T>* gbeta) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const T m = static_cast<T>(n) * h * w;
  for (int ch = 0; ch < c; ++ch) {
    const T mu = cache.mean[ch], iv = cache.inv_std[ch], g = gamma[ch];
    T sum_gy = T(0), sum_gy_xhat = T(0);
    for (int ni = 0; ni < n; ++ni)
      for (int y0 = 0; y0 < h; ++y0)
        for (int x0 = 0; x0 < w; ++x0) {
          const T gyv = gy.at(ni, ch, y0, x0);
          sum_gy += gyv;
          sum_gy_xhat += gyv * (x.at(ni, ch, y0, x0) - mu) * iv;
        }
    if (gbeta) (*gbeta)[ch] += sum_gy;
    if (ggamma) (*ggamma)[ch] += sum_gy_xhat;
    if (gx) {
      if (training) {
        for (int ni = 0; ni < n; ++ni)
          for (int y0 = 0; y0 < h; ++y0)
            for (int x0 = 0; x0 < w; ++x0) {
              const T xhat = (x.at(ni, ch, y0, x0) - mu) * iv;
              gx->at(ni, ch, y0, x0) +=
                  g * iv * (gy.at(ni, ch, y0, x0) - sum_gy / m - xhat * sum_gy_xhat / m);
            }
      } else {
        for (int ni = 0; ni < n; ++ni)
          for (int y0 = 0; y0 < h; ++y0)
            for (int x0 = 0; x0 < w; ++x0) gx->at(ni, ch, y0, x0) += g * iv * gy.at(ni, ch, y0, x0);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Reductions over feature grids
// ---------------------------------------------------------------------------

// (c,h,w) -> (c) spatial mean.
template <typename T>
Tensor<T> spatial_mean_fwd(const Tensor<T>& g) {
  const int c = g.dim(0), h = g.dim(1), w = g.dim(2);
  Tensor<T> out({c});
  for (int ch = 0; ch < c; ++ch) {
    T s = T(0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) s += g.at(ch, y, x);
    out[ch] = s / (static_cast<T>(h) * w);
  }
  return out;
}

// (c,h,w) -> (c) max over the spatial axes; records flat argmax per channel.
template <typename T>
Tensor<T> max_hw_fwd(const Tensor<T>& g, std::vector<int>* argmax) {
  const int c = g.dim(0), h = g.dim(1), w = g.dim(2);
  Tensor<T> out({c});
  argmax->assign(static_cast<std::size_t>(c), 0);
  for (int ch = 0; ch < c; ++ch) {
    T best = g.at(ch, 0, 0);
    int best_i = 0;
    for (int i = 1; i < h * w; ++i) {
      const T v = g[static_cast<std::size_t>(ch) * h * w + i];
      if (v > best) {
        best = v;
        best_i = i;
      }
    }
    out[ch] = best;
    (*argmax)[ch] = best_i;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Audio-visual attention pieces
// ---------------------------------------------------------------------------

// Cosine similarity between each spatial feature vector of v (c,h,w) and g (c).
// Denominators are stabilized with +eps so zero vectors map to similarity 0.
template <typename T>
Tensor<T> cosine_map_fwd(const Tensor<T>& v, const Tensor<T>& g, T eps) {
  const int c = v.dim(0), h = v.dim(1), w = v.dim(2);
  if (g.dim(0) != c) throw std::invalid_argument("cosine_map: channel mismatch");
  T ng = T(0);
  for (int ch = 0; ch < c; ++ch) ng += g[ch] * g[ch];
  ng = std::sqrt(ng);
  Tensor<T> s({h, w});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      T dot = T(0), nv = T(0);
      for (int ch = 0; ch < c; ++ch) {
        const T a = v.at(ch, y, x);
        dot += a * g[ch];
        nv += a * a;
      }
      nv = std::sqrt(nv);
      s.at(y, x) = dot / ((nv + eps) * (ng + eps));
    }
  }
  return s;
}

template <typename T>
void cosine_map_bwd(const Tensor<T>& v, const Tensor<T>& g, T eps, const Tensor<T>& s,
                    const Tensor<T>& gs, Tensor<T>* gv, Tensor<T>* gg) {
  const int c = v.dim(0), h = v.dim(1), w = v.dim(2);
  T ng = T(0);
  for (int ch = 0; ch < c; ++ch) ng += g[ch] * g[ch];
  ng = std::sqrt(ng);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const T go = gs.at(y, x);
      if (go == T(0)) continue;
      T nv = T(0);
      for (int ch = 0; ch < c; ++ch) {
        const T a = v.at(ch, y, x);
        nv += a * a;
      }
      nv = std::sqrt(nv);
      const T denom = (nv + eps) * (ng + eps);
      const T sv = s.at(y, x);
      for (int ch = 0; ch < c; ++ch) {
        const T a = v.at(ch, y, x);
        if (gv) {
          T d = g[ch] / denom;
          if (nv > T(1e-30)) d -= sv * a / (nv * (nv + eps));
          gv->at(ch, y, x) += go * d;
        }
        if (gg) {
          T d = a / denom;
          if (ng > T(1e-30)) d -= sv * g[ch] / (ng * (ng + eps));
          (*gg)[ch] += go * d;
        }
      }
    }
  }
}

// Softmax over all cells of a 2-D map.
template <typename T>
Tensor<T> softmax_flat_fwd(const Tensor<T>& s) {
  Tensor<T> out(s.shape());
  const T mx = s.max();
  T z = T(0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = std::exp(s[i] - mx);
    z += out[i];
  }
  for (std::size_t i = 0; i < s.size(); ++i) out[i] /= z;
  return out;
}

template <typename T>
void softmax_flat_bwd(const Tensor<T>& y, const Tensor<T>& gy, Tensor<T>* gs) {
  T dot = T(0);
  for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * gy[i];
  for (std::size_t i = 0; i < y.size(); ++i) (*gs)[i] += y[i] * (gy[i] - dot);
}

// out(:,y,x) = weights(y,x) * v(:,y,x)
template <typename T>
Tensor<T> scale_cells_fwd(const Tensor<T>& v, const Tensor<T>& weights) {
  const int c = v.dim(0), h = v.dim(1), w = v.dim(2);
  Tensor<T> out(v.shape());
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(ch, y, x) = v.at(ch, y, x) * weights.at(y, x);
  return out;
}

template <typename T>
void scale_cells_bwd(const Tensor<T>& v, const Tensor<T>& weights, const Tensor<T>& gy,
                     Tensor<T>* gv, Tensor<T>* gw) {
  const int c = v.dim(0), h = v.dim(1), w = v.dim(2);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      T acc = T(0);
      for (int ch = 0; ch < c; ++ch) {
        if (gv) gv->at(ch, y, x) += gy.at(ch, y, x) * weights.at(y, x);
        acc += gy.at(ch, y, x) * v.at(ch, y, x);
      }
      if (gw) gw->at(y, x) += acc;
    }
}

// ---------------------------------------------------------------------------
// Bilinear warp of a feature grid by a fixed projective map.
// `map` sends OUTPUT cell-center coordinates (x,y) to source coordinates.
// Out-of-range taps contribute zero (zero fill outside the grid).
// ---------------------------------------------------------------------------
template <typename T>
Tensor<T> warp_bilinear_fwd(const Tensor<T>& v, const Mat3& map) {
  const int c = v.dim(0), h = v.dim(1), w = v.dim(2);
  Tensor<T> out(v.shape());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto src = map.apply(static_cast<double>(x), static_cast<double>(y));
      const double sx = src[0], sy = src[1];
      if (!(std::isfinite(sx) && std::isfinite(sy))) continue;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0, fy = sy - y0;
      const double w00 = (1 - fy) * (1 - fx), w01 = (1 - fy) * fx;
      const double w10 = fy * (1 - fx), w11 = fy * fx;
      for (int ch = 0; ch < c; ++ch) {
        double acc = 0;
        if (y0 >= 0 && y0 < h) {
          if (x0 >= 0 && x0 < w) acc += w00 * v.at(ch, y0, x0);
          if (x0 + 1 >= 0 && x0 + 1 < w) acc += w01 * v.at(ch, y0, x0 + 1);
        }
        if (y0 + 1 >= 0 && y0 + 1 < h) {
          if (x0 >= 0 && x0 < w) acc += w10 * v.at(ch, y0 + 1, x0);
          if (x0 + 1 >= 0 && x0 + 1 < w) acc += w11 * v.at(ch, y0 + 1, x0 + 1);
        }
        out.at(ch, y, x) = static_cast<T>(acc);
      }
    }
  }
  return out;
}

template <typename T>
void warp_bilinear_bwd(const Tensor<T>& v, const Mat3& map, const Tensor<T>& gy, Tensor<T>* gv) {
  const int c = v.dim(0), h = v.dim(1), w = v.dim(2);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto src = map.apply(static_cast<double>(x), static_cast<double>(y));
      const double sx = src[0], sy = src[1];
      if (!(std::isfinite(sx) && std::isfinite(sy))) continue;
      const int x0 = static_cast<int>(std::floor(sx));
      const int y0 = static_cast<int>(std::floor(sy));
      const double fx = sx - x0, fy = sy - y0;
      const double w00 = (1 - fy) * (1 - fx), w01 = (1 - fy) * fx;
      const double w10 = fy * (1 - fx), w11 = fy * fx;
      for (int ch = 0; ch < c; ++ch) {
        const T g = gy.at(ch, y, x);
        if (g == T(0)) continue;
        if (y0 >= 0 && y0 < h) {
          if (x0 >= 0 && x0 < w) gv->at(ch, y0, x0) += static_cast<T>(w00) * g;
          if (x0 + 1 >= 0 && x0 + 1 < w) gv->at(ch, y0, x0 + 1) += static_cast<T>(w01) * g;
        }
        if (y0 + 1 >= 0 && y0 + 1 < h) {
          if (x0 >= 0 && x0 < w) gv->at(ch, y0 + 1, x0) += static_cast<T>(w10) * g;
          if (x0 + 1 >= 0 && x0 + 1 < w) gv->at(ch, y0 + 1, x0 + 1) += static_cast<T>(w11) * g;
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Per-location scaled dot-product attention over a temporal stack.
// query (c,h,w), stack of T grids (c,h,w); returns the attention readout
// (without the residual). Softmax weights are cached for the backward pass.
// ---------------------------------------------------------------------------
template <typename T>
Tensor<T> temporal_attention_fwd(const Tensor<T>& query, const std::vector<const Tensor<T>*>& stack,
                                 T scale, Tensor<T>* weights_out) {
  const int c = query.dim(0), h = query.dim(1), w = query.dim(2);
  const int t = static_cast<int>(stack.size());
  if (t == 0) throw std::invalid_argument("temporal_attention: empty stack");
  for (const auto* s : stack)
    if (!s->same_shape(query)) throw std::invalid_argument("temporal_attention: shape mismatch");
  Tensor<T> out(query.shape());
  *weights_out = Tensor<T>({t, h, w});
  std::vector<T> logits(static_cast<std::size_t>(t));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      T mx = -std::numeric_limits<T>::infinity();
      for (int j = 0; j < t; ++j) {
        T dot = T(0);
        for (int ch = 0; ch < c; ++ch) dot += query.at(ch, y, x) * stack[j]->at(ch, y, x);
        logits[j] = dot * scale;
        mx = std::max(mx, logits[j]);
      }
      T z = T(0);
      for (int j = 0; j < t; ++j) {
        logits[j] = std::exp(logits[j] - mx);
        z += logits[j];
      }
      for (int j = 0; j < t; ++j) weights_out->at(j, y, x) = logits[j] / z;
      for (int ch = 0; ch < c; ++ch) {
        T acc = T(0);
        for (int j = 0; j < t; ++j) acc += weights_out->at(j, y, x) * stack[j]->at(ch, y, x);
        out.at(ch, y, x) = acc;
      }
    }
  }
  return out;
}

template <typename T>
void temporal_attention_bwd(const Tensor<T>& query, const std::vector<const Tensor<T>*>& stack,
                            T scale, const Tensor<T>& weights, const Tensor<T>& gy, Tensor<T>* gq,
                            const std::vector<Tensor<T>*>& gstack) {
  const int c = query.dim(0), h = query.dim(1), w = query.dim(2);
  const int t = static_cast<int>(stack.size());
  std::vector<T> a(static_cast<std::size_t>(t)), gl(static_cast<std::size_t>(t));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // a_j = <gy, k_j>; gl_j = w_j (a_j - sum_i w_i a_i)
      T wa = T(0);
      for (int j = 0; j < t; ++j) {
        T dot = T(0);
        for (int ch = 0; ch < c; ++ch) dot += gy.at(ch, y, x) * stack[j]->at(ch, y, x);
        a[j] = dot;
        wa += weights.at(j, y, x) * dot;
      }
      for (int j = 0; j < t; ++j) gl[j] = weights.at(j, y, x) * (a[j] - wa);
      for (int ch = 0; ch < c; ++ch) {
        T gq_acc = T(0);
        const T q = query.at(ch, y, x);
        const T go = gy.at(ch, y, x);
        for (int j = 0; j < t; ++j) {
          const T k = stack[j]->at(ch, y, x);
          gq_acc += gl[j] * k;
          if (gstack[j]) gstack[j]->at(ch, y, x) += weights.at(j, y, x) * go + scale * gl[j] * q;
        }
        if (gq) gq->at(ch, y, x) += scale * gq_acc;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Soft MIL pooling across time: per cell, softmax over t of S_t(x,y) weighting
// a sum of S_t(x,y).
// ---------------------------------------------------------------------------
template <typename T>
Tensor<T> mil_pool_fwd(const std::vector<const Tensor<T>*>& maps, Tensor<T>* weights_out) {
  const int t = static_cast<int>(maps.size());
  if (t == 0) throw std::invalid_argument("mil_pool: empty input");
  const int h = maps[0]->dim(0), w = maps[0]->dim(1);
  for (const auto* m : maps)
    if (!m->same_shape(*maps[0])) throw std::invalid_argument("mil_pool: shape mismatch");
  Tensor<T> out({h, w});
  *weights_out = Tensor<T>({t, h, w});
  std::vector<T> e(static_cast<std::size_t>(t));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      T mx = -std::numeric_limits<T>::infinity();
      for (int j = 0; j < t; ++j) mx = std::max(mx, maps[j]->at(y, x));
      T z = T(0);
      for (int j = 0; j < t; ++j) {
        e[j] = std::exp(maps[j]->at(y, x) - mx);
        z += e[j];
      }
      T acc = T(0);
      for (int j = 0; j < t; ++j) {
        const T wj = e[j] / z;
        weights_out->at(j, y, x) = wj;
        acc += wj * maps[j]->at(y, x);
      }
      out.at(y, x) = acc;
    }
  }
  return out;
}

template <typename T>
void mil_pool_bwd(const std::vector<const Tensor<T>*>& maps, const Tensor<T>& weights,
                  const Tensor<T>& pooled, const Tensor<T>& gy,
                  const std::vector<Tensor<T>*>& gmaps) {
  const int t = static_cast<int>(maps.size());
  const int h = maps[0]->dim(0), w = maps[0]->dim(1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const T g = gy.at(y, x);
      if (g == T(0)) continue;
      for (int j = 0; j < t; ++j) {
        if (!gmaps[j]) continue;
        // d pooled / d S_j = w_j * (1 + S_j - pooled)
        gmaps[j]->at(y, x) += g * weights.at(j, y, x) * (T(1) + maps[j]->at(y, x) - pooled.at(y, x));
      }
    }
}

}  // namespace egoav::detail
