// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bakelight/tnn/tensor.hpp"

namespace bakelight::tnn {

// Layers operate on NCHW tensors (linear on N x F), cache what backward
// needs, and accumulate parameter gradients. Parallel sections always write
// disjoint outputs and reduce in index order, so results do not depend on
// the worker count.

template <typename T>
class Conv2dT {
 public:
  Conv2dT() = default;
  // kernel 1 or 3, padding "same"
  Conv2dT(int in_ch, int out_ch, int kernel)
      : in_ch_(in_ch), out_ch_(out_ch), k_(kernel),
        weight_({out_ch, in_ch, kernel, kernel}), bias_({out_ch}) {
    if (kernel != 1 && kernel != 3)
      throw std::invalid_argument("Conv2d: kernel must be 1 or 3");
  }

  void init(RngStream& rng) { kaiming_uniform(weight_, in_ch_ * k_ * k_, rng); }
  void init_zero() {
    std::fill(weight_.values.begin(), weight_.values.end(), T(0));
    std::fill(bias_.values.begin(), bias_.values.end(), T(0));
  }

  TensorT<T> forward(const TensorT<T>& x) {
    if (x.rank() != 4 || x.dim(1) != in_ch_)
      throw std::invalid_argument("Conv2d: input " + x.shape_str() + " does not match weight " +
                                  weight_.shape_str());
    input_ = x;
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    TensorT<T> y({n, out_ch_, h, w});
    const int64_t hw = int64_t(h) * w;
    const T* xd = x.data();
    T* yd = y.data();
    const T* wd = weight_.data();
#pragma omp parallel for collapse(2) schedule(static)
    for (int ni = 0; ni < n; ++ni) {
      for (int co = 0; co < out_ch_; ++co) {
        T* out = yd + (int64_t(ni) * out_ch_ + co) * hw;
        std::fill(out, out + hw, bias_.values[size_t(co)]);
        for (int ci = 0; ci < in_ch_; ++ci) {
          const T* in = xd + (int64_t(ni) * in_ch_ + ci) * hw;
          if (k_ == 1) {
            T wv = wd[int64_t(co) * in_ch_ + ci];
            for (int64_t i = 0; i < hw; ++i) out[i] += wv * in[i];
          } else {
            const T* wk = wd + (int64_t(co) * in_ch_ + ci) * 9;
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                T wv = wk[ky * 3 + kx];
                int dy = ky - 1, dx = kx - 1;
                int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
                int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
                for (int yy = y0; yy < y1; ++yy) {
                  T* orow = out + int64_t(yy) * w;
                  const T* irow = in + int64_t(yy + dy) * w + dx;
                  for (int xx = x0; xx < x1; ++xx) orow[xx] += wv * irow[xx];
                }
              }
          }
        }
      }
    }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& dy) {
    const int n = input_.dim(0), h = input_.dim(2), w = input_.dim(3);
    const int64_t hw = int64_t(h) * w;
    weight_.ensure_grad();
    bias_.ensure_grad();
    TensorT<T> dx(input_.shape);
    const T* dyd = dy.data();
    const T* xd = input_.data();
    const T* wd = weight_.data();
    T* dxd = dx.data();

    // input gradient: correlation with the flipped kernel
#pragma omp parallel for collapse(2) schedule(static)
    for (int ni = 0; ni < n; ++ni) {
      for (int ci = 0; ci < in_ch_; ++ci) {
        T* out = dxd + (int64_t(ni) * in_ch_ + ci) * hw;
        for (int co = 0; co < out_ch_; ++co) {
          const T* g = dyd + (int64_t(ni) * out_ch_ + co) * hw;
          if (k_ == 1) {
            T wv = wd[int64_t(co) * in_ch_ + ci];
            for (int64_t i = 0; i < hw; ++i) out[i] += wv * g[i];
          } else {
            const T* wk = wd + (int64_t(co) * in_ch_ + ci) * 9;
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                T wv = wk[ky * 3 + kx];
                int dy2 = 1 - ky, dx2 = 1 - kx;  // flipped
                int y0 = std::max(0, -dy2), y1 = std::min(h, h - dy2);
                int x0 = std::max(0, -dx2), x1 = std::min(w, w - dx2);
                for (int yy = y0; yy < y1; ++yy) {
                  T* orow = out + int64_t(yy) * w;
                  const T* grow = g + int64_t(yy + dy2) * w + dx2;
                  for (int xx = x0; xx < x1; ++xx) orow[xx] += wv * grow[xx];
                }
              }
          }
        }
      }
    }

    // parameter gradients, each co owned by one worker
    T* wg = weight_.grad.data();
    T* bg = bias_.grad.data();
#pragma omp parallel for schedule(static)
    for (int co = 0; co < out_ch_; ++co) {
      double bsum = 0;
      for (int ni = 0; ni < n; ++ni) {
        const T* g = dyd + (int64_t(ni) * out_ch_ + co) * hw;
        for (int64_t i = 0; i < hw; ++i) bsum += double(g[i]);
      }
      bg[co] += T(bsum);
      for (int ci = 0; ci < in_ch_; ++ci) {
        if (k_ == 1) {
          double acc = 0;
          for (int ni = 0; ni < n; ++ni) {
            const T* g = dyd + (int64_t(ni) * out_ch_ + co) * hw;
            const T* in = xd + (int64_t(ni) * in_ch_ + ci) * hw;
            for (int64_t i = 0; i < hw; ++i) acc += double(g[i]) * double(in[i]);
          }
          wg[int64_t(co) * in_ch_ + ci] += T(acc);
        } else {
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              int dy2 = ky - 1, dx2 = kx - 1;
              int y0 = std::max(0, -dy2), y1 = std::min(h, h - dy2);
              int x0 = std::max(0, -dx2), x1 = std::min(w, w - dx2);
              double acc = 0;
              for (int ni = 0; ni < n; ++ni) {
                const T* g = dyd + (int64_t(ni) * out_ch_ + co) * hw;
                const T* in = xd + (int64_t(ni) * in_ch_ + ci) * hw;
                for (int yy = y0; yy < y1; ++yy) {
                  const T* grow = g + int64_t(yy) * w;
                  const T* irow = in + int64_t(yy + dy2) * w + dx2;
                  for (int xx = x0; xx < x1; ++xx) acc += double(grow[xx]) * double(irow[xx]);
                }
              }
              wg[(int64_t(co) * in_ch_ + ci) * 9 + ky * 3 + kx] += T(acc);
            }
        }
      }
    }
    return dx;
  }

  TensorT<T>& weight() { return weight_; }
  TensorT<T>& bias() { return bias_; }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }
  int kernel() const { return k_; }

 private:
  int in_ch_ = 0, out_ch_ = 0, k_ = 1;
  TensorT<T> weight_, bias_, input_;
};

template <typename T>
class LinearT {
 public:
  LinearT() = default;
  LinearT(int in_f, int out_f)
      : in_f_(in_f), out_f_(out_f), weight_({out_f, in_f}), bias_({out_f}) {}

  void init(RngStream& rng) { kaiming_uniform(weight_, in_f_, rng); }

  TensorT<T> forward(const TensorT<T>& x) {
    if (x.rank() != 2 || x.dim(1) != in_f_)
      throw std::invalid_argument("Linear: input " + x.shape_str() + " does not match weight " +
                                  weight_.shape_str());
    input_ = x;
    const int n = x.dim(0);
    TensorT<T> y({n, out_f_});
    const T* wd = weight_.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const T* xi = x.data() + int64_t(i) * in_f_;
      T* yi = y.data() + int64_t(i) * out_f_;
      for (int o = 0; o < out_f_; ++o) {
        const T* wrow = wd + int64_t(o) * in_f_;
        T acc = bias_.values[size_t(o)];
        for (int j = 0; j < in_f_; ++j) acc += wrow[j] * xi[j];
        yi[o] = acc;
      }
    }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& dy) {
    const int n = input_.dim(0);
    weight_.ensure_grad();
    bias_.ensure_grad();
    TensorT<T> dx({n, in_f_});
    const T* wd = weight_.data();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const T* gi = dy.data() + int64_t(i) * out_f_;
      T* di = dx.data() + int64_t(i) * in_f_;
      for (int o = 0; o < out_f_; ++o) {
        const T* wrow = wd + int64_t(o) * in_f_;
        T g = gi[o];
        for (int j = 0; j < in_f_; ++j) di[j] += g * wrow[j];
      }
    }
    // transposed copies make the weight-gradient dot products contiguous
    std::vector<T> dyt(size_t(n) * out_f_), xt(size_t(n) * in_f_);
    for (int i = 0; i < n; ++i)
      for (int o = 0; o < out_f_; ++o)
        dyt[size_t(o) * n + i] = dy.values[size_t(i) * out_f_ + o];
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < in_f_; ++j)
        xt[size_t(j) * n + i] = input_.values[size_t(i) * in_f_ + j];
    T* wg = weight_.grad.data();
    T* bg = bias_.grad.data();
#pragma omp parallel for schedule(static)
    for (int o = 0; o < out_f_; ++o) {
      const T* grow = &dyt[size_t(o) * n];
      double bsum = 0;
      for (int i = 0; i < n; ++i) bsum += double(grow[i]);
      bg[o] += T(bsum);
      for (int j = 0; j < in_f_; ++j) {
        const T* xrow = &xt[size_t(j) * n];
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += double(grow[i]) * double(xrow[i]);
        wg[int64_t(o) * in_f_ + j] += T(acc);
      }
    }
    return dx;
  }

  TensorT<T>& weight() { return weight_; }
  TensorT<T>& bias() { return bias_; }
  const TensorT<T>& weight() const { return weight_; }
  const TensorT<T>& bias() const { return bias_; }
  int in_features() const { return in_f_; }
  int out_features() const { return out_f_; }

 private:
  int in_f_ = 0, out_f_ = 0;
  TensorT<T> weight_, bias_, input_;
};

// Instance normalization over the spatial dimensions of each (n, c) plane,
// biased variance, affine scale/shift. Statistics accumulate in float64.
template <typename T>
class InstanceNorm2dT {
 public:
  InstanceNorm2dT() = default;
  explicit InstanceNorm2dT(int channels, T eps = T(1e-5))
      : ch_(channels), eps_(eps), gamma_({channels}, T(1)), beta_({channels}, T(0)) {}

  TensorT<T> forward(const TensorT<T>& x) {
    if (x.rank() != 4 || x.dim(1) != ch_)
      throw std::invalid_argument("InstanceNorm: input " + x.shape_str() + " expected channels " +
                                  std::to_string(ch_));
    const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
    const int64_t hw = int64_t(h) * w;
    xhat_ = TensorT<T>(x.shape);
    invstd_.assign(size_t(n) * ch_, T(0));
    TensorT<T> y(x.shape);
#pragma omp parallel for collapse(2) schedule(static)
    for (int ni = 0; ni < n; ++ni) {
      for (int c = 0; c < ch_; ++c) {
        const T* in = x.data() + (int64_t(ni) * ch_ + c) * hw;
        T* xh = xhat_.data() + (int64_t(ni) * ch_ + c) * hw;
        T* out = y.data() + (int64_t(ni) * ch_ + c) * hw;
        double mean = 0;
        for (int64_t i = 0; i < hw; ++i) mean += double(in[i]);
        mean /= double(hw);
        double var = 0;
        for (int64_t i = 0; i < hw; ++i) {
          double d = double(in[i]) - mean;
          var += d * d;
        }
        var /= double(hw);
        T inv = T(1.0 / std::sqrt(var + double(eps_)));
        invstd_[size_t(ni) * ch_ + c] = inv;
        T g = gamma_.values[size_t(c)], b = beta_.values[size_t(c)];
        for (int64_t i = 0; i < hw; ++i) {
          xh[i] = (in[i] - T(mean)) * inv;
          out[i] = g * xh[i] + b;
        }
      }
    }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& dy) {
    const int n = xhat_.dim(0), h = xhat_.dim(2), w = xhat_.dim(3);
    const int64_t hw = int64_t(h) * w;
    gamma_.ensure_grad();
    beta_.ensure_grad();
    TensorT<T> dx(xhat_.shape);
#pragma omp parallel for collapse(2) schedule(static)
    for (int ni = 0; ni < n; ++ni) {
      for (int c = 0; c < ch_; ++c) {
        const T* g = dy.data() + (int64_t(ni) * ch_ + c) * hw;
        const T* xh = xhat_.data() + (int64_t(ni) * ch_ + c) * hw;
        T* out = dx.data() + (int64_t(ni) * ch_ + c) * hw;
        T gamma = gamma_.values[size_t(c)];
        T inv = invstd_[size_t(ni) * ch_ + c];
        double sum_g = 0, sum_gx = 0;
        for (int64_t i = 0; i < hw; ++i) {
          sum_g += double(g[i]);
          sum_gx += double(g[i]) * double(xh[i]);
        }
        T mg = T(sum_g / double(hw));
        T mgx = T(sum_gx / double(hw));
        for (int64_t i = 0; i < hw; ++i)
          out[i] = gamma * inv * (g[i] - mg - xh[i] * mgx);
      }
    }
    // affine gradients reduced serially per channel
    T* gg = gamma_.grad.data();
    T* bg = beta_.grad.data();
#pragma omp parallel for schedule(static)
    for (int c = 0; c < ch_; ++c) {
      double sg = 0, sb = 0;
      for (int ni = 0; ni < n; ++ni) {
        const T* g = dy.data() + (int64_t(ni) * ch_ + c) * hw;
        const T* xh = xhat_.data() + (int64_t(ni) * ch_ + c) * hw;
        for (int64_t i = 0; i < hw; ++i) {
          sg += double(g[i]) * double(xh[i]);
          sb += double(g[i]);
        }
      }
      gg[c] += T(sg);
      bg[c] += T(sb);
    }
    return dx;
  }

  TensorT<T>& gamma() { return gamma_; }
  TensorT<T>& beta() { return beta_; }

 private:
  int ch_ = 0;
  T eps_ = T(1e-5);
  TensorT<T> gamma_, beta_, xhat_;
  std::vector<T> invstd_;
};

// Exact-erf GELU. The float instantiation uses single-precision libm calls.
template <typename T>
class GeluT {
 public:
  TensorT<T> forward(const TensorT<T>& x) {
    input_ = x;
    TensorT<T> y(x.shape);
    const int64_t n = x.numel();
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
      T v = x.values[size_t(i)];
      y.values[size_t(i)] = T(0.5) * v * (T(1) + erf_t(v * T(M_SQRT1_2)));
    }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& dy) {
    TensorT<T> dx(input_.shape);
    const int64_t n = input_.numel();
    const T inv_sqrt2pi = T(0.3989422804014327);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
      T v = input_.values[size_t(i)];
      T cdf = T(0.5) * (T(1) + erf_t(v * T(M_SQRT1_2)));
      T pdf = inv_sqrt2pi * exp_t(T(-0.5) * v * v);
      dx.values[size_t(i)] = dy.values[size_t(i)] * (cdf + v * pdf);
    }
    return dx;
  }

 private:
  // overload resolution keeps float tensors on the single-precision libm path
  static T erf_t(T v) { return std::erf(v); }
  static T exp_t(T v) { return std::exp(v); }

  TensorT<T> input_;
};

template <typename T>
class SigmoidT {
 public:
  TensorT<T> forward(const TensorT<T>& x) {
    output_ = TensorT<T>(x.shape);
    const int64_t n = x.numel();
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i)
      output_.values[size_t(i)] = T(1) / (T(1) + std::exp(-x.values[size_t(i)]));
    return output_;
  }

  TensorT<T> backward(const TensorT<T>& dy) {
    TensorT<T> dx(output_.shape);
    const int64_t n = output_.numel();
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) {
      T s = output_.values[size_t(i)];
      dx.values[size_t(i)] = dy.values[size_t(i)] * s * (T(1) - s);
    }
    return dx;
  }

 private:
  TensorT<T> output_;
};

// Bilinear x2 upsampling, half-pixel centers (align_corners = false),
// borders clamped. Backward is the exact transpose.
template <typename T>
class BilinearUpsample2xT {
 public:
  TensorT<T> forward(const TensorT<T>& x) {
    in_shape_ = x.shape;
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    TensorT<T> y({n, c, 2 * h, 2 * w});
#pragma omp parallel for collapse(2) schedule(static)
    for (int ni = 0; ni < n; ++ni)
      for (int ci = 0; ci < c; ++ci) {
        const T* in = x.data() + (int64_t(ni) * c + ci) * h * w;
        T* out = y.data() + (int64_t(ni) * c + ci) * 4 * h * w;
        for (int oy = 0; oy < 2 * h; ++oy) {
          auto [y0, y1, wy] = taps(oy, h);
          for (int ox = 0; ox < 2 * w; ++ox) {
            auto [x0, x1, wx] = taps(ox, w);
            out[int64_t(oy) * 2 * w + ox] =
                (T(1) - wy) * ((T(1) - wx) * in[int64_t(y0) * w + x0] + wx * in[int64_t(y0) * w + x1]) +
                wy * ((T(1) - wx) * in[int64_t(y1) * w + x0] + wx * in[int64_t(y1) * w + x1]);
          }
        }
      }
    return y;
  }

  TensorT<T> backward(const TensorT<T>& dy) {
    const int n = in_shape_[0], c = in_shape_[1], h = in_shape_[2], w = in_shape_[3];
    TensorT<T> dx(in_shape_);
#pragma omp parallel for collapse(2) schedule(static)
    for (int ni = 0; ni < n; ++ni)
      for (int ci = 0; ci < c; ++ci) {
        const T* g = dy.data() + (int64_t(ni) * c + ci) * 4 * h * w;
        T* out = dx.data() + (int64_t(ni) * c + ci) * h * w;
        for (int oy = 0; oy < 2 * h; ++oy) {
          auto [y0, y1, wy] = taps(oy, h);
          for (int ox = 0; ox < 2 * w; ++ox) {
            auto [x0, x1, wx] = taps(ox, w);
            T gv = g[int64_t(oy) * 2 * w + ox];
            out[int64_t(y0) * w + x0] += (T(1) - wy) * (T(1) - wx) * gv;
            out[int64_t(y0) * w + x1] += (T(1) - wy) * wx * gv;
            out[int64_t(y1) * w + x0] += wy * (T(1) - wx) * gv;
            out[int64_t(y1) * w + x1] += wy * wx * gv;
          }
        }
      }
    return dx;
  }

 private:
  // source taps and fractional weight for output index o along an axis of
  // input extent n: source position o/2 - 0.25
  static std::tuple<int, int, T> taps(int o, int n) {
    T pos = T(o) * T(0.5) - T(0.25);
    int lo = int(std::floor(double(pos)));
    T frac = pos - T(lo);
    int l = std::clamp(lo, 0, n - 1);
    int r = std::clamp(lo + 1, 0, n - 1);
    return {l, r, frac};
  }

  std::vector<int> in_shape_;
};

}  // namespace bakelight::tnn
