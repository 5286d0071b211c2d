// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>

#include "bakelight/brdf.hpp"
#include "bakelight/gbuffer.hpp"
#include "bakelight/tnn/checkpoint.hpp"
#include "bakelight/tnn/layers.hpp"
#include "bakelight/tnn/optim.hpp"

namespace bakelight {

struct HashGridConfig {
  int levels = 14;
  int table_log2 = 17;
  int feature_dim = 2;
  int n_min = 16;
  int n_max = 131072;
  int hidden = 64;
  float near = kSecondaryNear;
  float far = kSecondaryFar;
  Vec3 aabb_min{-1, -1, -1};
  Vec3 aabb_max{1, 1, 1};

  int table_size() const { return 1 << table_log2; }
  int feature_size() const { return levels * feature_dim; }

  // Smaller tables and coarser top resolution for CI-scale runs.
  static HashGridConfig desk_profile() {
    HashGridConfig c;
    c.table_log2 = 14;
    c.n_max = 1024;
    return c;
  }
};

// Count of encode queries outside the scene AABB (clamped).
uint64_t encode_clamp_warnings();
void reset_encode_clamp_warnings();

namespace detail {
inline std::atomic<uint64_t>& encode_clamp_counter() {
  static std::atomic<uint64_t> counter{0};
  return counter;
}
}  // namespace detail

// Multiresolution hash grid: per level, trilinear interpolation of 8 corner
// features; dense corner indexing when the level grid fits the table,
// spatial hashing (InstantNGP primes) otherwise. Output is the level-wise
// concatenation.
template <typename T>
class HashGridEncoderT {
 public:
  HashGridEncoderT() = default;
  explicit HashGridEncoderT(const HashGridConfig& cfg)
      : cfg_(cfg), tables_({cfg.levels, cfg.table_size(), cfg.feature_dim}) {
    resolutions_.resize(size_t(cfg.levels));
    double b = cfg.levels > 1
                   ? std::exp((std::log(double(cfg.n_max)) - std::log(double(cfg.n_min))) /
                              double(cfg.levels - 1))
                   : 1.0;
    for (int l = 0; l < cfg.levels; ++l)
      resolutions_[size_t(l)] = int(std::round(double(cfg.n_min) * std::pow(b, l)));
  }

  void init(RngStream& rng) {
    for (T& v : tables_.values) v = T((2.0 * rng.next_double() - 1.0) * 1e-4);
  }

  // Features for a batch of points (N x 3) -> (N x levels*feature_dim).
  // Interpolation weights and corner indices are cached for backward.
  tnn::TensorT<T> forward(const tnn::TensorT<T>& points) {
    const int n = points.dim(0);
    const int L = cfg_.levels, F = cfg_.feature_dim;
    tnn::TensorT<T> feat({n, L * F});
    cache_idx_.assign(size_t(n) * L * 8, 0);
    cache_w_.assign(size_t(n) * L * 8, T(0));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      Vec3 p{float(points.values[size_t(i) * 3]), float(points.values[size_t(i) * 3 + 1]),
             float(points.values[size_t(i) * 3 + 2])};
      encode_point(p, feat.data() + int64_t(i) * L * F, &cache_idx_[size_t(i) * L * 8],
                   &cache_w_[size_t(i) * L * 8]);
    }
    return feat;
  }

  // Accumulates table gradients; levels are independent, points reduce in
  // index order within each level.
  void backward(const tnn::TensorT<T>& dfeat) {
    const int n = dfeat.dim(0);
    const int L = cfg_.levels, F = cfg_.feature_dim;
    tables_.ensure_grad();
#pragma omp parallel for schedule(static)
    for (int l = 0; l < L; ++l) {
      T* tg = tables_.grad.data() + int64_t(l) * cfg_.table_size() * F;
      for (int i = 0; i < n; ++i) {
        const uint32_t* idx = &cache_idx_[(size_t(i) * L + l) * 8];
        const T* w = &cache_w_[(size_t(i) * L + l) * 8];
        const T* g = dfeat.data() + int64_t(i) * L * F + int64_t(l) * F;
        for (int c = 0; c < 8; ++c)
          for (int f = 0; f < F; ++f) tg[int64_t(idx[c]) * F + f] += w[c] * g[f];
      }
    }
  }

  // Single-point encode without touching the backward cache.
  void encode_one(const Vec3& p, T* out) const {
    encode_point(p, out, nullptr, nullptr);
  }

  tnn::TensorT<T>& tables() { return tables_; }
  const HashGridConfig& config() const { return cfg_; }
  int resolution(int level) const { return resolutions_[size_t(level)]; }

 private:
  void encode_point(Vec3 p, T* out, uint32_t* idx_cache, T* w_cache) const {
    Vec3 extent = cfg_.aabb_max - cfg_.aabb_min;
    Vec3 u{(p.x - cfg_.aabb_min.x) / extent.x, (p.y - cfg_.aabb_min.y) / extent.y,
           (p.z - cfg_.aabb_min.z) / extent.z};
    if (u.x < 0 || u.x > 1 || u.y < 0 || u.y > 1 || u.z < 0 || u.z > 1) {
      detail::encode_clamp_counter().fetch_add(1, std::memory_order_relaxed);
      u = clamp(u, 0.0f, 1.0f);
    }
    const int F = cfg_.feature_dim;
    const int tsize = cfg_.table_size();
    for (int l = 0; l < cfg_.levels; ++l) {
      const int res = resolutions_[size_t(l)];
      double sx = double(u.x) * res, sy = double(u.y) * res, sz = double(u.z) * res;
      int cx = std::min(int(sx), res - 1), cy = std::min(int(sy), res - 1),
          cz = std::min(int(sz), res - 1);
      T fx = T(sx - cx), fy = T(sy - cy), fz = T(sz - cz);
      bool dense = (int64_t(res + 1) * (res + 1) * (res + 1)) <= tsize;
      const T* table = tables_.data() + int64_t(l) * tsize * F;
      T* o = out + int64_t(l) * F;
      for (int f = 0; f < F; ++f) o[f] = T(0);
      for (int corner = 0; corner < 8; ++corner) {
        int ox = corner & 1, oy = (corner >> 1) & 1, oz = (corner >> 2) & 1;
        uint32_t idx;
        if (dense) {
          idx = uint32_t((int64_t(cz + oz) * (res + 1) + (cy + oy)) * (res + 1) + (cx + ox));
        } else {
          idx = (uint32_t(cx + ox) * 1u) ^ (uint32_t(cy + oy) * 2654435761u) ^
                (uint32_t(cz + oz) * 805459861u);
          idx &= uint32_t(tsize - 1);
        }
        T w = (ox ? fx : T(1) - fx) * (oy ? fy : T(1) - fy) * (oz ? fz : T(1) - fz);
        if (idx_cache) {
          idx_cache[corner] = idx;
          w_cache[corner] = w;
        }
        for (int f = 0; f < F; ++f) o[f] += w * table[int64_t(idx) * F + f];
      }
      if (idx_cache) {
        idx_cache += 8;
        w_cache += 8;
      }
    }
  }

  HashGridConfig cfg_;
  std::vector<int> resolutions_;
  tnn::TensorT<T> tables_;
  std::vector<uint32_t> cache_idx_;
  std::vector<T> cache_w_;
};

// Three linear layers with GELU between them; the shared shape of the BRDF
// decoder and the implicit ray tracer.
template <typename T>
class MlpT {
 public:
  MlpT() = default;
  MlpT(int in_f, int hidden, int out_f) : l1_(in_f, hidden), l2_(hidden, hidden), l3_(hidden, out_f) {}

  void init(RngStream& rng) {
    l1_.init(rng);
    l2_.init(rng);
    l3_.init(rng);
  }

  tnn::TensorT<T> forward(const tnn::TensorT<T>& x) {
    return l3_.forward(g2_.forward(l2_.forward(g1_.forward(l1_.forward(x)))));
  }

  tnn::TensorT<T> backward(const tnn::TensorT<T>& dy) {
    return l1_.backward(g1_.backward(l2_.backward(g2_.backward(l3_.backward(dy)))));
  }

  // Allocation-free single-row inference.
  void eval_one(const T* in, T* out) const {
    thread_local std::vector<T> h1, h2;
    const int hidden = l1_.out_features();
    h1.assign(size_t(hidden), T(0));
    h2.assign(size_t(hidden), T(0));
    auto dense = [](const tnn::LinearT<T>& l, const T* x, T* y) {
      const T* w = l.weight().data();
      for (int o = 0; o < l.out_features(); ++o) {
        T acc = l.bias().values[size_t(o)];
        const T* row = w + int64_t(o) * l.in_features();
        for (int j = 0; j < l.in_features(); ++j) acc += row[j] * x[j];
        y[o] = acc;
      }
    };
    auto gelu = [](T* v, int n) {
      for (int i = 0; i < n; ++i) v[i] = T(0.5) * v[i] * (T(1) + std::erf(v[i] * T(M_SQRT1_2)));
    };
    dense(l1_, in, h1.data());
    gelu(h1.data(), hidden);
    dense(l2_, h1.data(), h2.data());
    gelu(h2.data(), hidden);
    dense(l3_, h2.data(), out);
  }

  tnn::LinearT<T>& l1() { return l1_; }
  tnn::LinearT<T>& l2() { return l2_; }
  tnn::LinearT<T>& l3() { return l3_; }

 private:
  tnn::LinearT<T> l1_, l2_, l3_;
  tnn::GeluT<T> g1_, g2_;
};

// Raw network output -> depth in [near, far] (min-max normalized sigmoid).
inline float map_depth_raw(float raw, float near, float far) {
  return near + (far - near) * sigmoid(raw);
}

// The baked visibility/indirect model: encoder H, BRDF decoder B (7 outputs:
// normal 3, albedo 3, roughness 1) and implicit ray tracer I (feature plus
// direction in, visibility logit and depth pre-activation out).
template <typename T>
class HashRendererT {
 public:
  HashRendererT() = default;
  explicit HashRendererT(const HashGridConfig& cfg)
      : cfg_(cfg), encoder_(cfg), decoder_(cfg.feature_size(), cfg.hidden, 7),
        irt_(cfg.feature_size() + 3, cfg.hidden, 2) {}

  void init(RngStream& rng) {
    encoder_.init(rng);
    decoder_.init(rng);
    irt_.init(rng);
  }

  HashGridEncoderT<T>& encoder() { return encoder_; }
  const HashGridEncoderT<T>& encoder() const { return encoder_; }
  MlpT<T>& decoder() { return decoder_; }
  MlpT<T>& irt() { return irt_; }
  const HashGridConfig& config() const { return cfg_; }

  // Inference: BRDF parameters at a point. Throws on an exactly-zero raw
  // normal prediction.
  BrdfParams decode_brdf_at(const Vec3& x) const {
    std::vector<T> feat(size_t(cfg_.feature_size()));
    encoder_.encode_one(x, feat.data());
    T raw[7];
    decoder_.eval_one(feat.data(), raw);
    return map_brdf_raw(raw);
  }

  static BrdfParams map_brdf_raw(const T* raw) {
    Vec3 n{float(raw[0]), float(raw[1]), float(raw[2])};
    float len = length(n);
    if (len < 1e-12f) throw std::domain_error("decode_brdf: degenerate normal prediction");
    BrdfParams p;
    p.normal = n / len;
    p.albedo = {sigmoid(float(raw[3])), sigmoid(float(raw[4])), sigmoid(float(raw[5]))};
    p.roughness = map_roughness_raw(float(raw[6]));
    return p;
  }

  // Inference: soft visibility and clipped depth along wi from x.
  std::pair<float, float> trace_implicit_at(const Vec3& x, const Vec3& wi) const {
    std::vector<T> in(size_t(cfg_.feature_size() + 3));
    encoder_.encode_one(x, in.data());
    in[size_t(cfg_.feature_size())] = T(wi.x);
    in[size_t(cfg_.feature_size()) + 1] = T(wi.y);
    in[size_t(cfg_.feature_size()) + 2] = T(wi.z);
    T raw[2];
    irt_.eval_one(in.data(), raw);
    return {sigmoid(float(raw[0])), map_depth_raw(float(raw[1]), cfg_.near, cfg_.far)};
  }

  void register_params(tnn::AdamT<T>& opt) {
    opt.register_param(&encoder_.tables(), false);  // no decay on hash tables
    for (tnn::LinearT<T>* l : {&decoder_.l1(), &decoder_.l2(), &decoder_.l3(), &irt_.l1(),
                               &irt_.l2(), &irt_.l3()}) {
      opt.register_param(&l->weight(), true);
      opt.register_param(&l->bias(), true);
    }
  }

 private:
  HashGridConfig cfg_;
  HashGridEncoderT<T> encoder_;
  MlpT<T> decoder_;
  MlpT<T> irt_;
};

using HashRenderer = HashRendererT<float>;
using HashGridEncoder = HashGridEncoderT<float>;

inline tnn::NamedTensors mlp_tensors(const std::string& prefix, MlpT<float>& m,
                                     tnn::NamedTensors nt = {}) {
  nt.add(prefix + ".l1.weight", m.l1().weight());
  nt.add(prefix + ".l1.bias", m.l1().bias());
  nt.add(prefix + ".l2.weight", m.l2().weight());
  nt.add(prefix + ".l2.bias", m.l2().bias());
  nt.add(prefix + ".l3.weight", m.l3().weight());
  nt.add(prefix + ".l3.bias", m.l3().bias());
  return nt;
}

inline tnn::NamedTensors hash_renderer_tensors(HashRenderer& r) {
  tnn::NamedTensors nt;
  nt.add("encoder.tables", r.encoder().tables());
  nt = mlp_tensors("decoder", r.decoder(), std::move(nt));
  nt = mlp_tensors("irt", r.irt(), std::move(nt));
  return nt;
}

// x' = x + t * wi
inline Vec3 secondary_point(const Vec3& x, const Vec3& wi, float t) { return x + t * wi; }

inline uint64_t encode_clamp_warnings() { return detail::encode_clamp_counter().load(); }
inline void reset_encode_clamp_warnings() { detail::encode_clamp_counter().store(0); }

// Hard-visibility provider backed by the implicit ray tracer (threshold 0.5).
class BakedVisibilityProvider : public VisibilityProvider {
 public:
  explicit BakedVisibilityProvider(const HashRenderer& renderer) : renderer_(renderer) {}
  VisibilitySample vis_depth(const Vec3& x, const Vec3& wi) const override {
    auto [v, t] = renderer_.trace_implicit_at(x, wi);
    if (v > 0.5f) return {true, renderer_.config().far};
    return {false, t};
  }

 private:
  const HashRenderer& renderer_;
};

class BakedPointShadingProvider : public PointShadingProvider {
 public:
  explicit BakedPointShadingProvider(const HashRenderer& renderer) : renderer_(renderer) {}
  PointShading shade_params(const Vec3& x) const override {
    BrdfParams p = renderer_.decode_brdf_at(x);
    return {p.normal, p.albedo, p.roughness};
  }

 private:
  const HashRenderer& renderer_;
};

}  // namespace bakelight
