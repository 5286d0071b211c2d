// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bakelight/brdf.hpp"
#include "bakelight/gbuffer.hpp"
#include "bakelight/tnn/checkpoint.hpp"
#include "bakelight/tnn/layers.hpp"
#include "bakelight/tnn/optim.hpp"

namespace bakelight {

struct DirectRendererConfig {
  int in_ch = 6;                            // broadcast origin + direction
  int stem_channels = 256;
  int trunk_depth = 28;
  std::vector<int> sr_channels = {128, 64, 32};
  int head_channels = 11;                   // albedo 3, normal 3, roughness 1, coord 3, mask 1
  Vec3 aabb_min{-1, -1, -1};                // coordinate head range
  Vec3 aabb_max{1, 1, 1};

  int downsample() const { return 1 << int(sr_channels.size()); }

  // Same topology at CI-scale widths.
  static DirectRendererConfig desk_profile() {
    DirectRendererConfig c;
    c.stem_channels = 48;
    c.trunk_depth = 6;
    c.sr_channels = {24, 12, 8};
    return c;
  }
};

// Rays through the centers of a downsample-reduced pixel grid, packed as a
// 6 x h x w tensor: broadcast origin in channels 0..2, unit directions in
// 3..5.
tnn::Tensor build_raymap(const Camera& camera, int downsample = 8);

namespace tnn_model {

template <typename T>
struct CnaT {
  tnn::Conv2dT<T> conv;
  tnn::InstanceNorm2dT<T> norm;
  tnn::GeluT<T> act;

  CnaT() = default;
  CnaT(int cin, int cout, int k) : conv(cin, cout, k), norm(cout) {}

  tnn::TensorT<T> forward(const tnn::TensorT<T>& x) {
    return act.forward(norm.forward(conv.forward(x)));
  }
  tnn::TensorT<T> backward(const tnn::TensorT<T>& dy) {
    return conv.backward(norm.backward(act.backward(dy)));
  }
};

}  // namespace tnn_model

// Direct-illumination renderer: 1x1 conv-norm-act stem, a residual MLP of
// identical 1x1 conv-norm-act layers, then one super-resolution block per
// 2x upsampling stage (bilinear upsample + two 3x3 conv-norm-act). Each
// block feeds a 1x1 head whose output is bilinearly upsampled and added to
// the next block's head (StyleGAN2-style output skip). One forward pass per
// frame.
template <typename T>
class DirectRendererT {
 public:
  DirectRendererT() = default;
  explicit DirectRendererT(const DirectRendererConfig& cfg) : cfg_(cfg) {
    stem_ = tnn_model::CnaT<T>(cfg.in_ch, cfg.stem_channels, 1);
    for (int i = 0; i < cfg.trunk_depth; ++i)
      trunk_.emplace_back(cfg.stem_channels, cfg.stem_channels, 1);
    int prev = cfg.stem_channels;
    for (size_t k = 0; k < cfg.sr_channels.size(); ++k) {
      int ck = cfg.sr_channels[k];
      sr_up_.emplace_back();
      sr_a_.emplace_back(prev, ck, 3);
      sr_b_.emplace_back(ck, ck, 3);
      heads_.emplace_back(ck, cfg.head_channels, 1);
      if (k + 1 < cfg.sr_channels.size()) skip_up_.emplace_back();
      prev = ck;
    }
  }

  // Kaiming everywhere except the output heads, which start at zero so the
  // output skip begins as pure upsampling.
  void init(RngStream& rng) {
    stem_.conv.init(rng);
    for (auto& l : trunk_) l.conv.init(rng);
    for (size_t k = 0; k < sr_a_.size(); ++k) {
      sr_a_[k].conv.init(rng);
      sr_b_[k].conv.init(rng);
      heads_[k].init_zero();
    }
  }

  // Raw 11-channel output at downsample() times the input resolution.
  tnn::TensorT<T> forward(const tnn::TensorT<T>& raymap) {
    tnn::TensorT<T> x = stem_.forward(raymap);
    for (auto& l : trunk_) {
      tnn::TensorT<T> y = l.forward(x);
      for (size_t i = 0; i < x.values.size(); ++i) y.values[i] += x.values[i];
      x = std::move(y);
    }
    tnn::TensorT<T> out;
    for (size_t k = 0; k < sr_a_.size(); ++k) {
      x = sr_b_[k].forward(sr_a_[k].forward(sr_up_[k].forward(x)));
      tnn::TensorT<T> head = heads_[k].forward(x);
      if (k == 0) {
        out = std::move(head);
      } else {
        out = skip_up_[k - 1].forward(out);
        for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += head.values[i];
      }
    }
    return out;
  }

  // Backward through the skip structure; returns d(raymap).
  tnn::TensorT<T> backward(const tnn::TensorT<T>& dout) {
    tnn::TensorT<T> dskip = dout;
    tnn::TensorT<T> dx;
    for (size_t k = sr_a_.size(); k-- > 0;) {
      tnn::TensorT<T> dfeat = heads_[k].backward(dskip);
      if (k + 1 < sr_a_.size())
        for (size_t i = 0; i < dx.values.size(); ++i) dfeat.values[i] += dx.values[i];
      dx = sr_up_[k].backward(sr_a_[k].backward(sr_b_[k].backward(dfeat)));
      if (k > 0) dskip = skip_up_[k - 1].backward(dskip);
    }
    for (size_t k = trunk_.size(); k-- > 0;) {
      tnn::TensorT<T> d = trunk_[k].backward(dx);
      for (size_t i = 0; i < dx.values.size(); ++i) d.values[i] += dx.values[i];
      dx = std::move(d);
    }
    return stem_.backward(dx);
  }

  void register_params(tnn::AdamT<T>& opt) {
    auto reg_cna = [&](tnn_model::CnaT<T>& l) {
      opt.register_param(&l.conv.weight(), true);
      opt.register_param(&l.conv.bias(), false);
      opt.register_param(&l.norm.gamma(), false);
      opt.register_param(&l.norm.beta(), false);
    };
    reg_cna(stem_);
    for (auto& l : trunk_) reg_cna(l);
    for (size_t k = 0; k < sr_a_.size(); ++k) {
      reg_cna(sr_a_[k]);
      reg_cna(sr_b_[k]);
      opt.register_param(&heads_[k].weight(), true);
      opt.register_param(&heads_[k].bias(), false);
    }
  }

  const DirectRendererConfig& config() const { return cfg_; }
  tnn_model::CnaT<T>& stem() { return stem_; }
  std::vector<tnn_model::CnaT<T>>& trunk() { return trunk_; }
  tnn::Conv2dT<T>& head(size_t k) { return heads_[k]; }
  tnn_model::CnaT<T>& sr_a(size_t k) { return sr_a_[k]; }
  tnn_model::CnaT<T>& sr_b(size_t k) { return sr_b_[k]; }

 private:
  DirectRendererConfig cfg_;
  tnn_model::CnaT<T> stem_;
  std::vector<tnn_model::CnaT<T>> trunk_;
  std::vector<tnn::BilinearUpsample2xT<T>> sr_up_;
  std::vector<tnn_model::CnaT<T>> sr_a_, sr_b_;
  std::vector<tnn::Conv2dT<T>> heads_;
  std::vector<tnn::BilinearUpsample2xT<T>> skip_up_;
};

using DirectRenderer = DirectRendererT<float>;

// Raw head channels -> G-buffer maps. Background (mask <= 0.5) pixels get
// the zero normal and the primary-far depth sentinel.
GBuffer map_raw_to_gbuffer(const tnn::Tensor& raw, const DirectRendererConfig& cfg,
                           const Vec3& origin);

// Static multiply-accumulate and parameter counts for one forward pass.
struct ForwardCost {
  int64_t stem_macs = 0, trunk_macs = 0, sr_macs = 0, head_macs = 0;
  int64_t params = 0;
  int64_t total_macs() const { return stem_macs + trunk_macs + sr_macs + head_macs; }
};

ForwardCost count_forward_cost(const DirectRendererConfig& cfg, int in_h, int in_w);

tnn::NamedTensors direct_renderer_tensors(DirectRenderer& model);

class CnnSurfaceProvider : public SurfaceProvider {
 public:
  explicit CnnSurfaceProvider(DirectRenderer& model) : model_(model) {}
  GBuffer surface(const Camera& camera) const override {
    tnn::Tensor raymap = build_raymap(camera, model_.config().downsample());
    tnn::Tensor raw = model_.forward(raymap);
    return map_raw_to_gbuffer(raw, model_.config(), camera.position);
  }

 private:
  DirectRenderer& model_;  // forward caches activations, hence non-const
};

}  // namespace bakelight
