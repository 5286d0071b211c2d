// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/cnn_renderer.hpp"

namespace bakelight {

tnn::Tensor build_raymap(const Camera& camera, int downsample) {
  if (camera.width % downsample != 0 || camera.height % downsample != 0)
    throw std::invalid_argument("build_raymap: resolution not divisible by downsample factor");
  const int w = camera.width / downsample;
  const int h = camera.height / downsample;
  tnn::Tensor map({1, 6, h, w});
  const int64_t hw = int64_t(h) * w;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      // center of the downsampled pixel in full-resolution pixel units
      float px = (x + 0.5f) * float(downsample);
      float py = (y + 0.5f) * float(downsample);
      Ray ray = camera.ray_at(px, py);
      int64_t i = int64_t(y) * w + x;
      map.values[size_t(0 * hw + i)] = ray.origin.x;
      map.values[size_t(1 * hw + i)] = ray.origin.y;
      map.values[size_t(2 * hw + i)] = ray.origin.z;
      map.values[size_t(3 * hw + i)] = ray.direction.x;
      map.values[size_t(4 * hw + i)] = ray.direction.y;
      map.values[size_t(5 * hw + i)] = ray.direction.z;
    }
  return map;
}

GBuffer map_raw_to_gbuffer(const tnn::Tensor& raw, const DirectRendererConfig& cfg,
                           const Vec3& origin) {
  const int h = raw.dim(2), w = raw.dim(3);
  const int64_t hw = int64_t(h) * w;
  GBuffer gb(w, h);
  Vec3 extent = cfg.aabb_max - cfg.aabb_min;
  Vec3 center = (cfg.aabb_min + cfg.aabb_max) * 0.5f;
  float far = length(origin - center) + length(extent);
  auto ch = [&](int c, int64_t i) { return raw.values[size_t(c * hw + i)]; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int64_t i = int64_t(y) * w + x;
      gb.albedo.at(x, y) = Vec3(sigmoid(ch(0, i)), sigmoid(ch(1, i)), sigmoid(ch(2, i)));
      float m = sigmoid(ch(10, i));
      gb.mask.at(x, y) = m;
      gb.roughness.at(x, y) = map_roughness_raw(ch(6, i));
      Vec3 coord = cfg.aabb_min + Vec3(sigmoid(ch(7, i)) * extent.x, sigmoid(ch(8, i)) * extent.y,
                                       sigmoid(ch(9, i)) * extent.z);
      gb.coordinate.at(x, y) = coord;
      Vec3 n{ch(3, i), ch(4, i), ch(5, i)};
      float len = length(n);
      if (m > 0.5f && len > 1e-12f) {
        gb.normal.at(x, y) = n / len;
        gb.depth.at(x, y) = length(coord - origin);
      } else {
        gb.normal.at(x, y) = Vec3(0);
        gb.depth.at(x, y) = far;
      }
    }
  return gb;
}

ForwardCost count_forward_cost(const DirectRendererConfig& cfg, int in_h, int in_w) {
  ForwardCost cost;
  const int64_t hw = int64_t(in_h) * in_w;
  auto cna_params = [](int cin, int cout, int k) {
    return int64_t(cout) * cin * k * k + cout + 2 * cout;  // conv + bias + affine norm
  };
  cost.stem_macs = int64_t(cfg.in_ch) * cfg.stem_channels * hw;
  cost.params += cna_params(cfg.in_ch, cfg.stem_channels, 1);
  cost.trunk_macs =
      int64_t(cfg.trunk_depth) * cfg.stem_channels * cfg.stem_channels * hw;
  cost.params += int64_t(cfg.trunk_depth) * cna_params(cfg.stem_channels, cfg.stem_channels, 1);
  int prev = cfg.stem_channels;
  int64_t hw_k = hw;
  for (int ck : cfg.sr_channels) {
    hw_k *= 4;
    cost.sr_macs += 9 * int64_t(prev) * ck * hw_k + 9 * int64_t(ck) * ck * hw_k;
    cost.params += cna_params(prev, ck, 3) + cna_params(ck, ck, 3);
    cost.head_macs += int64_t(cfg.head_channels) * ck * hw_k;
    cost.params += int64_t(cfg.head_channels) * ck + cfg.head_channels;
    prev = ck;
  }
  return cost;
}

tnn::NamedTensors direct_renderer_tensors(DirectRenderer& model) {
  tnn::NamedTensors nt;
  auto add_cna = [&](const std::string& prefix, tnn_model::CnaT<float>& l) {
    nt.add(prefix + ".conv.weight", l.conv.weight());
    nt.add(prefix + ".conv.bias", l.conv.bias());
    nt.add(prefix + ".norm.gamma", l.norm.gamma());
    nt.add(prefix + ".norm.beta", l.norm.beta());
  };
  add_cna("stem", model.stem());
  for (size_t i = 0; i < model.trunk().size(); ++i)
    add_cna("trunk." + std::to_string(i), model.trunk()[i]);
  for (size_t k = 0; k < model.config().sr_channels.size(); ++k) {
    add_cna("sr." + std::to_string(k) + ".a", model.sr_a(k));
    add_cna("sr." + std::to_string(k) + ".b", model.sr_b(k));
    nt.add("head." + std::to_string(k) + ".weight", model.head(k).weight());
    nt.add("head." + std::to_string(k) + ".bias", model.head(k).bias());
  }
  return nt;
}

}  // namespace bakelight
