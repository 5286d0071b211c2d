// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "bakelight/cnn_renderer.hpp"
#include "testutil.hpp"

using namespace bakelight;
using namespace bakelight::tnn;

namespace {

DirectRendererConfig tiny_config() {
  DirectRendererConfig cfg;
  cfg.stem_channels = 8;
  cfg.trunk_depth = 2;
  cfg.sr_channels = {4, 4, 4};
  return cfg;
}

template <typename T>
void randomize_all(DirectRendererT<T>& model, RngStream& rng, double scale = 0.5) {
  AdamT<T> probe;
  model.register_params(probe);
  // reach the tensors through a throwaway optimizer registration
  (void)probe;
  auto fill = [&](TensorT<T>& t) {
    for (auto& v : t.values) v = T((2.0 * rng.next_double() - 1.0) * scale);
  };
  fill(model.stem().conv.weight());
  for (auto& l : model.trunk()) fill(l.conv.weight());
  for (size_t k = 0; k < model.config().sr_channels.size(); ++k) {
    fill(model.sr_a(k).conv.weight());
    fill(model.sr_b(k).conv.weight());
    fill(model.head(k).weight());
    fill(model.head(k).bias());
  }
}

// Test fixture: transposed-convolution upsampler (kernel 3, stride 2), the
// structure the bilinear+skip design replaces. Forward only.
template <typename T>
TensorT<T> conv_transpose_2x(const TensorT<T>& x, const TensorT<T>& w /* (c,c,3,3) */) {
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), ww = x.dim(3);
  TensorT<T> y({n, c, 2 * h, 2 * ww});
  for (int ni = 0; ni < n; ++ni)
    for (int co = 0; co < c; ++co)
      for (int oy = 0; oy < 2 * h; ++oy)
        for (int ox = 0; ox < 2 * ww; ++ox) {
          T acc = 0;
          for (int ci = 0; ci < c; ++ci)
            for (int ky = 0; ky < 3; ++ky)
              for (int kx = 0; kx < 3; ++kx) {
                int sy = oy - ky + 1, sx = ox - kx + 1;
                if (sy % 2 || sx % 2) continue;
                int iy = sy / 2, ix = sx / 2;
                if (iy < 0 || iy >= h || ix < 0 || ix >= ww) continue;
                acc += x.values[size_t(((ni * c + ci) * h + iy) * ww + ix)] *
                       w.values[size_t(((co * c + ci) * 3 + ky) * 3 + kx)];
              }
          y.values[size_t(((ni * c + co) * 2 * h + oy) * 2 * ww + ox)] = acc;
        }
  return y;
}

}  // namespace

TEST_CASE("build_raymap") {
  SUBCASE("shape and origin broadcast") {
    Camera cam;
    cam.position = {1, 2, 3};
    cam.look_at = {0, 0, 0};
    cam.width = cam.height = 128;
    Tensor map = build_raymap(cam, 8);
    REQUIRE(map.shape == std::vector<int>{1, 6, 16, 16});
    for (int i = 0; i < 256; ++i) {
      CHECK(map.values[size_t(i)] == 1.0f);
      CHECK(map.values[size_t(256 + i)] == 2.0f);
      CHECK(map.values[size_t(512 + i)] == 3.0f);
    }
  }

  SUBCASE("directions are unit and the grid center matches the view axis") {
    Camera cam;
    cam.position = {0, 0, 4};
    cam.look_at = {0, 0, 0};
    cam.width = cam.height = 24;  // odd 3x3 grid puts one ray dead center
    Tensor map = build_raymap(cam, 8);
    REQUIRE(map.shape == std::vector<int>{1, 6, 3, 3});
    for (int i = 0; i < 9; ++i) {
      Vec3 d{map.values[size_t(9 * 3 + i)], map.values[size_t(9 * 4 + i)],
             map.values[size_t(9 * 5 + i)]};
      CHECK(std::fabs(length(d) - 1.0f) < 1e-5f);
    }
    Vec3 center{map.values[size_t(9 * 3 + 4)], map.values[size_t(9 * 4 + 4)],
                map.values[size_t(9 * 5 + 4)]};
    CHECK(length(center - Vec3(0, 0, -1)) < 1e-4f);
  }

  SUBCASE("indivisible resolution is an error") {
    Camera cam;
    cam.width = 100;
    cam.height = 128;
    CHECK_THROWS_AS(build_raymap(cam, 8), std::invalid_argument);
  }
}

TEST_CASE("forward output shape and zero-head flat maps") {
  auto cfg = tiny_config();
  DirectRenderer model(cfg);
  RngStream rng(301);
  model.init(rng);  // heads zero

  Camera cam;
  cam.position = {0, 0, 4};
  cam.look_at = {0, 0, 0};
  cam.width = cam.height = 128;
  Tensor raymap = build_raymap(cam, 8);
  Tensor raw = model.forward(raymap);
  REQUIRE(raw.shape == std::vector<int>{1, 11, 128, 128});
  for (float v : raw.values) CHECK(v == 0.0f);

  GBuffer gb = map_raw_to_gbuffer(raw, cfg, cam.position);
  CHECK(gb.width == 128);
  // mapped zero logits: albedo 0.5, roughness midpoint, mask 0.5 -> background
  CHECK(gb.albedo.at(7, 9).x == doctest::Approx(0.5f));
  CHECK(gb.roughness.at(7, 9) == doctest::Approx(0.09f + 0.455f));
  CHECK(gb.mask.at(7, 9) == doctest::Approx(0.5f));
  CHECK(gb.normal.at(7, 9) == Vec3(0));
  Vec3 extent = cfg.aabb_max - cfg.aabb_min;
  float far = length(cam.position - (cfg.aabb_min + cfg.aabb_max) * 0.5f) + length(extent);
  CHECK(gb.depth.at(7, 9) == doctest::Approx(far));
}

TEST_CASE("output skip: zeroed later heads reduce to pure upsampling") {
  auto cfg = tiny_config();
  DirectRenderer model(cfg);
  RngStream rng(303);
  randomize_all(model, rng);
  model.head(1).init_zero();
  model.head(2).init_zero();

  Camera cam;
  cam.position = {0, 1, 4};
  cam.look_at = {0, 0, 0};
  cam.width = cam.height = 64;
  Tensor raymap = build_raymap(cam, 8);
  Tensor out = model.forward(raymap);

  // reference: head-1 output bilinearly upsampled twice
  DirectRenderer ref = model;
  Tensor x = ref.stem().forward(raymap);
  for (auto& l : ref.trunk()) {
    Tensor y = l.forward(x);
    for (size_t i = 0; i < x.values.size(); ++i) y.values[i] += x.values[i];
    x = std::move(y);
  }
  BilinearUpsample2xT<float> up;
  x = ref.sr_b(0).forward(ref.sr_a(0).forward(up.forward(x)));
  Tensor head1 = ref.head(0).forward(x);
  BilinearUpsample2xT<float> u1, u2;
  Tensor expect = u2.forward(u1.forward(head1));

  REQUIRE(expect.shape == out.shape);
  for (size_t i = 0; i < out.values.size(); ++i)
    CHECK(out.values[i] == doctest::Approx(expect.values[i]).epsilon(1e-6));
}

TEST_CASE("end-to-end gradients on a 2x2 raymap (float64 shadow)") {
  auto cfg = tiny_config();
  DirectRendererT<double> model(cfg);
  RngStream rng(307);
  randomize_all(model, rng);

  TensorT<double> raymap({1, 6, 2, 2});
  for (auto& v : raymap.values) v = 2.0 * rng.next_double() - 1.0;
  TensorT<double> w({1, 11, 16, 16});
  for (auto& v : w.values) v = 2.0 * rng.next_double() - 1.0;

  auto loss = [&]() {
    TensorT<double> out = model.forward(raymap);
    double s = 0;
    for (size_t i = 0; i < out.values.size(); ++i) s += out.values[i] * w.values[i];
    return s;
  };
  loss();
  AdamT<double> opt;
  model.register_params(opt);  // ensures grads exist
  TensorT<double> draymap = model.backward(w);

  const double h = 1e-3;
  for (size_t i = 0; i < raymap.values.size(); ++i) {
    double saved = raymap.values[i];
    raymap.values[i] = saved + h;
    double lp = loss();
    raymap.values[i] = saved - h;
    double lm = loss();
    raymap.values[i] = saved;
    double fd = (lp - lm) / (2 * h);
    double denom = std::max({std::fabs(fd), std::fabs(draymap.values[i]), 1e-3});
    CHECK(std::fabs(fd - draymap.values[i]) / denom < 1e-3);
  }

  // spot-check parameter gradients across the depth of the model
  auto check_param = [&](TensorT<double>& t, size_t idx) {
    double saved = t.values[idx];
    t.values[idx] = saved + h;
    double lp = loss();
    t.values[idx] = saved - h;
    double lm = loss();
    t.values[idx] = saved;
    double fd = (lp - lm) / (2 * h);
    double denom = std::max({std::fabs(fd), std::fabs(t.grad[idx]), 1e-3});
    CHECK(std::fabs(fd - t.grad[idx]) / denom < 1e-3);
  };
  check_param(model.stem().conv.weight(), 3);
  check_param(model.trunk()[1].conv.weight(), 10);
  check_param(model.trunk()[1].norm.gamma(), 2);
  check_param(model.sr_a(0).conv.weight(), 5);
  check_param(model.sr_b(2).conv.weight(), 7);
  check_param(model.head(0).weight(), 4);
  check_param(model.head(2).weight(), 9);
}

TEST_CASE("no checkerboard from the bilinear upsampler; deconv fixture fails") {
  // constant-input raymap, randomly initialized weights everywhere
  auto cfg = tiny_config();
  DirectRenderer model(cfg);
  RngStream rng(311);
  randomize_all(model, rng);
  // random affine norms too
  for (auto& g : model.stem().norm.gamma().values) g = 0.5f + rng.next_float();
  for (auto& b : model.stem().norm.beta().values) b = rng.next_float() - 0.5f;

  Tensor raymap({1, 6, 16, 16});
  for (int c = 0; c < 6; ++c)
    for (int i = 0; i < 256; ++i) raymap.values[size_t(c * 256 + i)] = 0.1f * float(c) - 0.2f;
  Tensor out = model.forward(raymap);

  // channel 0, central crop, deviation from the 3x3 neighborhood mean
  std::vector<float> ch0(out.values.begin(), out.values.begin() + 128 * 128);
  int cw = 0, chh = 0;
  auto dev = testutil::box3_deviation(ch0, 128, 128, 32, cw, chh);
  auto probe = testutil::nyquist_probe(dev, cw, chh);
  CHECK(probe.nyquist <= 2.0 * probe.max_neighbor + 1e-6);

  // transposed-convolution upsampler on the same constant features
  const int c = 4;
  TensorT<float> feat({1, c, 16, 16});
  for (int ci = 0; ci < c; ++ci)
    for (int i = 0; i < 256; ++i) feat.values[size_t(ci * 256 + i)] = 0.3f + 0.2f * float(ci);
  TensorT<float> w({c, c, 3, 3});
  for (auto& v : w.values) v = rng.next_float() - 0.5f;
  TensorT<float> up = feat;
  for (int stage = 0; stage < 3; ++stage) up = conv_transpose_2x(up, w);
  REQUIRE(up.dim(2) == 128);
  std::vector<float> dch(up.values.begin(), up.values.begin() + 128 * 128);
  auto dev2 = testutil::box3_deviation(dch, 128, 128, 32, cw, chh);
  auto probe2 = testutil::nyquist_probe(dev2, cw, chh);
  CHECK(probe2.nyquist > 2.0 * probe2.max_neighbor);
}

TEST_CASE("count_forward_cost") {
  SUBCASE("trunk-only toy model") {
    DirectRendererConfig cfg;
    cfg.in_ch = 4;
    cfg.stem_channels = 4;
    cfg.trunk_depth = 1;
    cfg.sr_channels = {};
    auto cost = count_forward_cost(cfg, 2, 2);
    CHECK(cost.trunk_macs == 64);  // 4*4*2*2
  }

  SUBCASE("halving all channels quarters the parameters") {
    DirectRendererConfig full;  // paper profile, conv-dominated
    DirectRendererConfig half = full;
    half.stem_channels /= 2;
    for (int& c : half.sr_channels) c /= 2;
    auto cf = count_forward_cost(full, 16, 16);
    auto ch = count_forward_cost(half, 16, 16);
    CHECK(double(ch.params) / double(cf.params) == doctest::Approx(0.25).epsilon(0.03));
  }

  SUBCASE("parameter count matches the checkpoint tensors") {
    auto cfg = tiny_config();
    DirectRenderer model(cfg);
    auto nt = direct_renderer_tensors(model);
    int64_t total = 0;
    for (auto& [name, t] : nt.items) total += t->numel();
    CHECK(total == count_forward_cost(cfg, 16, 16).params);
  }
}

TEST_CASE("cnn surface provider") {
  auto cfg = tiny_config();
  DirectRenderer model(cfg);
  RngStream rng(313);
  model.init(rng);
  CnnSurfaceProvider provider(model);
  Camera cam;
  cam.position = {0, 0, 4};
  cam.look_at = {0, 0, 0};
  cam.width = cam.height = 64;
  GBuffer gb = provider.surface(cam);
  CHECK(gb.width == 64);
  CHECK(gb.height == 64);
}
