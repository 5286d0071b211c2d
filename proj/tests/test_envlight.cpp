// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "bakelight/envlight.hpp"
#include "testutil.hpp"

using namespace bakelight;

namespace {

// Smooth 64x32 fixture with a bright blob and a black band.
EnvironmentMap make_test_map() {
  Image3 img(64, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 64; ++x) {
      float u = (x + 0.5f) / 64.0f, v = (y + 0.5f) / 32.0f;
      float base = 0.6f + 0.4f * std::sin(2 * kPi * u) * std::sin(kPi * v);
      float blob = 2.0f * std::exp(-40.0f * ((u - 0.3f) * (u - 0.3f) + (v - 0.4f) * (v - 0.4f)));
      img.at(x, y) = Vec3(base + blob, 0.8f * base, 0.5f * base + blob);
    }
  // black band to exercise zero-pdf regions
  for (int y = 20; y < 24; ++y)
    for (int x = 40; x < 50; ++x) img.at(x, y) = Vec3(0);
  return EnvironmentMap::from_image(std::move(img));
}

// Exact solid angle of pixel (x, y): dphi * (cos(theta_top) - cos(theta_bot)).
double cell_solid_angle(int y, int h, int w) {
  double t0 = M_PI * y / h, t1 = M_PI * (y + 1) / h;
  return (2.0 * M_PI / w) * (std::cos(t0) - std::cos(t1));
}

}  // namespace

TEST_CASE("direction to uv convention") {
  CHECK(dir_to_uv({0, 1, 0}).y == doctest::Approx(0.0f));
  CHECK(dir_to_uv({0, -1, 0}).y == doctest::Approx(1.0f).epsilon(1e-5));
  // equator has v = 0.5
  CHECK(dir_to_uv({1, 0, 0}).y == doctest::Approx(0.5f));
  // phi measured from -z
  CHECK(dir_to_uv({0, 0, -1}).x == doctest::Approx(0.0f));
}

TEST_CASE("uv to direction") {
  Vec3 d = uv_to_dir(0.5f, 0.5f);
  CHECK(std::fabs(d.y) < 1e-6f);
  CHECK(std::fabs(length(d) - 1) < 1e-6f);
  for (float u : {0.0f, 0.3f, 0.9f}) CHECK(length(uv_to_dir(u, 0.0f) - Vec3(0, 1, 0)) < 1e-6f);
}

TEST_CASE("uv round trip") {
  RngStream rng(41);
  for (int i = 0; i < 10000; ++i) {
    Vec3 d = testutil::random_unit_vector(rng);
    Vec2 uv = dir_to_uv(d);
    CHECK(uv.x >= 0.0f);
    CHECK(uv.x < 1.0f);
    CHECK(uv.y >= 0.0f);
    CHECK(uv.y < 1.0f);
    Vec3 back = uv_to_dir(uv.x, uv.y);
    CHECK(length(back - d) < 1e-5f);
  }
}

TEST_CASE("sample_radiance") {
  SUBCASE("constant map returns the constant") {
    auto env = EnvironmentMap::constant(16, 8, {0.25f, 0.5f, 1.0f});
    RngStream rng(43);
    for (int i = 0; i < 100; ++i) {
      Vec3 r = sample_radiance(env, testutil::random_unit_vector(rng));
      CHECK(r.x == doctest::Approx(0.25f));
      CHECK(r.z == doctest::Approx(1.0f));
    }
  }

  SUBCASE("exact pixel centers return the pixel") {
    auto env = make_test_map();
    for (auto [x, y] : {std::pair{5, 7}, std::pair{33, 20}, std::pair{60, 2}}) {
      float u = (x + 0.5f) / 64.0f, v = (y + 0.5f) / 32.0f;
      Vec3 r = sample_radiance(env, uv_to_dir(u, v));
      Vec3 expect = env.image.at(x, y);
      CHECK(r.x == doctest::Approx(expect.x).epsilon(1e-4));
      CHECK(r.y == doctest::Approx(expect.y).epsilon(1e-4));
    }
  }

  SUBCASE("horizontal ramp interpolates the midpoint") {
    // bilinear closed form: halfway between two pixel centers the value is
    // the mean of the two pixels
    Image3 img(8, 4);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 8; ++x) img.at(x, y) = Vec3(float(x));
    auto env = EnvironmentMap::from_image(std::move(img));
    float v = (1 + 0.5f) / 4.0f;
    float u = (2.0f + 1.0f) / 8.0f;  // halfway between centers of x=2 and x=3
    Vec3 r = sample_radiance(env, uv_to_dir(u, v));
    CHECK(r.x == doctest::Approx(2.5f).epsilon(1e-4));
  }

  SUBCASE("aspect is validated") {
    CHECK_THROWS(EnvironmentMap::from_image(Image3(10, 10, Vec3(1))));
  }
}

TEST_CASE("build_light_cdf") {
  SUBCASE("single hot pixel makes a step marginal") {
    Image3 img(16, 8, Vec3(0));
    img.at(10, 3) = Vec3(5, 5, 5);
    auto env = EnvironmentMap::from_image(std::move(img));
    auto cdf = build_light_cdf(env);
    for (int y = 0; y < 3; ++y) CHECK(cdf.marginal[y] == doctest::Approx(0.0f));
    for (int y = 3; y < 8; ++y) CHECK(cdf.marginal[y] == doctest::Approx(1.0f));
  }

  SUBCASE("cdf invariants on the fixture map") {
    auto env = make_test_map();
    auto cdf = build_light_cdf(env);
    CHECK(cdf.marginal.back() == doctest::Approx(1.0f).epsilon(1e-6));
    float prev = 0;
    for (float m : cdf.marginal) {
      CHECK(m >= prev - 1e-7f);
      prev = m;
    }
    for (int y = 0; y < cdf.height; ++y) {
      CHECK(cdf.conditional[size_t(y) * cdf.width + cdf.width - 1] ==
            doctest::Approx(1.0f).epsilon(1e-6));
    }
  }

  SUBCASE("black map is unsampleable") {
    CHECK_THROWS_WITH_AS(build_light_cdf(EnvironmentMap::constant(8, 4, Vec3(0))),
                         doctest::Contains("unsampleable"), std::runtime_error);
  }

  SUBCASE("constant map pdf is uniform") {
    auto env = EnvironmentMap::constant(64, 32, Vec3(1));
    auto cdf = build_light_cdf(env);
    RngStream rng(47);
    for (int i = 0; i < 100; ++i) {
      float p = pdf_light(cdf, testutil::random_unit_vector(rng));
      CHECK(std::fabs(p - 1.0f / (4 * kPi)) < 1e-3f);
    }
  }
}

TEST_CASE("pdf_light integrates to one") {
  // fine midpoint quadrature over the sphere with the exact measure
  auto env = make_test_map();
  auto cdf = build_light_cdf(env);
  const int nu = 1024, nv = 512;
  double integral = 0;
  for (int j = 0; j < nv; ++j) {
    double v = (j + 0.5) / nv;
    double sin_theta = std::sin(M_PI * v);
    double row = 0;
    for (int i = 0; i < nu; ++i) {
      double u = (i + 0.5) / nu;
      row += pdf_light(cdf, uv_to_dir(float(u), float(v)));
    }
    integral += row * sin_theta;
  }
  integral *= (2.0 * M_PI / nu) * (M_PI / nv);
  CHECK(integral == doctest::Approx(1.0).epsilon(1e-3));

  // pole direction has finite pdf; black region has zero pdf
  CHECK(std::isfinite(pdf_light(cdf, {0, 1, 0})));
  float u_black = (44.5f) / 64.0f, v_black = (21.5f) / 32.0f;
  CHECK(pdf_light(cdf, uv_to_dir(u_black, v_black)) == 0.0f);
}

TEST_CASE("sample_light") {
  SUBCASE("single hot pixel receives every sample") {
    Image3 img(16, 8, Vec3(0));
    img.at(4, 6) = Vec3(1, 2, 3);
    auto env = EnvironmentMap::from_image(std::move(img));
    auto cdf = build_light_cdf(env);
    RngStream rng(51);
    for (int i = 0; i < 10000; ++i) {
      auto s = sample_light(env, cdf, rng.next_float(), rng.next_float());
      Vec2 uv = dir_to_uv(s.dir);
      CHECK(int(uv.x * 16) == 4);
      CHECK(int(uv.y * 8) == 6);
      CHECK(s.pdf > 0);
    }
  }

  SUBCASE("sampled pdf agrees with pdf_light") {
    auto env = make_test_map();
    auto cdf = build_light_cdf(env);
    RngStream rng(53);
    for (int i = 0; i < 10000; ++i) {
      auto s = sample_light(env, cdf, rng.next_float(), rng.next_float());
      CHECK(pdf_light(cdf, s.dir) == doctest::Approx(s.pdf).epsilon(1e-6));
    }
  }

  SUBCASE("constant map sampling is uniform (chi-square)") {
    auto env = EnvironmentMap::constant(64, 32, Vec3(1));
    auto cdf = build_light_cdf(env);
    RngStream rng(57);
    const int zb = 16, pb = 16, n = 10000;
    std::vector<double> observed(zb * pb, 0.0), expected(zb * pb, double(n) / (zb * pb));
    for (int i = 0; i < n; ++i) {
      auto s = sample_light(env, cdf, rng.next_float(), rng.next_float());
      int zi = std::min(zb - 1, int((double(s.dir.y) + 1.0) * 0.5 * zb));
      double phi = std::atan2(double(s.dir.x), -double(s.dir.z));
      if (phi < 0) phi += 2 * M_PI;
      int pj = std::min(pb - 1, int(phi / (2 * M_PI) * pb));
      observed[size_t(zi) * pb + pj] += 1;
    }
    CHECK(testutil::chi2_test_pvalue(observed, expected) >= 0.01);
  }
}

TEST_CASE("light sampling estimator matches pixel-sum quadrature") {
  auto env = make_test_map();
  auto cdf = build_light_cdf(env);

  // oracle: direct pixel sum with exact per-cell solid angles
  Vec3 ref(0);
  for (int y = 0; y < env.height(); ++y) {
    float omega = float(cell_solid_angle(y, env.height(), env.width()));
    for (int x = 0; x < env.width(); ++x) ref += env.image.at(x, y) * omega;
  }

  RngStream rng(61);
  const int n = 65536;
  Vec3 est(0);
  for (int i = 0; i < n; ++i) {
    auto s = sample_light(env, cdf, rng.next_float(), rng.next_float());
    est += s.radiance / s.pdf;
  }
  est = est / float(n);
  CHECK(est.x == doctest::Approx(ref.x).epsilon(0.02));
  CHECK(est.y == doctest::Approx(ref.y).epsilon(0.02));
  CHECK(est.z == doctest::Approx(ref.z).epsilon(0.02));
}
