// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bakelight/image.hpp"

namespace bakelight {

// Equirectangular radiance map, y-up, phi measured from -z. Width must be
// twice the height; all values finite and non-negative.
struct EnvironmentMap {
  Image3 image;

  int width() const { return image.width; }
  int height() const { return image.height; }

  static EnvironmentMap constant(int width, int height, Vec3 value);
  static EnvironmentMap from_image(Image3 img);  // validates aspect and values
  static EnvironmentMap load(const std::string& path);  // .pfm or .hdr by extension
};

// theta = acos(d.y), phi = atan2(d.x, -d.z) wrapped to [0, 2 pi);
// u = phi / 2 pi, v = theta / pi.
Vec2 dir_to_uv(const Vec3& d);
Vec3 uv_to_dir(float u, float v);

// Bilinear lookup with horizontal wrap and vertical clamp.
Vec3 sample_radiance(const EnvironmentMap& env, const Vec3& d);

// Piecewise-constant importance table over pixels, weighted by luminance
// times sin(theta) of the pixel row (clamped at the poles).
struct LightCdf {
  int width = 0, height = 0;
  std::vector<float> marginal;         // length height, last entry 1
  std::vector<float> conditional;      // height x width, last entry of each row 1
  std::vector<float> cell_luminance;   // height x width
  double total_integral = 0;           // sum of luminance * solid-angle weights

  // Solid-angle pdf of directions falling in the given cell.
  float cell_pdf(int x, int y) const {
    return float(double(cell_luminance[size_t(y) * width + x]) / total_integral);
  }
};

struct LightSample {
  Vec3 dir;
  float pdf = 0;  // sr^-1
  Vec3 radiance;
};

// Throws "unsampleable light" for an all-black map.
LightCdf build_light_cdf(const EnvironmentMap& env);

LightSample sample_light(const EnvironmentMap& env, const LightCdf& cdf, float u1, float u2);

float pdf_light(const LightCdf& cdf, const Vec3& d);

float luminance(const Vec3& rgb);

}  // namespace bakelight
