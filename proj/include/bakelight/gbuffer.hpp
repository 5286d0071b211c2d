// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bakelight/image.hpp"

namespace bakelight {

struct Camera {
  Vec3 position;
  Vec3 look_at;
  Vec3 up{0, 1, 0};
  float vfov_deg = 45.0f;
  int width = 128, height = 128;

  // Ray through an arbitrary sub-pixel position (px, py) in pixel units.
  Ray ray_at(float px, float py) const;
  // Ray through the center of pixel (x, y).
  Ray pixel_ray(int x, int y) const { return ray_at(x + 0.5f, y + 0.5f); }
};

// Per-pixel rendering parameters. Where mask = 0 the normal is zero, depth
// holds the primary-ray far sentinel and coordinate the ray at far.
struct GBuffer {
  int width = 0, height = 0;
  Image3 albedo;
  Image3 normal;
  Image3 coordinate;
  Image1 roughness;
  Image1 mask;
  Image1 depth;

  GBuffer() = default;
  GBuffer(int w, int h)
      : width(w), height(h), albedo(w, h), normal(w, h), coordinate(w, h),
        roughness(w, h), mask(w, h), depth(w, h) {}
};

struct VisibilitySample {
  bool visible = true;
  float t = 0;  // clipped to [near, far]; far when visible
};

constexpr float kSecondaryNear = 0.05f;
constexpr float kSecondaryFar = 1.5f;

class SurfaceProvider {
 public:
  virtual ~SurfaceProvider() = default;
  virtual GBuffer surface(const Camera& camera) const = 0;
};

class VisibilityProvider {
 public:
  virtual ~VisibilityProvider() = default;
  virtual VisibilitySample vis_depth(const Vec3& x, const Vec3& wi) const = 0;
};

// BRDF parameters and normal at an arbitrary surface point, used when
// shading secondary bounce points.
struct PointShading {
  Vec3 normal;
  Vec3 albedo;
  float roughness = 1.0f;
};

class PointShadingProvider {
 public:
  virtual ~PointShadingProvider() = default;
  virtual PointShading shade_params(const Vec3& x) const = 0;
};

}  // namespace bakelight
