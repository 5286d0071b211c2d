// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bakelight/brdf.hpp"
#include "bakelight/gbuffer.hpp"

namespace bakelight {

struct Material {
  bool checker = false;
  Vec3 albedo{0.5f, 0.5f, 0.5f};
  Vec3 albedo_b{0.1f, 0.1f, 0.1f};  // second checker color
  float checker_scale = 1.0f;
  float roughness = 1.0f;

  Vec3 albedo_at(const Vec3& x) const;
};

struct Primitive {
  enum class Shape { Sphere, Box, Plane };
  Shape shape = Shape::Sphere;
  Vec3 center;        // sphere/box
  float radius = 1;   // sphere
  Vec3 half_extents;  // box
  Vec3 normal;        // plane
  float offset = 0;   // plane: dot(normal, x) = offset
  Material material;

  float sdf(const Vec3& x) const;
};

// Tolerances used by every trace; one block so scenes and tests agree.
struct TraceConfig {
  float eps_hit = 1e-4f;
  int max_steps = 256;
  float normal_h = 1e-4f;
};

struct TraceResult {
  bool hit = false;
  Vec3 x;
  float t = 0;
  Vec3 n;
  BrdfParams material;
  int steps = 0;
};

// Analytic teacher scene: exact primitive SDFs combined with min.
struct SdfScene {
  std::string name;
  std::vector<Primitive> primitives;
  Vec3 aabb_min{-1, -1, -1};
  Vec3 aabb_max{1, 1, 1};
  std::optional<Camera> default_camera;

  Vec3 center() const { return (aabb_min + aabb_max) * 0.5f; }
  float primary_far(const Camera& camera) const {
    return length(camera.position - center()) + length(aabb_max - aabb_min);
  }

  static SdfScene load(const std::string& path);
  void save(const std::string& path) const;
};

// Count of sphere traces that exhausted max_steps without converging.
uint64_t trace_step_exhaustions();
void reset_trace_step_exhaustions();

// Signed distance of the nearest primitive (exact, 1-Lipschitz).
float sdf_eval(const SdfScene& scene, const Vec3& x);
// Index of the primitive realizing the minimum distance.
int nearest_primitive(const SdfScene& scene, const Vec3& x);
// Central-difference gradient of the scene SDF, normalized.
Vec3 sdf_normal(const SdfScene& scene, const Vec3& x, float h);

TraceResult sphere_trace(const SdfScene& scene, const Ray& ray, float t_min, float t_max,
                         const TraceConfig& cfg = {});

// Occlusion oracle: traces from x + near*wi; hits beyond far count as
// visible, and visible samples carry t = far.
VisibilitySample visibility_depth(const SdfScene& scene, const Vec3& x, const Vec3& wi,
                                  float near = kSecondaryNear, float far = kSecondaryFar,
                                  const TraceConfig& cfg = {});

GBuffer trace_gbuffer(const SdfScene& scene, const Camera& camera, const TraceConfig& cfg = {});

struct PoseSampleParams {
  float radius = 3.0f;
  float elevation_lo_deg = 5.0f;
  float elevation_hi_deg = 85.0f;
  float min_angle_deg = 1.0f;
  float vfov_deg = 45.0f;
  int width = 128, height = 128;
};

// Random upper-hemisphere camera looking at the scene center; resamples
// until farther than min_angle from every pose in reject (throws after
// 1000 consecutive rejections).
Camera sample_hemisphere_pose(const SdfScene& scene, const PoseSampleParams& params,
                              RngStream& rng, const std::vector<Camera>& reject = {});

// Angle in degrees between two poses as seen from the scene center.
float pose_angle_deg(const SdfScene& scene, const Camera& a, const Camera& b);

// Multi-plane PFM serialization of a G-buffer: <prefix>.albedo.pfm,
// .normal.pfm, .coordinate.pfm (3-channel) and .roughness.pfm, .mask.pfm,
// .depth.pfm (1-channel).
void save_gbuffer(const GBuffer& gb, const std::string& prefix);
GBuffer load_gbuffer(const std::string& prefix);

// Teacher-backed providers.
class TeacherSurfaceProvider : public SurfaceProvider {
 public:
  explicit TeacherSurfaceProvider(const SdfScene& scene, TraceConfig cfg = {})
      : scene_(scene), cfg_(cfg) {}
  GBuffer surface(const Camera& camera) const override { return trace_gbuffer(scene_, camera, cfg_); }

 private:
  const SdfScene& scene_;
  TraceConfig cfg_;
};

class OracleVisibilityProvider : public VisibilityProvider {
 public:
  explicit OracleVisibilityProvider(const SdfScene& scene, float near = kSecondaryNear,
                                    float far = kSecondaryFar, TraceConfig cfg = {})
      : scene_(scene), near_(near), far_(far), cfg_(cfg) {}
  VisibilitySample vis_depth(const Vec3& x, const Vec3& wi) const override {
    return visibility_depth(scene_, x, wi, near_, far_, cfg_);
  }

 private:
  const SdfScene& scene_;
  float near_, far_;
  TraceConfig cfg_;
};

class OraclePointShadingProvider : public PointShadingProvider {
 public:
  explicit OraclePointShadingProvider(const SdfScene& scene, TraceConfig cfg = {})
      : scene_(scene), cfg_(cfg) {}
  PointShading shade_params(const Vec3& x) const override;

 private:
  const SdfScene& scene_;
  TraceConfig cfg_;
};

class AlwaysVisibleProvider : public VisibilityProvider {
 public:
  VisibilitySample vis_depth(const Vec3&, const Vec3&) const override {
    return {true, kSecondaryFar};
  }
};

}  // namespace bakelight
