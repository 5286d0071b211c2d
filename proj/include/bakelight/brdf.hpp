// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>

#include "bakelight/geom.hpp"

namespace bakelight {

constexpr float kRoughnessMin = 0.09f;
constexpr float kRoughnessMax = 1.0f;
constexpr float kFresnelF0 = 0.04f;

// Simplified Disney parameters: Lambertian diffuse plus a single GGX lobe.
struct BrdfParams {
  Vec3 albedo;             // per channel in [0,1]
  float roughness = 1.0f;  // in [kRoughnessMin, kRoughnessMax]
  Vec3 normal{0, 0, 1};    // unit
};

struct SpecularConstants {
  float f0 = kFresnelF0;
  float alpha = 1.0f;  // roughness^2
  float k = 1.0f;      // alpha^2, kept for the separable-Smith oracle
};

enum class RoughnessClamp { Tolerant, Strict };

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

// Raw network output -> roughness in [kRoughnessMin, kRoughnessMax].
inline float map_roughness_raw(float raw) {
  return kRoughnessMin + (kRoughnessMax - kRoughnessMin) * sigmoid(raw);
}

// Count of out-of-range roughness values silently clamped in tolerant mode.
uint64_t roughness_clamp_warnings();
void reset_roughness_clamp_warnings();

// alpha = r^2, k = alpha^2 with f0 fixed at 0.04. Out-of-range r clamps in
// tolerant mode (counted) and throws in strict mode.
SpecularConstants remap_roughness(float r, RoughnessClamp mode = RoughnessClamp::Tolerant);

// GGX normal distribution D(h), isotropic, in the n.h parameterization.
float ggx_ndf(float cos_nh, float alpha);

// Smith masking G1 for GGX.
float smith_g1(float cos_n, float alpha);

// Height-correlated Smith G2; zero for non-positive cosines.
float smith_g_correlated(float cos_nv, float cos_nl, float alpha);

float fresnel_schlick(float cos_vh, float f0);

enum class BrdfLobe { Full, DiffuseOnly, SpecularOnly };

// f_r = albedo/pi + D F G2 / (4 (n.wi)(n.wo)); zero for backfacing wi or wo.
Vec3 eval_brdf(const BrdfParams& p, const Vec3& wi, const Vec3& wo,
               BrdfLobe lobe = BrdfLobe::Full);

struct VndfSample {
  Vec3 wi;
  float pdf = 0;
  bool valid = false;  // false when the reflected ray falls below the surface
};

// Heitz visible-normal sampling of the GGX lobe; pdf is in solid-angle
// measure around wi: G1(wo) D(h) / (4 (n.wo)).
VndfSample sample_ggx_vndf(const Vec3& wo, const BrdfParams& p, float u1, float u2);

float pdf_ggx_vndf(const Vec3& wo, const Vec3& wi, const BrdfParams& p);

// Alpha-parameterized cores backing the BrdfParams wrappers.
VndfSample sample_ggx_vndf_alpha(const Vec3& wo, const Vec3& n, float alpha, float u1, float u2);
float pdf_ggx_vndf_alpha(const Vec3& wo, const Vec3& wi, const Vec3& n, float alpha);

}  // namespace bakelight
