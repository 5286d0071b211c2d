// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bakelight/brdf.hpp"
#include "bakelight/envlight.hpp"
#include "bakelight/gbuffer.hpp"
#include "bakelight/svgf.hpp"

namespace bakelight {

struct ShadingPoint {
  Vec3 x;
  Vec3 n;
  Vec3 albedo;
  float roughness = 1.0f;
};

enum class EstimatorMode { Mis, LightOnly, GgxOnly };

struct ShadeConfig {
  int spp = 16;             // MIS pairs per pixel (one light + one GGX ray each)
  int bounces = 1;          // 1 = direct only, 2 = one indirect bounce
  int secondary_rays = 8;   // stratified sphere directions per secondary point
  EstimatorMode estimator = EstimatorMode::Mis;
  BrdfLobe lobe = BrdfLobe::Full;
  uint64_t seed = 0;
  const EnvironmentMap* env = nullptr;
  const LightCdf* light_cdf = nullptr;  // null disables the light strategy
  // visibility used for secondary-bounce rays; defaults to the primary
  // provider (lets oracle-primary / baked-secondary setups isolate the
  // indirect machinery)
  const VisibilityProvider* secondary_vis = nullptr;
};

// Radiance plus the auxiliary buffers the denoiser consumes.
struct FrameOutput {
  Image3 radiance;
  Image3 normal;
  Image3 albedo;
  Image1 depth;
  Image1 mask;
  Image1 grad_x, grad_y;  // forward-difference depth gradient

  FrameOutput() = default;
  FrameOutput(int w, int h)
      : radiance(w, h), normal(w, h), albedo(w, h), depth(w, h), mask(w, h),
        grad_x(w, h), grad_y(w, h) {}
};

// Diagnostic counters.
uint64_t mis_zero_pdf_events();
uint64_t nonfinite_clamp_events();
uint64_t albedo_rescale_degenerate_events();
void reset_integrator_counters();

// Veach balance heuristic; both pdfs zero counts an event and returns 0.
float mis_weight(float pdf_a, float pdf_b);

// Per-pixel RNG bundle: primary strategies consume their own streams and
// secondary sampling forks off a separate key, so enabling the second
// bounce never perturbs the first.
struct PixelRng {
  RngStream light;
  RngStream ggx;
  RngStream secondary_base;

  static PixelRng for_pixel(uint64_t seed, uint64_t pixel_index) {
    RngStream base = RngStream(seed).fork(pixel_index);
    return {base.fork(1), base.fork(2), base.fork(3)};
  }
};

// One-sample MIS estimate of the rendering equation at a surface point,
// averaged over cfg.spp rounds. With bounces = 2, occluded rays carry the
// secondary bounce radiance instead of zero.
Vec3 direct_radiance(const ShadingPoint& point, const Vec3& wo, const ShadeConfig& cfg,
                     const VisibilityProvider& vis, const PointShadingProvider* secondary,
                     PixelRng& rng);

// Outgoing radiance of the secondary point x' = x + t*wi: BRDF from the
// shading provider, stratified sphere directions with backfacing and
// occluded rays dropped (uniform 1/(4 pi) pdf, no renormalization).
Vec3 indirect_radiance(const Vec3& x, const Vec3& wi_shadow, float t, const ShadeConfig& cfg,
                       const PointShadingProvider& shading, const VisibilityProvider& vis,
                       RngStream& rng);

// Full-frame shading: background pixels look up the environment along the
// primary ray; masked pixels evaluate direct (+ indirect) illumination.
FrameOutput shade_frame(const SurfaceProvider& surface, const VisibilityProvider& vis,
                        const PointShadingProvider* secondary, const ShadeConfig& cfg,
                        const Camera& camera);

// SVGF over a shaded frame's own aux buffers.
Image3 denoise_frame(const FrameOutput& frame, const SvgfConfig& cfg);

struct AlbedoRescale {
  Vec3 scale{1, 1, 1};
  Image3 rescaled;
};

// Per-channel global scale mean(ref*mask)/mean(pred*mask); the rescaled map
// is clamped to [0,1]. A zero masked mean leaves the scale at 1 (counted).
AlbedoRescale albedo_rescale(const Image3& pred, const Image3& ref, const Image1& mask);

}  // namespace bakelight
