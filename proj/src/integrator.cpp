// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/integrator.hpp"

#include <atomic>

#include "bakelight/svgf.hpp"

namespace bakelight {

namespace {
std::atomic<uint64_t> g_mis_zero_pdf{0};
std::atomic<uint64_t> g_nonfinite_clamp{0};
std::atomic<uint64_t> g_rescale_degenerate{0};
}  // namespace

uint64_t mis_zero_pdf_events() { return g_mis_zero_pdf.load(); }
uint64_t nonfinite_clamp_events() { return g_nonfinite_clamp.load(); }
uint64_t albedo_rescale_degenerate_events() { return g_rescale_degenerate.load(); }
void reset_integrator_counters() {
  g_mis_zero_pdf.store(0);
  g_nonfinite_clamp.store(0);
  g_rescale_degenerate.store(0);
}

float mis_weight(float pdf_a, float pdf_b) {
  if (pdf_a <= 0 && pdf_b <= 0) {
    g_mis_zero_pdf.fetch_add(1, std::memory_order_relaxed);
    return 0;
  }
  return pdf_a / (pdf_a + pdf_b);
}

namespace {

Vec3 clamp_nonfinite(Vec3 v) {
  if (!is_finite(v)) {
    g_nonfinite_clamp.fetch_add(1, std::memory_order_relaxed);
    return Vec3(0);
  }
  return v;
}

}  // namespace

Vec3 indirect_radiance(const Vec3& x, const Vec3& wi_shadow, float t, const ShadeConfig& cfg,
                       const PointShadingProvider& shading, const VisibilityProvider& vis,
                       RngStream& rng) {
  Vec3 xp = x + t * wi_shadow;
  PointShading ps = shading.shade_params(xp);
  BrdfParams params{ps.albedo, ps.roughness, ps.normal};
  Vec3 wo = -wi_shadow;

  std::vector<Vec3> dirs = stratified_sphere_dirs(cfg.secondary_rays, rng);
  Vec3 sum(0);
  for (const Vec3& d : dirs) {
    float cos_l = dot(d, ps.normal);
    if (cos_l <= 0) continue;                      // backfacing: dropped
    if (!vis.vis_depth(xp, d).visible) continue;   // occluded: dropped
    Vec3 li = sample_radiance(*cfg.env, d);
    Vec3 f = eval_brdf(params, d, wo, cfg.lobe);
    sum += li * f * (cos_l / kInvFourPi);
  }
  // dropped rays stay in the divisor (no pdf renormalization)
  return clamp_nonfinite(sum / float(cfg.secondary_rays));
}

Vec3 direct_radiance(const ShadingPoint& point, const Vec3& wo, const ShadeConfig& cfg,
                     const VisibilityProvider& vis, const PointShadingProvider* secondary,
                     PixelRng& rng) {
  BrdfParams params{point.albedo, point.roughness, point.n};
  const bool use_light = cfg.estimator != EstimatorMode::GgxOnly && cfg.light_cdf != nullptr;
  const bool use_ggx = cfg.estimator != EstimatorMode::LightOnly;
  const bool mis = cfg.estimator == EstimatorMode::Mis;

  Vec3 total(0);
  for (int s = 0; s < cfg.spp; ++s) {
    if (use_light) {
      float u1 = rng.light.next_float(), u2 = rng.light.next_float();
      LightSample ls = sample_light(*cfg.env, *cfg.light_cdf, u1, u2);
      float cos_l = dot(ls.dir, point.n);
      if (cos_l > 0 && ls.pdf > 0) {
        VisibilitySample v = vis.vis_depth(point.x, ls.dir);
        Vec3 li(0);
        if (v.visible) {
          li = ls.radiance;
        } else if (cfg.bounces >= 2 && secondary) {
          RngStream sec = rng.secondary_base.fork(uint64_t(s) * 2);
          li = indirect_radiance(point.x, ls.dir, v.t, cfg, *secondary,
                                 cfg.secondary_vis ? *cfg.secondary_vis : vis, sec);
        }
        if (li.x > 0 || li.y > 0 || li.z > 0) {
          Vec3 f = eval_brdf(params, ls.dir, wo, cfg.lobe);
          float w = mis ? mis_weight(ls.pdf, pdf_ggx_vndf(wo, ls.dir, params)) : 1.0f;
          total += clamp_nonfinite(li * f * (w * cos_l / ls.pdf));
        }
      }
    }
    if (use_ggx) {
      float u1 = rng.ggx.next_float(), u2 = rng.ggx.next_float();
      VndfSample gs = sample_ggx_vndf(wo, params, u1, u2);
      float cos_l = gs.valid ? dot(gs.wi, point.n) : 0.0f;
      if (gs.valid && cos_l > 0) {
        VisibilitySample v = vis.vis_depth(point.x, gs.wi);
        Vec3 li(0);
        if (v.visible) {
          li = sample_radiance(*cfg.env, gs.wi);
        } else if (cfg.bounces >= 2 && secondary) {
          RngStream sec = rng.secondary_base.fork(uint64_t(s) * 2 + 1);
          li = indirect_radiance(point.x, gs.wi, v.t, cfg, *secondary,
                                 cfg.secondary_vis ? *cfg.secondary_vis : vis, sec);
        }
        if (li.x > 0 || li.y > 0 || li.z > 0) {
          Vec3 f = eval_brdf(params, gs.wi, wo, cfg.lobe);
          float pdf_l = (mis && cfg.light_cdf) ? pdf_light(*cfg.light_cdf, gs.wi) : 0.0f;
          float w = mis ? mis_weight(gs.pdf, pdf_l) : 1.0f;
          total += clamp_nonfinite(li * f * (w * cos_l / gs.pdf));
        }
      }
    }
  }
  return total / float(cfg.spp);
}

FrameOutput shade_frame(const SurfaceProvider& surface, const VisibilityProvider& vis,
                        const PointShadingProvider* secondary, const ShadeConfig& cfg,
                        const Camera& camera) {
  if (!cfg.env) throw std::invalid_argument("shade_frame: no environment map");
  GBuffer gb = surface.surface(camera);
  const int w = gb.width, h = gb.height;
  FrameOutput out(w, h);
  out.normal = gb.normal;
  out.albedo = gb.albedo;
  out.depth = gb.depth;
  out.mask = gb.mask;

#pragma omp parallel for schedule(dynamic, 2)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Ray ray = camera.pixel_ray(x, y);
      if (gb.mask.at(x, y) <= 0.5f) {
        out.radiance.at(x, y) = sample_radiance(*cfg.env, ray.direction);
        continue;
      }
      ShadingPoint point{gb.coordinate.at(x, y), gb.normal.at(x, y), gb.albedo.at(x, y),
                         gb.roughness.at(x, y)};
      Vec3 wo = -ray.direction;
      PixelRng rng = PixelRng::for_pixel(cfg.seed, uint64_t(y) * uint64_t(w) + uint64_t(x));
      out.radiance.at(x, y) = direct_radiance(point, wo, cfg, vis, secondary, rng);
    }
  }

  auto grad = depth_gradient(out.depth);
  out.grad_x = std::move(grad.first);
  out.grad_y = std::move(grad.second);
  return out;
}

AlbedoRescale albedo_rescale(const Image3& pred, const Image3& ref, const Image1& mask) {
  if (pred.width != ref.width || pred.height != ref.height || pred.width != mask.width ||
      pred.height != mask.height)
    throw std::invalid_argument("albedo_rescale: shape mismatch");
  double pm[3] = {0, 0, 0}, rm[3] = {0, 0, 0};
  for (size_t i = 0; i < pred.pixels.size(); ++i) {
    double m = mask.pixels[i];
    for (int c = 0; c < 3; ++c) {
      pm[c] += m * pred.pixels[i][c];
      rm[c] += m * ref.pixels[i][c];
    }
  }
  AlbedoRescale out;
  for (int c = 0; c < 3; ++c) {
    if (pm[c] > 0) {
      out.scale[c] = float(rm[c] / pm[c]);
    } else {
      out.scale[c] = 1.0f;
      g_rescale_degenerate.fetch_add(1, std::memory_order_relaxed);
    }
  }
  out.rescaled = pred;
  for (Vec3& p : out.rescaled.pixels) p = clamp(p * out.scale, 0.0f, 1.0f);
  return out;
}

}  // namespace bakelight
