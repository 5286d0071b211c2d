// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <chrono>
#include <memory>

#include "bakelight/metrics.hpp"

namespace bakelight {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Decorators accumulating wall time and query counts across worker threads.
class TimedVisibility : public VisibilityProvider {
 public:
  explicit TimedVisibility(const VisibilityProvider& inner) : inner_(inner) {}
  VisibilitySample vis_depth(const Vec3& x, const Vec3& wi) const override {
    auto t0 = Clock::now();
    VisibilitySample s = inner_.vis_depth(x, wi);
    ns_.fetch_add(uint64_t((Clock::now() - t0).count()), std::memory_order_relaxed);
    queries_.fetch_add(1, std::memory_order_relaxed);
    return s;
  }
  double ms() const { return double(ns_.load()) * 1e-6; }
  uint64_t queries() const { return queries_.load(); }
  void reset() { ns_ = 0; queries_ = 0; }

 private:
  const VisibilityProvider& inner_;
  mutable std::atomic<uint64_t> ns_{0}, queries_{0};
};

class TimedPointShading : public PointShadingProvider {
 public:
  explicit TimedPointShading(const PointShadingProvider& inner) : inner_(inner) {}
  PointShading shade_params(const Vec3& x) const override {
    auto t0 = Clock::now();
    PointShading p = inner_.shade_params(x);
    ns_.fetch_add(uint64_t((Clock::now() - t0).count()), std::memory_order_relaxed);
    return p;
  }
  double ms() const { return double(ns_.load()) * 1e-6; }
  void reset() { ns_ = 0; }

 private:
  const PointShadingProvider& inner_;
  mutable std::atomic<uint64_t> ns_{0};
};

class TimedSurface : public SurfaceProvider {
 public:
  explicit TimedSurface(const SurfaceProvider& inner) : inner_(inner) {}
  GBuffer surface(const Camera& camera) const override {
    auto t0 = Clock::now();
    GBuffer gb = inner_.surface(camera);
    ms_ = ms_since(t0);
    return gb;
  }
  double ms() const { return ms_; }

 private:
  const SurfaceProvider& inner_;
  mutable double ms_ = 0;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

LatencyBreakdown bench_render(const BenchPipeline& pipeline, const Camera& camera, int repeats,
                              const LatencyBreakdown* baseline) {
  TimedSurface surface(*pipeline.surface);
  TimedVisibility vis(*pipeline.vis);
  std::unique_ptr<TimedPointShading> secondary;
  if (pipeline.secondary) secondary = std::make_unique<TimedPointShading>(*pipeline.secondary);

  std::vector<double> model_ms, vis_ms, render_ms, dnsr_ms;
  uint64_t queries = 0;
  const int warmup = 2;
  for (int run = 0; run < warmup + std::max(1, repeats); ++run) {
    vis.reset();
    if (secondary) secondary->reset();
    auto t0 = Clock::now();
    FrameOutput frame = shade_frame(surface, vis, secondary.get(), pipeline.shade, camera);
    double shade_wall = ms_since(t0);

    double dnsr = 0;
    if (pipeline.denoise) {
      auto t1 = Clock::now();
      Image3 denoised = denoise_frame(frame, pipeline.svgf);
      dnsr = ms_since(t1);
      (void)denoised;
    }
    if (run < warmup) continue;

    // indirect shading work counts into the Vis column
    double v = vis.ms() + (secondary ? secondary->ms() : 0.0);
    model_ms.push_back(surface.ms());
    vis_ms.push_back(v);
    render_ms.push_back(std::max(0.0, shade_wall - surface.ms() - v));
    dnsr_ms.push_back(dnsr);
    queries = vis.queries();
  }

  LatencyBreakdown out;
  out.model_op_ms = median(model_ms);
  out.vis_ms = median(vis_ms);
  out.render_ms = median(render_ms);
  out.dnsr_ms = median(dnsr_ms);
  out.total_ms = out.model_op_ms + out.vis_ms + out.render_ms + out.dnsr_ms;
  out.fps = out.total_ms > 0 ? 1000.0 / out.total_ms : 0.0;
  out.vis_queries = queries;
  out.rays = uint64_t(camera.width) * uint64_t(camera.height) * uint64_t(pipeline.shade.spp) * 2;
  if (baseline && out.fps > 0 && baseline->fps > 0)
    out.speedup_vs_baseline = out.fps / baseline->fps;
  return out;
}

}  // namespace bakelight
