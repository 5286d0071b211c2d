// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "bakelight/integrator.hpp"

namespace bakelight {

// 10 log10(peak^2 / MSE) over all channels; identical images cap at 99 dB.
double psnr(const Image3& a, const Image3& b, double peak = 1.0);

// Standard SSIM on Rec.709 luma: 11x11 Gaussian window (sigma 1.5),
// K1 = 0.01, K2 = 0.03, dynamic range 1. Weights renormalize at borders.
double ssim(const Image3& a, const Image3& b);

// Clamp to [0,1] then the piecewise sRGB transfer, 8-bit rounding.
std::vector<uint8_t> tonemap(const Image3& linear);
uint8_t tonemap_channel(float linear);

// Latency breakdown in the Table-3 column layout. Stages:
//   model_op — surface provider (G-buffer) evaluation
//   vis      — visibility queries plus all indirect-illumination work
//   render   — rendering-equation arithmetic (shading minus vis)
//   dnsr     — denoising filter
struct LatencyBreakdown {
  double model_op_ms = 0;
  double vis_ms = 0;
  double render_ms = 0;
  double dnsr_ms = 0;
  double total_ms = 0;
  double fps = 0;
  double speedup_vs_baseline = 0;  // 0 when no baseline given
  uint64_t vis_queries = 0;
  uint64_t rays = 0;

  std::string csv_header() const;
  std::string csv_row(const std::string& label) const;
};

struct BenchPipeline {
  const SurfaceProvider* surface = nullptr;
  const VisibilityProvider* vis = nullptr;
  const PointShadingProvider* secondary = nullptr;
  ShadeConfig shade;
  bool denoise = true;
  SvgfConfig svgf;
};

// Median per stage over `repeats` timed runs after >= 2 warm-up runs.
LatencyBreakdown bench_render(const BenchPipeline& pipeline, const Camera& camera,
                              int repeats = 5, const LatencyBreakdown* baseline = nullptr);

}  // namespace bakelight
