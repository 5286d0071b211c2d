// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bakelight/image.hpp"

namespace bakelight {

struct SvgfConfig {
  int iterations = 5;
  float sigma_z = 1.0f;
  float sigma_n = 128.0f;
  float sigma_l = 4.0f;
  float eps = 1e-8f;
  bool demodulate_albedo = true;
};

// Edge-stopping guides for the filter; pointers reference caller-owned maps.
struct AuxBuffers {
  const Image1* depth = nullptr;
  const Image3* normal = nullptr;
  const Image1* grad_x = nullptr;  // clip-space depth gradient, pixels
  const Image1* grad_y = nullptr;
  const Image3* albedo = nullptr;  // demodulation only
  const Image1* mask = nullptr;
};

// Forward differences with the last column/row replicated.
std::pair<Image1, Image1> depth_gradient(const Image1& depth);

// 7x7 local unbiased variance of Rec.709 luminance, float64 accumulation;
// windows are clipped at the borders.
Image1 estimate_variance(const Image3& frame);

// `iterations` a-trous passes with stride 2^i and the 5x5 B-spline kernel;
// weights combine depth, normal and luminance edge-stopping terms, variance
// propagates with squared weights.
Image3 atrous_filter(const Image3& frame, const Image1& variance, const AuxBuffers& aux,
                     const SvgfConfig& cfg);

}  // namespace bakelight
