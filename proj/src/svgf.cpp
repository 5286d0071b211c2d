// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/svgf.hpp"

#include "bakelight/envlight.hpp"
#include "bakelight/integrator.hpp"

namespace bakelight {

std::pair<Image1, Image1> depth_gradient(const Image1& depth) {
  const int w = depth.width, h = depth.height;
  Image1 gx(w, h), gy(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      gx.at(x, y) = x + 1 < w ? depth.at(x + 1, y) - depth.at(x, y)
                              : (x > 0 ? gx.at(x - 1, y) : 0.0f);
      gy.at(x, y) = y + 1 < h ? depth.at(x, y + 1) - depth.at(x, y)
                              : (y > 0 ? gy.at(x, y - 1) : 0.0f);
    }
  return {std::move(gx), std::move(gy)};
}

Image1 estimate_variance(const Image3& frame) {
  const int w = frame.width, h = frame.height;
  Image1 lum(w, h), var(w, h);
  for (size_t i = 0; i < frame.pixels.size(); ++i) lum.pixels[i] = luminance(frame.pixels[i]);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0, sum2 = 0;
      int n = 0;
      for (int dy = -3; dy <= 3; ++dy) {
        int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -3; dx <= 3; ++dx) {
          int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          double v = lum.at(xx, yy);
          sum += v;
          sum2 += v * v;
          ++n;
        }
      }
      double mean = sum / n;
      var.at(x, y) = n > 1 ? float(std::max(0.0, (sum2 - sum * mean) / (n - 1))) : 0.0f;
    }
  }
  return var;
}

namespace {

constexpr float kBspline[5] = {1.0f / 16, 1.0f / 4, 3.0f / 8, 1.0f / 4, 1.0f / 16};

void atrous_pass(const Image3& color, const Image1& variance, const AuxBuffers& aux,
                 const SvgfConfig& cfg, int stride, Image3& out_color, Image1& out_variance) {
  const int w = color.width, h = color.height;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float zp = aux.depth->at(x, y);
      Vec3 np = aux.normal->at(x, y);
      float lp = luminance(color.at(x, y));
      float lum_denom = cfg.sigma_l * std::sqrt(std::max(0.0f, variance.at(x, y))) + cfg.eps;

      Vec3 csum(0);
      double wsum = 0, w2vsum = 0;
      for (int dy = -2; dy <= 2; ++dy) {
        int yy = y + dy * stride;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -2; dx <= 2; ++dx) {
          int xx = x + dx * stride;
          if (xx < 0 || xx >= w) continue;
          float wk = kBspline[dx + 2] * kBspline[dy + 2];
          float weight;
          if (dx == 0 && dy == 0) {
            weight = wk;  // center tap bypasses the edge-stopping terms
          } else {
            float zq = aux.depth->at(xx, yy);
            float zslope = aux.grad_x->at(x, y) * float(dx * stride) +
                           aux.grad_y->at(x, y) * float(dy * stride);
            float wz = std::exp(-std::fabs(zp - zq) /
                                (cfg.sigma_z * std::fabs(zslope) + cfg.eps));
            float ndot = std::max(0.0f, dot(np, aux.normal->at(xx, yy)));
            float wn = std::pow(ndot, cfg.sigma_n);
            float wl = std::exp(-std::fabs(lp - luminance(color.at(xx, yy))) / lum_denom);
            weight = wk * wz * wn * wl;
          }
          csum += color.at(xx, yy) * weight;
          wsum += weight;
          w2vsum += double(weight) * weight * variance.at(xx, yy);
        }
      }
      out_color.at(x, y) = csum / float(wsum);
      out_variance.at(x, y) = float(w2vsum / (wsum * wsum));
    }
  }
}

}  // namespace

Image3 atrous_filter(const Image3& frame, const Image1& variance, const AuxBuffers& aux,
                     const SvgfConfig& cfg) {
  if (!aux.depth || !aux.normal || !aux.grad_x || !aux.grad_y)
    throw std::invalid_argument("atrous_filter: missing aux buffers");
  if (aux.depth->width != frame.width || aux.depth->height != frame.height)
    throw std::invalid_argument("atrous_filter: aux resolution mismatch");

  Image3 color = frame;
  Image1 var = variance;
  const bool demod = cfg.demodulate_albedo && aux.albedo && aux.mask;
  if (demod) {
    for (size_t i = 0; i < color.pixels.size(); ++i) {
      if (aux.mask->pixels[i] > 0.5f) {
        Vec3 a = max(aux.albedo->pixels[i], Vec3(1e-3f));
        color.pixels[i] = {color.pixels[i].x / a.x, color.pixels[i].y / a.y,
                           color.pixels[i].z / a.z};
      }
    }
  }

  Image3 next_color(frame.width, frame.height);
  Image1 next_var(frame.width, frame.height);
  for (int i = 0; i < cfg.iterations; ++i) {
    atrous_pass(color, var, aux, cfg, 1 << i, next_color, next_var);
    std::swap(color, next_color);
    std::swap(var, next_var);
  }

  if (demod) {
    for (size_t i = 0; i < color.pixels.size(); ++i) {
      if (aux.mask->pixels[i] > 0.5f) {
        Vec3 a = max(aux.albedo->pixels[i], Vec3(1e-3f));
        color.pixels[i] = color.pixels[i] * a;
      }
    }
  }
  return color;
}

Image3 denoise_frame(const FrameOutput& frame, const SvgfConfig& cfg) {
  AuxBuffers aux;
  aux.depth = &frame.depth;
  aux.normal = &frame.normal;
  aux.grad_x = &frame.grad_x;
  aux.grad_y = &frame.grad_y;
  aux.albedo = &frame.albedo;
  aux.mask = &frame.mask;
  Image1 variance = estimate_variance(frame.radiance);
  return atrous_filter(frame.radiance, variance, aux, cfg);
}

}  // namespace bakelight
