// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/metrics.hpp"

#include <sstream>

#include "bakelight/envlight.hpp"

namespace bakelight {

double psnr(const Image3& a, const Image3& b, double peak) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("psnr: shape mismatch");
  double mse = 0;
  for (size_t i = 0; i < a.pixels.size(); ++i)
    for (int c = 0; c < 3; ++c) {
      double d = double(a.pixels[i][c]) - double(b.pixels[i][c]);
      mse += d * d;
    }
  mse /= double(a.pixels.size() * 3);
  if (mse <= 0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(peak * peak / mse));
}

double ssim(const Image3& a, const Image3& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("ssim: shape mismatch");
  const int w = a.width, h = a.height;
  if (w < 11 || h < 11) throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  std::vector<double> la(size_t(w) * h), lb(size_t(w) * h);
  for (size_t i = 0; i < a.pixels.size(); ++i) {
    la[i] = luminance(a.pixels[i]);
    lb[i] = luminance(b.pixels[i]);
  }

  // 11-tap Gaussian, sigma 1.5
  double g[11];
  double gsum = 0;
  for (int i = 0; i < 11; ++i) {
    double d = i - 5;
    g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double total = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double wsum = 0, ma = 0, mb = 0, va = 0, vb = 0, cov = 0;
      for (int dy = -5; dy <= 5; ++dy) {
        int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -5; dx <= 5; ++dx) {
          int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          double wt = g[dy + 5] * g[dx + 5];
          double pa = la[size_t(yy) * w + xx], pb = lb[size_t(yy) * w + xx];
          wsum += wt;
          ma += wt * pa;
          mb += wt * pb;
          va += wt * pa * pa;
          vb += wt * pb * pb;
          cov += wt * pa * pb;
        }
      }
      ma /= wsum;
      mb /= wsum;
      va = va / wsum - ma * ma;
      vb = vb / wsum - mb * mb;
      cov = cov / wsum - ma * mb;
      double s = ((2 * ma * mb + c1) * (2 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (va + vb + c2));
      total += s;
    }
  }
  return total / double(size_t(w) * h);
}

uint8_t tonemap_channel(float linear) {
  float v = std::clamp(linear, 0.0f, 1.0f);
  float srgb = v <= 0.0031308f ? 12.92f * v : 1.055f * std::pow(v, 1.0f / 2.4f) - 0.055f;
  return uint8_t(std::lround(srgb * 255.0f));
}

std::vector<uint8_t> tonemap(const Image3& linear) {
  std::vector<uint8_t> out(linear.pixels.size() * 3);
  for (size_t i = 0; i < linear.pixels.size(); ++i) {
    out[i * 3 + 0] = tonemap_channel(linear.pixels[i].x);
    out[i * 3 + 1] = tonemap_channel(linear.pixels[i].y);
    out[i * 3 + 2] = tonemap_channel(linear.pixels[i].z);
  }
  return out;
}

std::string LatencyBreakdown::csv_header() const {
  return "label,model_op_ms,vis_ms,render_ms,dnsr_ms,total_ms,fps,speedup,vis_queries,rays";
}

std::string LatencyBreakdown::csv_row(const std::string& label) const {
  std::ostringstream os;
  os << label << "," << model_op_ms << "," << vis_ms << "," << render_ms << "," << dnsr_ms
     << "," << total_ms << "," << fps << "," << speedup_vs_baseline << "," << vis_queries
     << "," << rays;
  return os.str();
}

}  // namespace bakelight
