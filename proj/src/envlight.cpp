// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/envlight.hpp"

#include <algorithm>

namespace bakelight {

float luminance(const Vec3& rgb) {
  return 0.2126f * rgb.x + 0.7152f * rgb.y + 0.0722f * rgb.z;
}

EnvironmentMap EnvironmentMap::constant(int width, int height, Vec3 value) {
  EnvironmentMap env;
  env.image = Image3(width, height, value);
  return from_image(std::move(env.image));
}

EnvironmentMap EnvironmentMap::from_image(Image3 img) {
  if (img.width != 2 * img.height)
    throw std::runtime_error("environment map must be 2:1 equirectangular");
  for (const Vec3& p : img.pixels)
    if (!is_finite(p) || p.x < 0 || p.y < 0 || p.z < 0)
      throw std::runtime_error("environment map has non-finite or negative values");
  EnvironmentMap env;
  env.image = std::move(img);
  return env;
}

EnvironmentMap EnvironmentMap::load(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".hdr") == 0)
    return from_image(read_hdr(path));
  return from_image(read_pfm3(path));
}

Vec2 dir_to_uv(const Vec3& d) {
  double theta = std::acos(std::clamp(double(d.y), -1.0, 1.0));
  double phi = std::atan2(double(d.x), -double(d.z));
  if (phi < 0) phi += 2.0 * M_PI;
  float u = float(phi / (2.0 * M_PI));
  float v = float(theta / M_PI);
  if (u >= 1.0f) u = 0.0f;  // wrap the seam back into [0,1)
  return {u, std::min(v, std::nextafterf(1.0f, 0.0f))};
}

Vec3 uv_to_dir(float u, float v) {
  double theta = double(v) * M_PI;
  double phi = double(u) * 2.0 * M_PI;
  double st = std::sin(theta);
  return {float(st * std::sin(phi)), float(std::cos(theta)), float(-st * std::cos(phi))};
}

Vec3 sample_radiance(const EnvironmentMap& env, const Vec3& d) {
  Vec2 uv = dir_to_uv(d);
  int w = env.width(), h = env.height();
  float fx = uv.x * w - 0.5f;
  float fy = uv.y * h - 0.5f;
  int x0 = int(std::floor(fx)), y0 = int(std::floor(fy));
  float tx = fx - x0, ty = fy - y0;
  int x1 = x0 + 1, y1 = y0 + 1;
  // horizontal wrap, vertical clamp
  x0 = (x0 % w + w) % w;
  x1 = (x1 % w + w) % w;
  y0 = std::clamp(y0, 0, h - 1);
  y1 = std::clamp(y1, 0, h - 1);
  const Image3& img = env.image;
  return img.at(x0, y0) * ((1 - tx) * (1 - ty)) + img.at(x1, y0) * (tx * (1 - ty)) +
         img.at(x0, y1) * ((1 - tx) * ty) + img.at(x1, y1) * (tx * ty);
}

LightCdf build_light_cdf(const EnvironmentMap& env) {
  const int w = env.width(), h = env.height();
  LightCdf cdf;
  cdf.width = w;
  cdf.height = h;
  cdf.cell_luminance.resize(size_t(w) * h);
  cdf.conditional.resize(size_t(w) * h);
  cdf.marginal.resize(h);

  const double dtheta = M_PI / h;
  std::vector<double> row_weight(h, 0.0);
  double total = 0;
  for (int y = 0; y < h; ++y) {
    // exact cell solid angle: dphi * (cos(theta0) - cos(theta1)); this is
    // proportional to sin of the row center and never hits zero, so the
    // pole clamp below is only a formal floor
    double cell_omega =
        (2.0 * M_PI / w) * (std::cos(y * dtheta) - std::cos((y + 1) * dtheta));
    cell_omega = std::max(cell_omega, 1e-6 * (2.0 * M_PI / w) * dtheta);
    double row = 0;
    for (int x = 0; x < w; ++x) {
      float lum = luminance(env.image.at(x, y));
      cdf.cell_luminance[size_t(y) * w + x] = lum;
      row += double(lum) * cell_omega;
      cdf.conditional[size_t(y) * w + x] = float(row);  // unnormalized for now
    }
    row_weight[y] = row;
    total += row;
  }
  if (!(total > 0)) throw std::runtime_error("unsampleable light: environment map is black");
  cdf.total_integral = total;

  double acc = 0;
  for (int y = 0; y < h; ++y) {
    acc += row_weight[y];
    cdf.marginal[y] = float(acc / total);
    float* row = &cdf.conditional[size_t(y) * w];
    if (row_weight[y] > 0) {
      for (int x = 0; x < w; ++x) row[x] = float(double(row[x]) / row_weight[y]);
      row[w - 1] = 1.0f;
    } else {
      // unreachable rows; keep a valid CDF shape anyway
      for (int x = 0; x < w; ++x) row[x] = float(x + 1) / float(w);
    }
  }
  cdf.marginal[h - 1] = 1.0f;
  return cdf;
}

namespace {

// First index with cdf[i] > u, plus the remapped residual inside that cell.
// The residual is kept away from the cell borders so that uv -> dir -> uv
// round trips stay inside the same cell.
std::pair<int, float> invert_cdf(const float* cdf, int n, float u) {
  int idx = int(std::upper_bound(cdf, cdf + n, u) - cdf);
  idx = std::min(idx, n - 1);
  float lo = idx > 0 ? cdf[idx - 1] : 0.0f;
  float hi = cdf[idx];
  float resid = hi > lo ? (u - lo) / (hi - lo) : 0.5f;
  return {idx, std::clamp(resid, 1e-3f, 1.0f - 1e-3f)};
}

}  // namespace

LightSample sample_light(const EnvironmentMap& env, const LightCdf& cdf, float u1, float u2) {
  auto [y, ry] = invert_cdf(cdf.marginal.data(), cdf.height, u1);
  auto [x, rx] = invert_cdf(&cdf.conditional[size_t(y) * cdf.width], cdf.width, u2);
  float u = (x + rx) / float(cdf.width);
  // uniform in cos(theta) inside the cell, so the density is the constant
  // cell pdf in solid-angle measure
  double t0 = M_PI * double(y) / cdf.height, t1 = M_PI * double(y + 1) / cdf.height;
  double cos_theta = std::cos(t0) + double(ry) * (std::cos(t1) - std::cos(t0));
  float v = float(std::acos(std::clamp(cos_theta, -1.0, 1.0)) / M_PI);
  LightSample s;
  s.dir = uv_to_dir(u, v);
  s.pdf = cdf.cell_pdf(x, y);
  s.radiance = sample_radiance(env, s.dir);
  return s;
}

float pdf_light(const LightCdf& cdf, const Vec3& d) {
  Vec2 uv = dir_to_uv(d);
  int x = std::min(int(uv.x * cdf.width), cdf.width - 1);
  int y = std::min(int(uv.y * cdf.height), cdf.height - 1);
  return cdf.cell_pdf(x, y);
}

}  // namespace bakelight
