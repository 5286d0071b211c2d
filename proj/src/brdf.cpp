// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/brdf.hpp"

namespace bakelight {

namespace {
std::atomic<uint64_t> g_roughness_clamp_warnings{0};
}

uint64_t roughness_clamp_warnings() { return g_roughness_clamp_warnings.load(); }
void reset_roughness_clamp_warnings() { g_roughness_clamp_warnings.store(0); }

SpecularConstants remap_roughness(float r, RoughnessClamp mode) {
  if (r < kRoughnessMin || r > kRoughnessMax) {
    if (mode == RoughnessClamp::Strict)
      throw std::invalid_argument("remap_roughness: roughness outside [0.09, 1.0]");
    g_roughness_clamp_warnings.fetch_add(1, std::memory_order_relaxed);
    r = std::clamp(r, kRoughnessMin, kRoughnessMax);
  }
  SpecularConstants c;
  c.alpha = r * r;
  c.k = c.alpha * c.alpha;
  c.f0 = kFresnelF0;
  return c;
}

float ggx_ndf(float cos_nh, float alpha) {
  float a2 = alpha * alpha;
  float c2 = cos_nh * cos_nh;
  // a2*c2 + (1-c2) == c2*(a2-1) + 1, but stays exact for tiny alpha
  float t = a2 * c2 + (1.0f - c2);
  return a2 / (kPi * t * t);
}

float smith_g1(float cos_n, float alpha) {
  if (cos_n <= 0) return 0;
  float a2 = alpha * alpha;
  // Lambda = (sqrt(a2 + (1-a2) c^2) / c - 1) / 2
  float lambda = (std::sqrt(a2 + (1.0f - a2) * cos_n * cos_n) / cos_n - 1.0f) * 0.5f;
  return 1.0f / (1.0f + lambda);
}

float smith_g_correlated(float cos_nv, float cos_nl, float alpha) {
  if (cos_nv <= 0 || cos_nl <= 0) return 0;
  // canonical argument order keeps the evaluation bitwise reciprocal
  float c0 = std::min(cos_nv, cos_nl);
  float c1 = std::max(cos_nv, cos_nl);
  float a2 = alpha * alpha;
  float l0 = (std::sqrt(a2 + (1.0f - a2) * c0 * c0) / c0 - 1.0f) * 0.5f;
  float l1 = (std::sqrt(a2 + (1.0f - a2) * c1 * c1) / c1 - 1.0f) * 0.5f;
  return 1.0f / (1.0f + l0 + l1);
}

float fresnel_schlick(float cos_vh, float f0) {
  float m = std::clamp(1.0f - cos_vh, 0.0f, 1.0f);
  float m2 = m * m;
  return f0 + (1.0f - f0) * m2 * m2 * m;
}

Vec3 eval_brdf(const BrdfParams& p, const Vec3& wi, const Vec3& wo, BrdfLobe lobe) {
  float cos_nl = dot(p.normal, wi);
  float cos_nv = dot(p.normal, wo);
  if (cos_nl <= 0 || cos_nv <= 0) return Vec3(0);

  Vec3 f(0);
  if (lobe != BrdfLobe::SpecularOnly) f += p.albedo * kInvPi;
  if (lobe != BrdfLobe::DiffuseOnly) {
    SpecularConstants c = remap_roughness(p.roughness);
    Vec3 h = normalize(wi + wo);
    float cos_nh = std::clamp(dot(p.normal, h), 0.0f, 1.0f);
    // h bisects wi and wo; averaging the two dots keeps F bitwise reciprocal
    float cos_vh = std::clamp(0.5f * (dot(wo, h) + dot(wi, h)), 0.0f, 1.0f);
    float d = ggx_ndf(cos_nh, c.alpha);
    float g = smith_g_correlated(cos_nv, cos_nl, c.alpha);
    float fr = fresnel_schlick(cos_vh, c.f0);
    f += Vec3(d * g * fr / (4.0f * (cos_nl * cos_nv)));
  }
  return f;
}

VndfSample sample_ggx_vndf(const Vec3& wo, const BrdfParams& p, float u1, float u2) {
  return sample_ggx_vndf_alpha(wo, p.normal, remap_roughness(p.roughness).alpha, u1, u2);
}

float pdf_ggx_vndf(const Vec3& wo, const Vec3& wi, const BrdfParams& p) {
  return pdf_ggx_vndf_alpha(wo, wi, p.normal, remap_roughness(p.roughness).alpha);
}

VndfSample sample_ggx_vndf_alpha(const Vec3& wo, const Vec3& n, float alpha, float u1, float u2) {
  VndfSample s;
  float cos_nv = dot(n, wo);
  if (cos_nv <= 0) return s;

  OrthonormalBasis onb = build_onb(n);
  Vec3 v = onb.to_local(wo);

  // Heitz 2018: stretch, sample the projected disk, unstretch.
  Vec3 vh = normalize(Vec3(alpha * v.x, alpha * v.y, v.z));
  float lensq = vh.x * vh.x + vh.y * vh.y;
  Vec3 t1 = lensq > 1e-12f ? Vec3(-vh.y, vh.x, 0) / std::sqrt(lensq) : Vec3(1, 0, 0);
  Vec3 t2 = cross(vh, t1);
  float r = std::sqrt(u1);
  float phi = kTwoPi * u2;
  float p1 = r * std::cos(phi);
  float p2 = r * std::sin(phi);
  float mix = 0.5f * (1.0f + vh.z);
  p2 = (1.0f - mix) * std::sqrt(std::max(0.0f, 1.0f - p1 * p1)) + mix * p2;
  Vec3 nh = p1 * t1 + p2 * t2 + std::sqrt(std::max(0.0f, 1.0f - p1 * p1 - p2 * p2)) * vh;
  Vec3 h = normalize(Vec3(alpha * nh.x, alpha * nh.y, std::max(1e-6f, nh.z)));

  Vec3 wi_local = reflect(v, h);
  if (wi_local.z <= 0) return s;  // caller discards with weight 0

  s.wi = onb.to_world(wi_local);
  s.pdf = smith_g1(v.z, alpha) * ggx_ndf(h.z, alpha) / (4.0f * v.z);
  s.valid = s.pdf > 0 && std::isfinite(s.pdf);
  return s;
}

float pdf_ggx_vndf_alpha(const Vec3& wo, const Vec3& wi, const Vec3& n, float alpha) {
  float cos_nv = dot(n, wo);
  float cos_nl = dot(n, wi);
  if (cos_nv <= 0 || cos_nl <= 0) return 0;
  Vec3 h = normalize(wi + wo);
  float cos_nh = std::clamp(dot(n, h), 0.0f, 1.0f);
  return smith_g1(cos_nv, alpha) * ggx_ndf(cos_nh, alpha) / (4.0f * cos_nv);
}

}  // namespace bakelight
