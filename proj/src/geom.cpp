// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/geom.hpp"

namespace bakelight {

OrthonormalBasis build_onb(const Vec3& n_in) {
  float len = length(n_in);
  if (!(len > 1e-12f)) throw std::invalid_argument("build_onb: degenerate normal");
  Vec3 n = n_in / len;

  // Cross against the axis least aligned with n to avoid cancellation.
  Vec3 an = abs(n);
  Vec3 helper;
  if (an.x <= an.y && an.x <= an.z)
    helper = {1, 0, 0};
  else if (an.y <= an.z)
    helper = {0, 1, 0};
  else
    helper = {0, 0, 1};

  Vec3 tangent = normalize(cross(helper, n));
  Vec3 bitangent = cross(n, tangent);  // unit by construction, t x b = n
  return {tangent, bitangent, n};
}

namespace {

// Row-major (cos theta, phi) strata with one jittered sample each, trimmed to
// count. z_lo/z_hi select the full sphere or an upper hemisphere in z.
std::vector<Vec3> stratified_dirs_z(int count, float z_lo, float z_hi, RngStream& rng) {
  std::vector<Vec3> dirs;
  if (count <= 0) return dirs;
  dirs.reserve(size_t(count));

  int a = int(std::ceil(std::sqrt(double(count))));
  int b = a;
  for (int i = 0; i < a && int(dirs.size()) < count; ++i) {
    for (int j = 0; j < b && int(dirs.size()) < count; ++j) {
      float u1 = (float(i) + rng.next_float()) / float(a);
      float u2 = (float(j) + rng.next_float()) / float(b);
      float z = z_lo + u1 * (z_hi - z_lo);
      // keep samples strictly inside the open hemisphere
      if (z_lo == 0.0f) z = std::max(z, 1e-6f);
      float r = std::sqrt(std::max(0.0f, 1.0f - z * z));
      float phi = kTwoPi * u2;
      dirs.push_back({r * std::cos(phi), r * std::sin(phi), z});
    }
  }
  return dirs;
}

}  // namespace

std::vector<Vec3> stratified_sphere_dirs(int count, RngStream& rng) {
  return stratified_dirs_z(count, -1.0f, 1.0f, rng);
}

std::vector<Vec3> stratified_hemisphere_dirs(int count, const Vec3& n, RngStream& rng) {
  std::vector<Vec3> dirs = stratified_dirs_z(count, 0.0f, 1.0f, rng);
  if (dirs.empty()) return dirs;
  OrthonormalBasis onb = build_onb(n);
  for (Vec3& d : dirs) d = onb.to_world(d);
  return dirs;
}

}  // namespace bakelight
