// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bakelight {

constexpr float kPi = 3.14159265358979323846f;
constexpr float kTwoPi = 2.0f * kPi;
constexpr float kInvPi = 1.0f / kPi;
constexpr float kInvTwoPi = 1.0f / kTwoPi;
constexpr float kInvFourPi = 1.0f / (4.0f * kPi);

struct Vec2 {
  float x = 0, y = 0;
};

struct Vec3 {
  float x = 0, y = 0, z = 0;

  Vec3() = default;
  Vec3(float x, float y, float z) : x(x), y(y), z(z) {}
  explicit Vec3(float s) : x(s), y(s), z(s) {}

  float operator[](int i) const { return (&x)[i]; }
  float& operator[](int i) { return (&x)[i]; }
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(const Vec3& a, float s) { return {a.x * s, a.y * s, a.z * s}; }
inline Vec3 operator*(float s, const Vec3& a) { return a * s; }
inline Vec3 operator*(const Vec3& a, const Vec3& b) { return {a.x * b.x, a.y * b.y, a.z * b.z}; }
inline Vec3 operator/(const Vec3& a, float s) { return {a.x / s, a.y / s, a.z / s}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) { a = a + b; return a; }
inline Vec3& operator-=(Vec3& a, const Vec3& b) { a = a - b; return a; }
inline Vec3& operator*=(Vec3& a, float s) { a = a * s; return a; }
inline bool operator==(const Vec3& a, const Vec3& b) { return a.x == b.x && a.y == b.y && a.z == b.z; }

inline float dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline float length_squared(const Vec3& a) { return dot(a, a); }
inline float length(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 normalize(const Vec3& a) { return a / length(a); }
inline Vec3 min(const Vec3& a, const Vec3& b) {
  return {std::min(a.x, b.x), std::min(a.y, b.y), std::min(a.z, b.z)};
}
inline Vec3 max(const Vec3& a, const Vec3& b) {
  return {std::max(a.x, b.x), std::max(a.y, b.y), std::max(a.z, b.z)};
}
inline Vec3 clamp(const Vec3& a, float lo, float hi) {
  return {std::clamp(a.x, lo, hi), std::clamp(a.y, lo, hi), std::clamp(a.z, lo, hi)};
}
inline Vec3 abs(const Vec3& a) { return {std::fabs(a.x), std::fabs(a.y), std::fabs(a.z)}; }
inline float max_component(const Vec3& a) { return std::max(a.x, std::max(a.y, a.z)); }
inline float mean_component(const Vec3& a) { return (a.x + a.y + a.z) / 3.0f; }
inline bool is_finite(const Vec3& a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}
// Mirror reflection of w about unit normal n; both point away from the surface.
inline Vec3 reflect(const Vec3& w, const Vec3& n) { return 2.0f * dot(w, n) * n - w; }

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length

  Vec3 at(float t) const { return origin + direction * t; }
};

// Right-handed local frame: tangent x bitangent = normal.
struct OrthonormalBasis {
  Vec3 tangent, bitangent, normal;

  Vec3 to_world(const Vec3& v) const { return v.x * tangent + v.y * bitangent + v.z * normal; }
  Vec3 to_local(const Vec3& v) const {
    return {dot(v, tangent), dot(v, bitangent), dot(v, normal)};
  }
};

OrthonormalBasis build_onb(const Vec3& n);

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xCBF29CE484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ull;
  }
  return h;
}

namespace detail {
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace detail

// Counter-based generator: output depends only on (seed, counter), so streams
// can be replayed and split by key without carrying mutable global state.
struct RngStream {
  uint64_t seed = 0;
  uint64_t counter = 0;

  RngStream() = default;
  explicit RngStream(uint64_t seed) : seed(seed) {}
  RngStream(uint64_t seed, uint64_t counter) : seed(seed), counter(counter) {}

  uint64_t next_u64() {
    uint64_t z = seed + (counter++) * 0x9E3779B97F4A7C15ull;
    return detail::mix64(z);
  }

  // Uniform in [0,1), 24-bit resolution.
  float next_float() { return float(next_u64() >> 40) * 0x1p-24f; }
  // Uniform in [0,1), 53-bit resolution.
  double next_double() { return double(next_u64() >> 11) * 0x1p-53; }

  uint32_t next_below(uint32_t n) { return uint32_t(next_u64() % n); }

  // Derives an independent stream; forking is order-free and replayable.
  RngStream fork(uint64_t key) const {
    return RngStream(detail::mix64(seed ^ detail::mix64(key + 0x9E3779B97F4A7C15ull)));
  }
};

// Jittered samples on a row-major (cos theta, phi) grid covering the sphere;
// the associated pdf is the uniform 1/(4 pi).
std::vector<Vec3> stratified_sphere_dirs(int count, RngStream& rng);

// Same stratification restricted to the hemisphere around n; pdf 1/(2 pi).
// Every returned direction satisfies dot(d, n) > 0.
std::vector<Vec3> stratified_hemisphere_dirs(int count, const Vec3& n, RngStream& rng);

}  // namespace bakelight
