// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "bakelight/geom.hpp"

namespace bakelight {

// Row-major, row 0 at the top.
struct Image3 {
  int width = 0, height = 0;
  std::vector<Vec3> pixels;

  Image3() = default;
  Image3(int w, int h, Vec3 fill = Vec3(0)) : width(w), height(h), pixels(size_t(w) * h, fill) {}

  Vec3& at(int x, int y) { return pixels[size_t(y) * width + x]; }
  const Vec3& at(int x, int y) const { return pixels[size_t(y) * width + x]; }
  size_t size() const { return pixels.size(); }
};

struct Image1 {
  int width = 0, height = 0;
  std::vector<float> pixels;

  Image1() = default;
  Image1(int w, int h, float fill = 0) : width(w), height(h), pixels(size_t(w) * h, fill) {}

  float& at(int x, int y) { return pixels[size_t(y) * width + x]; }
  const float& at(int x, int y) const { return pixels[size_t(y) * width + x]; }
  size_t size() const { return pixels.size(); }
};

// PFM: "PF\n{W} {H}\n{scale}\n", negative scale = little-endian, rows stored
// bottom to top, 3 x float32 per pixel ("Pf" for one channel). Round trips
// are bit exact.
void write_pfm(const std::string& path, const Image3& img);
void write_pfm(const std::string& path, const Image1& img);
Image3 read_pfm3(const std::string& path);
Image1 read_pfm1(const std::string& path);

// 8-bit RGB PNG (one IDAT, filter 0 rows).
void write_png(const std::string& path, const std::vector<uint8_t>& rgb, int width, int height);

// Radiance .hdr (RGBE), flat or RLE scanlines, read-only.
Image3 read_hdr(const std::string& path);

}  // namespace bakelight
