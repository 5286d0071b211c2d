// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include <zlib.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "bakelight/image.hpp"

namespace bakelight {

namespace {

void write_pfm_header(std::ofstream& out, const char* magic, int w, int h) {
  out << magic << "\n" << w << " " << h << "\n" << "-1.0" << "\n";
}

void check_stream(const std::ios& s, const std::string& path, const char* what) {
  if (!s) throw std::runtime_error(std::string(what) + ": " + path);
}

struct PfmHeader {
  bool color = false;
  int width = 0, height = 0;
  float scale = -1.0f;
};

PfmHeader read_pfm_header(std::ifstream& in, const std::string& path) {
  PfmHeader h;
  std::string magic;
  in >> magic;
  if (magic == "PF")
    h.color = true;
  else if (magic == "Pf")
    h.color = false;
  else
    throw std::runtime_error("not a PFM file: " + path);
  in >> h.width >> h.height >> h.scale;
  if (!in || h.width <= 0 || h.height <= 0)
    throw std::runtime_error("bad PFM header: " + path);
  in.get();  // single whitespace after the scale
  if (h.scale >= 0)
    throw std::runtime_error("big-endian PFM not supported: " + path);
  return h;
}

}  // namespace

void write_pfm(const std::string& path, const Image3& img) {
  std::ofstream out(path, std::ios::binary);
  check_stream(out, path, "cannot open for writing");
  write_pfm_header(out, "PF", img.width, img.height);
  for (int y = img.height - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(&img.at(0, y)), sizeof(Vec3) * img.width);
  check_stream(out, path, "write failed");
}

void write_pfm(const std::string& path, const Image1& img) {
  std::ofstream out(path, std::ios::binary);
  check_stream(out, path, "cannot open for writing");
  write_pfm_header(out, "Pf", img.width, img.height);
  for (int y = img.height - 1; y >= 0; --y)
    out.write(reinterpret_cast<const char*>(&img.at(0, y)), sizeof(float) * img.width);
  check_stream(out, path, "write failed");
}

Image3 read_pfm3(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check_stream(in, path, "cannot open");
  PfmHeader h = read_pfm_header(in, path);
  if (!h.color) throw std::runtime_error("expected 3-channel PFM: " + path);
  Image3 img(h.width, h.height);
  for (int y = h.height - 1; y >= 0; --y)
    in.read(reinterpret_cast<char*>(&img.at(0, y)), sizeof(Vec3) * h.width);
  check_stream(in, path, "truncated PFM");
  return img;
}

Image1 read_pfm1(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check_stream(in, path, "cannot open");
  PfmHeader h = read_pfm_header(in, path);
  if (h.color) throw std::runtime_error("expected 1-channel PFM: " + path);
  Image1 img(h.width, h.height);
  for (int y = h.height - 1; y >= 0; --y)
    in.read(reinterpret_cast<char*>(&img.at(0, y)), sizeof(float) * h.width);
  check_stream(in, path, "truncated PFM");
  return img;
}

namespace {

void put_u32_be(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(uint8_t(x >> 24));
  v.push_back(uint8_t(x >> 16));
  v.push_back(uint8_t(x >> 8));
  v.push_back(uint8_t(x));
}

void write_chunk(std::ofstream& out, const char type[4], const std::vector<uint8_t>& data) {
  std::vector<uint8_t> buf;
  put_u32_be(buf, uint32_t(data.size()));
  buf.insert(buf.end(), type, type + 4);
  buf.insert(buf.end(), data.begin(), data.end());
  uint32_t crc = crc32(0, buf.data() + 4, uInt(buf.size() - 4));
  put_u32_be(buf, crc);
  out.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

}  // namespace

void write_png(const std::string& path, const std::vector<uint8_t>& rgb, int width, int height) {
  if (int64_t(rgb.size()) != int64_t(width) * height * 3)
    throw std::runtime_error("write_png: buffer size does not match dimensions");

  // filter byte 0 per scanline
  std::vector<uint8_t> raw;
  raw.reserve(size_t(height) * (size_t(width) * 3 + 1));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    const uint8_t* row = rgb.data() + size_t(y) * width * 3;
    raw.insert(raw.end(), row, row + size_t(width) * 3);
  }

  uLongf comp_size = compressBound(uLong(raw.size()));
  std::vector<uint8_t> comp(comp_size);
  if (compress2(comp.data(), &comp_size, raw.data(), uLong(raw.size()), 6) != Z_OK)
    throw std::runtime_error("write_png: deflate failed");
  comp.resize(comp_size);

  std::ofstream out(path, std::ios::binary);
  check_stream(out, path, "cannot open for writing");
  const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  out.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<uint8_t> ihdr;
  put_u32_be(ihdr, uint32_t(width));
  put_u32_be(ihdr, uint32_t(height));
  ihdr.push_back(8);  // bit depth
  ihdr.push_back(2);  // color type RGB
  ihdr.push_back(0);  // compression
  ihdr.push_back(0);  // filter
  ihdr.push_back(0);  // interlace
  write_chunk(out, "IHDR", ihdr);
  write_chunk(out, "IDAT", comp);
  write_chunk(out, "IEND", {});
  check_stream(out, path, "write failed");
}

namespace {

Vec3 rgbe_to_vec3(const uint8_t rgbe[4]) {
  if (rgbe[3] == 0) return Vec3(0);
  float f = std::ldexp(1.0f, int(rgbe[3]) - (128 + 8));
  return {rgbe[0] * f, rgbe[1] * f, rgbe[2] * f};
}

}  // namespace

Image3 read_hdr(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  check_stream(in, path, "cannot open");

  std::string line;
  std::getline(in, line);
  if (line.rfind("#?", 0) != 0) throw std::runtime_error("not a Radiance file: " + path);
  bool format_ok = false;
  while (std::getline(in, line) && !line.empty()) {
    if (line.rfind("FORMAT=", 0) == 0) {
      if (line != "FORMAT=32-bit_rle_rgbe")
        throw std::runtime_error("unsupported Radiance format: " + path);
      format_ok = true;
    }
  }
  if (!format_ok) throw std::runtime_error("missing FORMAT line: " + path);

  int width = 0, height = 0;
  std::getline(in, line);
  if (std::sscanf(line.c_str(), "-Y %d +X %d", &height, &width) != 2)
    throw std::runtime_error("unsupported Radiance orientation: " + path);

  Image3 img(width, height);
  std::vector<uint8_t> scanline(size_t(width) * 4);
  for (int y = 0; y < height; ++y) {
    uint8_t head[4];
    in.read(reinterpret_cast<char*>(head), 4);
    check_stream(in, path, "truncated .hdr");
    bool rle = head[0] == 2 && head[1] == 2 && ((head[2] << 8) | head[3]) == width && width >= 8;
    if (rle) {
      // four separate component streams, run-length encoded
      for (int c = 0; c < 4; ++c) {
        int x = 0;
        while (x < width) {
          uint8_t count = uint8_t(in.get());
          if (count > 128) {
            uint8_t value = uint8_t(in.get());
            for (int i = 0; i < count - 128; ++i) scanline[size_t(x++) * 4 + c] = value;
          } else {
            for (int i = 0; i < count; ++i) scanline[size_t(x++) * 4 + c] = uint8_t(in.get());
          }
          if (x > width) throw std::runtime_error("corrupt RLE scanline: " + path);
        }
      }
    } else {
      std::memcpy(scanline.data(), head, 4);
      in.read(reinterpret_cast<char*>(scanline.data() + 4), std::streamsize(width) * 4 - 4);
    }
    check_stream(in, path, "truncated .hdr");
    for (int x = 0; x < width; ++x) img.at(x, y) = rgbe_to_vec3(&scanline[size_t(x) * 4]);
  }
  return img;
}

}  // namespace bakelight
