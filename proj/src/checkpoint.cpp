// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include "bakelight/tnn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace bakelight::tnn {

namespace {

constexpr uint32_t kMagic = 0x50434C42;  // "BLCP"
constexpr uint32_t kVersion = 1;

void put_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}

uint32_t get_u32(std::ifstream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  put_u32(out, kMagic);
  put_u32(out, kVersion);
  put_u32(out, uint32_t(tensors.size()));
  for (auto& [name, t] : tensors) {
    put_u32(out, uint32_t(name.size()));
    out.write(name.data(), std::streamsize(name.size()));
    put_u32(out, uint32_t(t->shape.size()));
    for (int d : t->shape) put_u32(out, uint32_t(d));
    out.write(reinterpret_cast<const char*>(t->values.data()),
              std::streamsize(t->values.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  if (get_u32(in) != kMagic) throw std::runtime_error("not a checkpoint file: " + path);
  if (get_u32(in) != kVersion) throw std::runtime_error("unsupported checkpoint version: " + path);
  uint32_t count = get_u32(in);
  std::map<std::string, Tensor> out;
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = get_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    uint32_t rank = get_u32(in);
    std::vector<int> shape(rank);
    for (uint32_t d = 0; d < rank; ++d) shape[d] = int(get_u32(in));
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.values.data()),
            std::streamsize(t.values.size() * sizeof(float)));
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    out.emplace(std::move(name), std::move(t));
  }
  return out;
}

void NamedTensors::load(const std::string& path) const {
  auto loaded = load_checkpoint(path);
  for (auto& [name, t] : items) {
    auto it = loaded.find(name);
    if (it == loaded.end())
      throw std::runtime_error("checkpoint missing tensor '" + name + "': " + path);
    if (it->second.shape != t->shape)
      throw std::runtime_error("checkpoint tensor '" + name + "' has shape " +
                               it->second.shape_str() + ", expected " + t->shape_str());
    t->values = std::move(it->second.values);
  }
}

}  // namespace bakelight::tnn
