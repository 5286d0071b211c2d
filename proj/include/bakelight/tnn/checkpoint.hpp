// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bakelight/tnn/tensor.hpp"

namespace bakelight::tnn {

// Little-endian container:
//   magic "BLCP" (u32), version (u32), tensor count (u32),
//   per tensor: name length (u32), name bytes, rank (u32), dims (u32 each),
//   float32 payload.
void save_checkpoint(const std::string& path,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors);

std::map<std::string, Tensor> load_checkpoint(const std::string& path);

// Named views over a model's parameters, shared by save and load.
struct NamedTensors {
  std::vector<std::pair<std::string, Tensor*>> items;

  void add(const std::string& name, Tensor& t) { items.push_back({name, &t}); }

  void save(const std::string& path) const {
    std::vector<std::pair<std::string, const Tensor*>> v;
    for (auto& [n, t] : items) v.push_back({n, t});
    save_checkpoint(path, v);
  }

  // Loads into the registered tensors; shapes must match exactly.
  void load(const std::string& path) const;
};

}  // namespace bakelight::tnn
