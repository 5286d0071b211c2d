// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bakelight/geom.hpp"

namespace bakelight::tnn {

// Dense row-major tensor. Templated on the scalar so tests can run the same
// code in a float64 shadow; production code uses the float alias.
template <typename T>
struct TensorT {
  std::vector<int> shape;
  std::vector<T> values;
  std::vector<T> grad;  // empty until ensure_grad()

  TensorT() = default;
  explicit TensorT(std::vector<int> s) : shape(std::move(s)) {
    values.assign(size_t(numel()), T(0));
  }
  TensorT(std::vector<int> s, T fill) : shape(std::move(s)) {
    values.assign(size_t(numel()), fill);
  }

  int64_t numel() const {
    int64_t n = 1;
    for (int d : shape) n *= d;
    return n;
  }

  int dim(int i) const { return shape[size_t(i)]; }
  int rank() const { return int(shape.size()); }

  void ensure_grad() {
    if (grad.size() != values.size()) grad.assign(values.size(), T(0));
  }
  void zero_grad() {
    if (!grad.empty()) std::fill(grad.begin(), grad.end(), T(0));
  }

  T* data() { return values.data(); }
  const T* data() const { return values.data(); }

  std::string shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
  }

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out(shape);
    for (size_t i = 0; i < values.size(); ++i) out.values[i] = U(values[i]);
    return out;
  }
};

using Tensor = TensorT<float>;

template <typename T>
inline void check_same_shape(const TensorT<T>& a, const TensorT<T>& b, const char* where) {
  if (a.shape != b.shape)
    throw std::invalid_argument(std::string(where) + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
}

// Uniform Kaiming fan-in initialization: U(-sqrt(6/fan_in), +sqrt(6/fan_in)).
template <typename T>
inline void kaiming_uniform(TensorT<T>& t, int fan_in, RngStream& rng) {
  double limit = std::sqrt(6.0 / double(fan_in));
  for (T& v : t.values) v = T((2.0 * rng.next_double() - 1.0) * limit);
}

}  // namespace bakelight::tnn
