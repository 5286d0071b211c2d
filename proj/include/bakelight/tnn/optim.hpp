// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bakelight/tnn/tensor.hpp"

namespace bakelight::tnn {

inline double cosine_lr(int64_t step, int64_t total_steps, double lr0) {
  if (total_steps <= 0) return lr0;
  double s = std::clamp(double(step) / double(total_steps), 0.0, 1.0);
  return lr0 * 0.5 * (1.0 + std::cos(M_PI * s));
}

// Exponential decay to decay_floor * lr0 at the final step.
inline double exp_decay_lr(int64_t step, int64_t total_steps, double lr0,
                           double decay_floor = 0.1) {
  if (total_steps <= 0) return lr0;
  double s = std::clamp(double(step) / double(total_steps), 0.0, 1.0);
  return lr0 * std::pow(decay_floor, s);
}

// Adam with decoupled weight decay. Parameters are registered once with a
// per-tensor decay flag (hash tables opt out of decay, MLP weights opt in).
template <typename T>
class AdamT {
 public:
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double weight_decay = 0.0;

  void register_param(TensorT<T>* p, bool decay) {
    params_.push_back(p);
    decay_.push_back(decay);
    m_.emplace_back(p->values.size(), 0.0);
    v_.emplace_back(p->values.size(), 0.0);
    p->ensure_grad();
  }

  int64_t step_count() const { return step_; }
  void set_step_count(int64_t s) { step_ = s; }
  size_t param_count() const { return params_.size(); }
  bool decays(size_t i) const { return decay_[i]; }

  // One update from the accumulated gradients, which are then cleared.
  void step(double lr) {
    ++step_;
    double bc1 = 1.0 - std::pow(beta1, double(step_));
    double bc2 = 1.0 - std::pow(beta2, double(step_));
    for (size_t pi = 0; pi < params_.size(); ++pi) {
      TensorT<T>& p = *params_[pi];
      std::vector<double>& m = m_[pi];
      std::vector<double>& v = v_[pi];
      bool decay = decay_[pi] && weight_decay > 0;
      for (size_t i = 0; i < p.values.size(); ++i) {
        double g = double(p.grad[i]);
        if (!std::isfinite(g)) throw std::runtime_error("adam_step: non-finite gradient");
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        double update = (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
        double w = double(p.values[i]) - lr * update;
        if (decay) w -= lr * weight_decay * w;
        p.values[i] = T(w);
      }
      p.zero_grad();
    }
  }

 private:
  std::vector<TensorT<T>*> params_;
  std::vector<bool> decay_;
  std::vector<std::vector<double>> m_, v_;
  int64_t step_ = 0;
};

using Adam = AdamT<float>;

// Mean L1; writes d(loss)/d(pred) into pred.grad (accumulating).
template <typename T>
double l1_loss(TensorT<T>& pred, const TensorT<T>& target) {
  check_same_shape(pred, target, "l1_loss");
  pred.ensure_grad();
  const int64_t n = pred.numel();
  double loss = 0;
  for (int64_t i = 0; i < n; ++i) {
    double d = double(pred.values[size_t(i)]) - double(target.values[size_t(i)]);
    loss += std::fabs(d);
    pred.grad[size_t(i)] += T((d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) / double(n));
  }
  return loss / double(n);
}

// L1 with per-element weights; the mean runs over the weight sum, so masked
// elements are genuinely excluded from the loss.
template <typename T>
double l1_loss_weighted(TensorT<T>& pred, const TensorT<T>& target,
                        const std::vector<T>& weight) {
  check_same_shape(pred, target, "l1_loss_weighted");
  pred.ensure_grad();
  const int64_t n = pred.numel();
  double wsum = 0;
  for (const T& w : weight) wsum += double(w);
  if (wsum <= 0) return 0.0;
  double loss = 0;
  for (int64_t i = 0; i < n; ++i) {
    double w = double(weight[size_t(i)]);
    if (w == 0) continue;
    double d = double(pred.values[size_t(i)]) - double(target.values[size_t(i)]);
    loss += w * std::fabs(d);
    pred.grad[size_t(i)] += T(w * (d > 0 ? 1.0 : d < 0 ? -1.0 : 0.0) / wsum);
  }
  return loss / wsum;
}

// Numerically stable binary cross entropy from logits:
// bce = max(x,0) - x t + log(1 + exp(-|x|)); targets must be exactly 0 or 1.
template <typename T>
double bce_logit_loss(TensorT<T>& logit, const TensorT<T>& target) {
  check_same_shape(logit, target, "bce_logit_loss");
  logit.ensure_grad();
  const int64_t n = logit.numel();
  double loss = 0;
  for (int64_t i = 0; i < n; ++i) {
    double t = double(target.values[size_t(i)]);
    if (t != 0.0 && t != 1.0)
      throw std::invalid_argument("bce_logit_loss: target outside {0,1}");
    double x = double(logit.values[size_t(i)]);
    loss += std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::fabs(x)));
    double sig = 1.0 / (1.0 + std::exp(-x));
    logit.grad[size_t(i)] += T((sig - t) / double(n));
  }
  return loss / double(n);
}

template <typename T>
double bce_logit_loss_weighted(TensorT<T>& logit, const TensorT<T>& target,
                               const std::vector<T>& weight) {
  check_same_shape(logit, target, "bce_logit_loss_weighted");
  logit.ensure_grad();
  const int64_t n = logit.numel();
  double wsum = 0;
  for (const T& w : weight) wsum += double(w);
  if (wsum <= 0) return 0.0;
  double loss = 0;
  for (int64_t i = 0; i < n; ++i) {
    double w = double(weight[size_t(i)]);
    if (w == 0) continue;
    double t = double(target.values[size_t(i)]);
    if (t != 0.0 && t != 1.0)
      throw std::invalid_argument("bce_logit_loss: target outside {0,1}");
    double x = double(logit.values[size_t(i)]);
    loss += w * (std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::fabs(x))));
    double sig = 1.0 / (1.0 + std::exp(-x));
    logit.grad[size_t(i)] += T(w * (sig - t) / wsum);
  }
  return loss / wsum;
}

}  // namespace bakelight::tnn
