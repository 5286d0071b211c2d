// Copyright 2026 The bakelight authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>

#include "bakelight/tnn/checkpoint.hpp"
#include "bakelight/tnn/layers.hpp"
#include "bakelight/tnn/optim.hpp"
#include "testutil.hpp"

using namespace bakelight;
using namespace bakelight::tnn;

namespace {

using DTensor = TensorT<double>;

void fill_random(DTensor& t, RngStream& rng, double scale = 1.0) {
  for (auto& v : t.values) v = (2.0 * rng.next_double() - 1.0) * scale;
}

double weighted_sum(const DTensor& out, const DTensor& w) {
  double s = 0;
  for (size_t i = 0; i < out.values.size(); ++i) s += out.values[i] * w.values[i];
  return s;
}

// Central finite difference of a scalar loss w.r.t. every element of target,
// compared against the analytic gradient. h = 1e-3 in the float64 shadow.
void check_grad(const std::function<double()>& loss, DTensor& target,
                const std::vector<double>& analytic, double tol = 1e-4) {
  const double h = 1e-3;
  REQUIRE(analytic.size() == target.values.size());
  for (size_t i = 0; i < target.values.size(); ++i) {
    double saved = target.values[i];
    target.values[i] = saved + h;
    double lp = loss();
    target.values[i] = saved - h;
    double lm = loss();
    target.values[i] = saved;
    double fd = (lp - lm) / (2.0 * h);
    double denom = std::max({std::fabs(fd), std::fabs(analytic[i]), 1e-3});
    CHECK(std::fabs(fd - analytic[i]) / denom < tol);
  }
}

std::vector<double> to_vec(const DTensor& t) {
  return std::vector<double>(t.grad.begin(), t.grad.end());
}

}  // namespace

TEST_CASE("conv2d gradients (finite differences, float64 shadow)") {
  for (int kernel : {1, 3}) {
    RngStream rng(101 + kernel);
    Conv2dT<double> conv(3, 4, kernel);
    conv.init(rng);
    fill_random(conv.bias(), rng, 0.1);
    DTensor x({2, 3, 4, 4});
    fill_random(x, rng);
    DTensor w({2, 4, 4, 4});
    fill_random(w, rng);

    auto loss = [&]() { return weighted_sum(conv.forward(x), w); };
    loss();  // prime the cache
    conv.weight().ensure_grad();
    conv.weight().zero_grad();
    conv.bias().ensure_grad();
    conv.bias().zero_grad();
    DTensor dx = conv.backward(w);

    check_grad(loss, x, std::vector<double>(dx.values.begin(), dx.values.end()));
    check_grad(loss, conv.weight(), to_vec(conv.weight()));
    check_grad(loss, conv.bias(), to_vec(conv.bias()));
  }
}

TEST_CASE("linear gradients") {
  RngStream rng(107);
  LinearT<double> lin(5, 3);
  lin.init(rng);
  fill_random(lin.bias(), rng, 0.1);
  DTensor x({4, 5});
  fill_random(x, rng);
  DTensor w({4, 3});
  fill_random(w, rng);

  auto loss = [&]() { return weighted_sum(lin.forward(x), w); };
  loss();
  lin.weight().ensure_grad();
  lin.weight().zero_grad();
  lin.bias().ensure_grad();
  lin.bias().zero_grad();
  DTensor dx = lin.backward(w);

  check_grad(loss, x, std::vector<double>(dx.values.begin(), dx.values.end()));
  check_grad(loss, lin.weight(), to_vec(lin.weight()));
  check_grad(loss, lin.bias(), to_vec(lin.bias()));
}

TEST_CASE("instance norm gradients") {
  RngStream rng(109);
  InstanceNorm2dT<double> norm(3);
  fill_random(norm.gamma(), rng, 0.5);
  for (auto& g : norm.gamma().values) g += 1.0;
  fill_random(norm.beta(), rng, 0.5);
  DTensor x({2, 3, 4, 4});
  fill_random(x, rng);
  DTensor w({2, 3, 4, 4});
  fill_random(w, rng);

  auto loss = [&]() { return weighted_sum(norm.forward(x), w); };
  loss();
  norm.gamma().ensure_grad();
  norm.gamma().zero_grad();
  norm.beta().ensure_grad();
  norm.beta().zero_grad();
  DTensor dx = norm.backward(w);

  check_grad(loss, x, std::vector<double>(dx.values.begin(), dx.values.end()));
  check_grad(loss, norm.gamma(), to_vec(norm.gamma()));
  check_grad(loss, norm.beta(), to_vec(norm.beta()));
}

TEST_CASE("gelu") {
  GeluT<double> gelu;
  DTensor x({1, 4});
  x.values = {0.0, 10.0, -10.0, 0.5};
  DTensor y = gelu.forward(x);
  CHECK(y.values[0] == doctest::Approx(0.0));
  CHECK(y.values[1] == doctest::Approx(10.0).epsilon(1e-9));   // -> x as x -> +inf
  CHECK(y.values[2] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(y.values[3] > 0.0);

  RngStream rng(113);
  fill_random(x, rng, 2.0);
  DTensor w({1, 4});
  fill_random(w, rng);
  auto loss = [&]() { return weighted_sum(gelu.forward(x), w); };
  loss();
  DTensor dx = gelu.backward(w);
  check_grad(loss, x, std::vector<double>(dx.values.begin(), dx.values.end()));
}

TEST_CASE("sigmoid gradients") {
  SigmoidT<double> sig;
  RngStream rng(117);
  DTensor x({2, 3});
  fill_random(x, rng, 3.0);
  DTensor w({2, 3});
  fill_random(w, rng);
  auto loss = [&]() { return weighted_sum(sig.forward(x), w); };
  loss();
  DTensor dx = sig.backward(w);
  check_grad(loss, x, std::vector<double>(dx.values.begin(), dx.values.end()));
}

TEST_CASE("bilinear upsample") {
  SUBCASE("constant map stays constant") {
    BilinearUpsample2xT<double> up;
    DTensor x({1, 2, 3, 3}, 0.7);
    DTensor y = up.forward(x);
    REQUIRE(y.shape == std::vector<int>{1, 2, 6, 6});
    for (double v : y.values) CHECK(v == doctest::Approx(0.7));
  }

  SUBCASE("gradients") {
    BilinearUpsample2xT<double> up;
    RngStream rng(119);
    DTensor x({2, 2, 3, 3});
    fill_random(x, rng);
    DTensor w({2, 2, 6, 6});
    fill_random(w, rng);
    auto loss = [&]() { return weighted_sum(up.forward(x), w); };
    loss();
    DTensor dx = up.backward(w);
    check_grad(loss, x, std::vector<double>(dx.values.begin(), dx.values.end()));
  }
}

TEST_CASE("shape mismatches name both shapes") {
  Conv2dT<float> conv(3, 4, 1);
  Tensor bad({1, 2, 4, 4});
  CHECK_THROWS_WITH_AS(conv.forward(bad), doctest::Contains("(1,2,4,4)"),
                       std::invalid_argument);
  Tensor a({2, 3}), b({3, 2});
  CHECK_THROWS_WITH_AS(l1_loss(a, b), doctest::Contains("(2,3)"), std::invalid_argument);
}

TEST_CASE("instance norm output statistics") {
  // before affine (gamma 1, beta 0): per-instance, per-channel mean ~ 0 and
  // variance ~ 1
  InstanceNorm2dT<float> norm(4);
  RngStream rng(127);
  Tensor x({3, 4, 8, 8});
  for (auto& v : x.values) v = rng.next_float() * 5.0f - 1.0f;
  Tensor y = norm.forward(x);
  for (int n = 0; n < 3; ++n)
    for (int c = 0; c < 4; ++c) {
      double mean = 0, var = 0;
      const float* p = y.data() + (int64_t(n) * 4 + c) * 64;
      for (int i = 0; i < 64; ++i) mean += p[i];
      mean /= 64;
      for (int i = 0; i < 64; ++i) var += (p[i] - mean) * (p[i] - mean);
      var /= 64;
      CHECK(std::fabs(mean) < 1e-5);
      CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("conv 1x1 on a 1x1 map equals linear") {
  RngStream rng(131);
  const int cin = 6, cout = 5, n = 7;
  Conv2dT<float> conv(cin, cout, 1);
  conv.init(rng);
  LinearT<float> lin(cin, cout);
  lin.weight().values = conv.weight().values;
  lin.bias().values = conv.bias().values;

  Tensor xc({n, cin, 1, 1});
  for (auto& v : xc.values) v = rng.next_float();
  Tensor xl({n, cin});
  xl.values = xc.values;

  Tensor yc = conv.forward(xc);
  Tensor yl = lin.forward(xl);
  for (size_t i = 0; i < yl.values.size(); ++i)
    CHECK(yc.values[i] == doctest::Approx(yl.values[i]).epsilon(1e-6));
}

TEST_CASE("cosine lr schedule") {
  CHECK(cosine_lr(0, 100, 0.5) == doctest::Approx(0.5));
  CHECK(cosine_lr(100, 100, 0.5) == doctest::Approx(0.0));
  CHECK(cosine_lr(50, 100, 0.5) == doctest::Approx(0.25));
}

TEST_CASE("losses") {
  SUBCASE("l1 of identical tensors is zero") {
    Tensor a({2, 2}, 0.3f), b({2, 2}, 0.3f);
    CHECK(l1_loss(a, b) == doctest::Approx(0.0));
  }

  SUBCASE("bce at logit 0 target 1 is ln 2") {
    Tensor logit({1}, 0.0f), target({1}, 1.0f);
    CHECK(bce_logit_loss(logit, target) == doctest::Approx(std::log(2.0)));
  }

  SUBCASE("bce rejects non-binary targets") {
    Tensor logit({1}, 0.0f), target({1}, 0.5f);
    CHECK_THROWS_AS(bce_logit_loss(logit, target), std::invalid_argument);
  }

  SUBCASE("loss gradients (finite differences)") {
    RngStream rng(137);
    DTensor pred({3, 3}), target({3, 3});
    fill_random(pred, rng);
    fill_random(target, rng);
    pred.ensure_grad();
    pred.zero_grad();
    l1_loss(pred, target);
    auto loss = [&]() {
      DTensor p = pred;
      return l1_loss(p, target);
    };
    check_grad(loss, pred, to_vec(pred));

    DTensor logit({4, 2}), t2({4, 2});
    fill_random(logit, rng, 2.0);
    for (auto& v : t2.values) v = rng.next_float() < 0.5f ? 0.0 : 1.0;
    logit.ensure_grad();
    logit.zero_grad();
    bce_logit_loss(logit, t2);
    auto loss2 = [&]() {
      DTensor l = logit;
      return bce_logit_loss(l, t2);
    };
    check_grad(loss2, logit, to_vec(logit));
  }

  SUBCASE("weighted loss ignores masked elements") {
    Tensor pred({4}), target({4}, 0.0f);
    pred.values = {1.0f, 2.0f, 3.0f, 4.0f};
    std::vector<float> w = {1, 1, 0, 0};
    double l = l1_loss_weighted(pred, target, w);
    CHECK(l == doctest::Approx(1.5));  // mean of |1|, |2|
    // flipping a masked element's value changes nothing
    pred.values[3] = 100.0f;
    pred.zero_grad();
    CHECK(l1_loss_weighted(pred, target, w) == doctest::Approx(1.5));
  }
}

TEST_CASE("adam") {
  SUBCASE("zero gradient and zero decay leave parameters unchanged") {
    Tensor p({3}, 1.5f);
    Adam opt;
    opt.register_param(&p, false);
    p.zero_grad();
    opt.step(0.1);
    for (float v : p.values) CHECK(v == doctest::Approx(1.5f));
  }

  SUBCASE("constant gradient moves parameters against its sign") {
    Tensor p({2}, 0.0f);
    Adam opt;
    opt.register_param(&p, false);
    for (int i = 0; i < 10; ++i) {
      p.grad = {1.0f, -2.0f};
      opt.step(0.05);
    }
    CHECK(p.values[0] < 0.0f);
    CHECK(p.values[1] > 0.0f);
  }

  SUBCASE("quadratic bowl converges") {
    Tensor p({4});
    p.values = {1.0f, -2.0f, 0.5f, 3.0f};
    Adam opt;
    opt.register_param(&p, false);
    for (int i = 0; i < 500; ++i) {
      for (size_t j = 0; j < 4; ++j) p.grad[j] = 2.0f * p.values[j];
      opt.step(0.1);
    }
    for (float v : p.values) CHECK(std::fabs(v) < 1e-3f);
  }

  SUBCASE("non-finite gradient raises") {
    Tensor p({1}, 0.0f);
    Adam opt;
    opt.register_param(&p, false);
    p.grad[0] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_WITH_AS(opt.step(0.1), doctest::Contains("non-finite"), std::runtime_error);
  }

  SUBCASE("decoupled weight decay shrinks parameters") {
    Tensor p({1}, 1.0f);
    Adam opt;
    opt.weight_decay = 0.5;
    opt.register_param(&p, true);
    p.zero_grad();
    opt.step(0.1);
    CHECK(p.values[0] == doctest::Approx(1.0f - 0.1f * 0.5f));
  }
}

TEST_CASE("training determinism") {
  auto run = [](uint64_t seed) {
    RngStream rng(seed);
    LinearT<float> l1(4, 8), l2(8, 2);
    GeluT<float> act;
    l1.init(rng);
    l2.init(rng);
    Adam opt;
    opt.register_param(&l1.weight(), true);
    opt.register_param(&l1.bias(), false);
    opt.register_param(&l2.weight(), true);
    opt.register_param(&l2.bias(), false);

    Tensor x({16, 4});
    RngStream data(7);
    for (auto& v : x.values) v = data.next_float();
    Tensor target({16, 2}, 0.25f);

    for (int step = 0; step < 20; ++step) {
      Tensor h = act.forward(l1.forward(x));
      Tensor y = l2.forward(h);
      l1_loss(y, target);
      Tensor dy({16, 2});
      dy.values.assign(y.grad.begin(), y.grad.end());
      l1.backward(act.backward(l2.backward(dy)));
      opt.step(cosine_lr(step, 20, 1e-2));
    }
    return std::make_pair(l1.weight().values, l2.weight().values);
  };

  auto a = run(42), b = run(42);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  auto c = run(43);
  CHECK(a.first != c.first);
}

TEST_CASE("checkpoint round trip") {
  Tensor a({2, 3});
  Tensor b({4});
  RngStream rng(139);
  for (auto& v : a.values) v = rng.next_float();
  for (auto& v : b.values) v = rng.next_float();

  auto path = std::string("/tmp/bakelight_test_ckpt.blcp");
  save_checkpoint(path, {{"layer.weight", &a}, {"layer.bias", &b}});
  auto loaded = load_checkpoint(path);
  REQUIRE(loaded.count("layer.weight") == 1);
  CHECK(loaded["layer.weight"].shape == a.shape);
  CHECK(loaded["layer.weight"].values == a.values);
  CHECK(loaded["layer.bias"].values == b.values);

  // NamedTensors enforces shapes on load
  Tensor wrong({3, 2});
  NamedTensors nt;
  nt.add("layer.weight", wrong);
  CHECK_THROWS_WITH_AS(nt.load(path), doctest::Contains("shape"), std::runtime_error);
  std::remove(path.c_str());

  CHECK_THROWS(load_checkpoint("/nonexistent/x.blcp"));
}
