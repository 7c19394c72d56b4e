#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "fringe/neural.hpp"
#include "fringe/nn/layers.hpp"
#include "fringe/nn/ops.hpp"
#include "fringe/nn/optim.hpp"
#include "gradcheck.hpp"
#include "support.hpp"

using namespace fringe;
using namespace fringe::nn;
using fringe::test::TensorD;
using fringe::test::GradCompare;
using fringe::test::dot;
using fringe::test::module_grad_error;
using fringe::test::naive_conv;
using fringe::test::probe;


TEST_SUITE("nn") {
  TEST_CASE("convolution matches the nested-loop reference") {
    std::mt19937_64 rng(1);
    struct Case {
      int n, ci, co, h, w, k, stride, pad;
    };
    const Case cases[] = {{2, 3, 4, 8, 8, 3, 1, 1},  {1, 1, 1, 5, 7, 3, 1, 0},    {4, 4, 4, 16, 16, 3, 1, 1},
                          {2, 3, 5, 16, 16, 3, 2, 1}, {1, 2, 3, 9, 6, 1, 1, 0},   {3, 2, 2, 7, 7, 5, 2, 2},
                          {4, 4, 2, 16, 16, 3, 2, 0}, {1, 6, 1, 10, 12, 3, 1, 1}};
    for (const auto& c : cases) {
      const TensorD x = test::random_tensor<double>({c.n, c.ci, c.h, c.w}, rng);
      const TensorD w = test::random_tensor<double>({c.co, c.ci, c.k, c.k}, rng);
      const TensorD b = test::random_tensor<double>({1, 1, 1, c.co}, rng);
      const TensorD y = conv2d_forward(x, w, b, {c.stride, c.pad});
      const TensorD r = naive_conv(x, w, b, c.stride, c.pad);
      REQUIRE(y.same_dims(r));
      double err = 0;
      for (std::size_t i = 0; i < y.size(); ++i) err = std::max(err, std::abs(y[i] - r[i]));
      CHECK(err <= 1e-12);
    }
  }

  TEST_CASE("convolution special cases and errors") {
    std::mt19937_64 rng(2);
    const TensorD x = test::random_tensor<double>({1, 1, 6, 6}, rng);
    const TensorD id({1, 1, 1, 1}, 1.0);
    const TensorD zb({1, 1, 1, 1}, 0.0);
    const TensorD y = conv2d_forward(x, id, zb, {1, 0});
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);

    const TensorD c({1, 1, 6, 6}, 3.5);
    const TensorD avg({1, 1, 3, 3}, 1.0 / 9.0);
    const TensorD ya = conv2d_forward(c, avg, zb, {1, 1});
    for (int yy = 1; yy < 5; ++yy)
      for (int xx = 1; xx < 5; ++xx) CHECK(ya.at(0, 0, yy, xx) == doctest::Approx(3.5).epsilon(1e-14));

    const TensorD w2 = test::random_tensor<double>({2, 3, 3, 3}, rng);
    CHECK_THROWS_AS(conv2d_forward(x, w2, TensorD(1, 1, 1, 2), {1, 1}), ValidationError);
  }

  TEST_CASE("convolution backward: zero upstream, linearity, finite differences") {
    std::mt19937_64 rng(3);
    struct Case {
      int n, ci, co, h, w, k, stride, pad;
    };
    const Case cases[] = {{1, 1, 1, 5, 5, 3, 1, 1}, {2, 3, 2, 6, 7, 3, 1, 1}, {1, 2, 3, 8, 8, 3, 2, 1},
                          {2, 2, 2, 5, 4, 1, 1, 0}, {1, 3, 1, 7, 7, 3, 1, 0}, {1, 1, 2, 9, 9, 5, 2, 2}};
    for (const auto& c : cases) {
      TensorD x = test::random_tensor<double>({c.n, c.ci, c.h, c.w}, rng);
      TensorD w = test::random_tensor<double>({c.co, c.ci, c.k, c.k}, rng);
      TensorD b = test::random_tensor<double>({1, 1, 1, c.co}, rng);
      const ConvGeometry geo{c.stride, c.pad};
      const TensorD y = conv2d_forward(x, w, b, geo);
      const TensorD g = test::random_tensor<double>(y.dims(), rng);
      const auto gr = conv2d_backward(x, w, g, geo);

      const auto zero = conv2d_backward(x, w, TensorD(y.dims()), geo);
      for (double v : zero.x.values()) CHECK(v == 0.0);
      for (double v : zero.w.values()) CHECK(v == 0.0);
      for (double v : zero.b.values()) CHECK(v == 0.0);

      TensorD g3 = g;
      for (auto& v : g3.values()) v *= 3.0;
      const auto gr3 = conv2d_backward(x, w, g3, geo);
      for (std::size_t i = 0; i < gr.w.size(); ++i) CHECK(gr3.w[i] == doctest::Approx(3.0 * gr.w[i]).epsilon(1e-12));

      auto loss = [&] { return dot(g, conv2d_forward(x, w, b, geo)); };
      GradCompare cmp;
      probe(x.values(), loss, gr.x.values(), cmp, rng);
      probe(w.values(), loss, gr.w.values(), cmp, rng);
      probe(b.values(), loss, gr.b.values(), cmp, rng);
      CHECK(cmp.relative() <= 1e-4);
    }
  }

  TEST_CASE("elementwise and reshaping ops pass gradient checks") {
    std::mt19937_64 rng(4);
    const std::array<int, 4> shapes[] = {{1, 1, 4, 4}, {2, 3, 2, 5}, {1, 4, 6, 6}, {3, 2, 3, 3}, {2, 1, 8, 2}};
    for (const auto& d : shapes) {
      TensorD x = test::random_tensor<double>(d, rng);
      const TensorD g = test::random_tensor<double>(d, rng);
      {
        const TensorD y = relu_forward(x);
        const TensorD gx = relu_backward(y, g);
        GradCompare cmp;
        probe(x.values(), [&] { return dot(g, relu_forward(x)); }, gx.values(), cmp, rng);
        CHECK(cmp.relative() <= 1e-4);
      }
      {
        const TensorD gu = test::random_tensor<double>({d[0], d[1], 2 * d[2], 2 * d[3]}, rng);
        const TensorD gx = upsample_nearest2x_backward(gu);
        GradCompare cmp;
        probe(x.values(), [&] { return dot(gu, upsample_nearest2x(x)); }, gx.values(), cmp, rng);
        CHECK(cmp.relative() <= 1e-4);
      }
      {
        TensorD other = test::random_tensor<double>({d[0], 2, d[2], d[3]}, rng);
        const TensorD cat = concat_channels(x, other);
        CHECK(cat.channels() == d[1] + 2);
        const auto [a, b] = split_channels(cat, d[1]);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(a[i] == x[i]);
        for (std::size_t i = 0; i < other.size(); ++i) CHECK(b[i] == other[i]);
      }
      {
        TensorD target = test::random_tensor<double>(d, rng);
        const auto l = mse_loss(x, target);
        GradCompare cmp;
        probe(x.values(), [&] { return mse_loss(x, target).loss; }, l.grad.values(), cmp, rng);
        CHECK(cmp.relative() <= 1e-6);
      }
    }
  }

  TEST_CASE("nearest-neighbour upsampling and MSE closed forms") {
    TensorD x(1, 1, 2, 2);
    x[0] = 1, x[1] = 2, x[2] = 3, x[3] = 4;
    const TensorD y = upsample_nearest2x(x);
    const double want[4][4] = {{1, 1, 2, 2}, {1, 1, 2, 2}, {3, 3, 4, 4}, {3, 3, 4, 4}};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) CHECK(y.at(0, 0, r, c) == want[r][c]);

    std::mt19937_64 rng(5);
    const TensorD p = test::random_tensor<double>({2, 2, 3, 3}, rng);
    CHECK(mse_loss(p, p).loss == 0.0);
    TensorD q = p;
    for (auto& v : q.values()) v -= 1.0;
    CHECK(mse_loss(p, q).loss == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(mse_loss(p, TensorD(1, 2, 3, 3)), ValidationError);
  }

  TEST_CASE("layer modules pass gradient checks on five shapes") {
    const std::array<int, 4> shapes[] = {{1, 2, 4, 4}, {2, 2, 6, 4}, {1, 2, 8, 8}, {3, 2, 2, 6}, {1, 2, 10, 6}};
    std::uint64_t seed = 10;
    for (const auto& d : shapes) {
      Conv2d<double> conv("c", 2, 3, 3, 1, Activation::relu);
      CHECK(module_grad_error(conv, d, seed++) <= 1e-4);
      Conv2d<double> lin("l", 2, 2, 3, 2, Activation::linear);
      CHECK(module_grad_error(lin, d, seed++) <= 1e-4);
      ResidualBlock<double> res("r", 2);
      CHECK(module_grad_error(res, d, seed++) <= 1e-4);
      Sequential<double> downup;
      downup.add(std::make_unique<Downsample2x<double>>("down", 2, 3));
      downup.add(std::make_unique<Upsample2x<double>>("up", 3, 2));
      CHECK(module_grad_error(downup, d, seed++) <= 1e-4);
    }
  }

  TEST_CASE("networks pass end-to-end gradient checks") {
    std::uint64_t seed = 50;
    for (const std::array<int, 4> d : {std::array{1, 1, 8, 8}, {2, 1, 4, 6}}) {
      neural::Cnn1Net<double> cnn1(3, 2);
      CHECK(module_grad_error(cnn1, d, seed++) <= 1e-4);
    }
    for (const std::array<int, 4> d : {std::array{1, 2, 8, 8}, {2, 2, 4, 6}}) {
      neural::TwoScaleNet<double> net(2, 1, 2, 2);
      CHECK(module_grad_error(net, d, seed++) <= 1e-4);
    }
  }

  TEST_CASE("residual block with zero weights is the identity") {
    std::mt19937_64 rng(6);
    ResidualBlock<double> res("r", 3);
    for (auto* p : res.parameters()) p->value.fill(0.0);
    const TensorD x = test::random_tensor<double>({2, 3, 5, 5}, rng);
    const TensorD y = res.forward(x);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
    CHECK(y.same_dims(x));
    CHECK_THROWS_AS(res.forward(TensorD(1, 2, 5, 5)), ValidationError);
  }

  TEST_CASE("down/up sampling shape contract") {
    Downsample2x<double> down("d", 1, 4);
    Upsample2x<double> up("u", 4, 2);
    const TensorD x(1, 1, 4, 4, 1.0);
    const TensorD h = down.forward(x);
    CHECK(h.dims() == std::array<int, 4>{1, 4, 2, 2});
    CHECK(up.forward(h).dims() == std::array<int, 4>{1, 2, 4, 4});
    CHECK_THROWS_AS(down.forward(TensorD(1, 1, 5, 4)), ValidationError);
  }

  TEST_CASE("forward passes are deterministic") {
    neural::TwoScaleNet<float> net(4, 1, 2, 2);
    kaiming_init(net, 3);
    std::mt19937_64 rng(7);
    const auto x = test::random_tensor<float>({2, 2, 16, 16}, rng);
    const auto a = net.infer(x);
    const auto b = net.infer(x);
    const auto c = net.forward(x);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == b[i]);
      CHECK(a[i] == c[i]);
    }
  }

  TEST_CASE("Kaiming initialisation") {
    neural::Cnn1Net<float> net(8, 2);
    kaiming_init(net, 9);
    for (auto* p : net.parameters()) {
      const auto& d = p->value.dims();
      double peak = 0;
      for (float v : p->value.values()) peak = std::max(peak, static_cast<double>(std::abs(v)));
      if (p->name.ends_with(".bias") || p->name.ends_with(".conv2.weight") || p->name == "output.weight") {
        CHECK(peak == 0.0);
      } else {
        CHECK(peak > 0.0);
        CHECK(peak <= std::sqrt(6.0 / (d[1] * d[2] * d[3])));
      }
    }
    neural::Cnn1Net<float> again(8, 2);
    kaiming_init(again, 9);
    auto pa = net.parameters(), pb = again.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i)
      for (std::size_t j = 0; j < pa[i]->value.size(); ++j) CHECK(pa[i]->value[j] == pb[i]->value[j]);
  }

  TEST_CASE("Adam matches the NumPy reference") {
    const auto& o = test::oracles()["adam"];
    Parameter<double> p("p", {1, 1, 1, 3});
    for (int i = 0; i < 3; ++i) p.value[i] = o["initial"][i];
    OptimState<double> st;
    st.config.learning_rate = o["lr"];
    for (std::size_t s = 0; s < o["grads"].size(); ++s) {
      for (int i = 0; i < 3; ++i) p.grad[i] = o["grads"][s][i];
      adam_step<double>({&p}, st);
      for (int i = 0; i < 3; ++i) CHECK(std::abs(p.value[i] - o["after"][s][i].get<double>()) <= 1e-12);
    }
    CHECK(st.step == 3);
  }

  TEST_CASE("Adam closed forms and determinism") {
    Parameter<double> p("p", {1, 1, 1, 1});
    p.value[0] = 2.0;
    OptimState<double> st;
    st.config.learning_rate = 0.1;
    p.grad[0] = 1.0;
    adam_step<double>({&p}, st);
    CHECK(p.value[0] == doctest::Approx(1.9).epsilon(1e-7));

    Parameter<double> q("q", {1, 1, 2, 2});
    q.value.fill(0.7);
    OptimState<double> sq;
    adam_step<double>({&q}, sq);
    for (double v : q.value.values()) CHECK(v == 0.7);

    auto run = [] {
      std::mt19937_64 rng(12);
      Parameter<float> r("r", {1, 2, 3, 3});
      r.value = test::random_tensor<float>(r.value.dims(), rng);
      OptimState<float> s;
      s.config.learning_rate = 1e-2;
      for (int i = 0; i < 100; ++i) {
        r.grad = test::random_tensor<float>(r.value.dims(), rng);
        adam_step<float>({&r}, s);
      }
      return std::vector<float>(r.value.values().begin(), r.value.values().end());
    };
    CHECK(run() == run());
  }
}
