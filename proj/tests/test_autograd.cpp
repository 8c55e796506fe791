#include <doctest.h>

#include <cmath>
#include <limits>

#include "op_cases.hpp"
#include "songlm/optim.hpp"

using namespace songlm;
using TF = ag::Tensor<float>;
using TD = ag::Tensor<double>;

TEST_SUITE("autograd") {
  TEST_CASE("every op passes the finite-difference check") {
    for (const auto& c : testing::op_cases()) {
      double worst = 0.0;
      for (std::uint64_t seed = 1; seed <= 20; ++seed) worst = std::max(worst, c.run(seed));
      INFO(c.name);
      CHECK(worst < 1e-4);
    }
  }

  TEST_CASE("softmax of equal entries is uniform") {
    auto x = TD::from_data({3}, {0, 0, 0});
    auto y = ag::softmax(x, 0);
    for (double v : y.data()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));
  }

  TEST_CASE("cross-entropy vanishes for a confident correct prediction") {
    auto logits = TD::from_data({2, 3}, {100, 0, 0, 0, 0, 100});
    std::vector<TokenId> t{0, 2};
    CHECK(ag::cross_entropy_loss(logits, t).item() < 1e-30);
  }

  TEST_CASE("matmul by hand") {
    auto a = TF::from_data({2, 3}, {1, 2, 3, 4, 5, 6});
    auto b = TF::from_data({3, 2}, {7, 8, 9, 10, 11, 12});
    auto c = ag::matmul(a, b);
    CHECK(c.shape() == ag::Shape{2, 2});
    CHECK(c.at(0, 0) == 58);
    CHECK(c.at(0, 1) == 64);
    CHECK(c.at(1, 0) == 139);
    CHECK(c.at(1, 1) == 154);
  }

  TEST_CASE("x squared at 3 has gradient 6, and gradients accumulate") {
    auto x = TD::scalar(3.0, true);
    auto y = ag::mul(x, x);
    y.backward();
    CHECK(x.grad()[0] == doctest::Approx(6.0));
    ag::mul(x, x).backward();
    CHECK(x.grad()[0] == doctest::Approx(12.0));
    x.zero_grad();
    ag::mul(x, x).backward();
    CHECK(x.grad()[0] == doctest::Approx(6.0));
  }

  TEST_CASE("backward needs a scalar") {
    auto x = TD::from_data({2}, {1, 2}, true);
    CHECK_THROWS_AS(ag::scale(x, 2.0).backward(), ag::ShapeError);
  }

  TEST_CASE("dropout in eval mode is the identity, gradient included") {
    Rng rng(1);
    auto x = TD::from_data({2, 2}, {1, 2, 3, 4}, true);
    auto y = ag::dropout(x, 0.5, false, &rng);
    for (std::size_t i = 0; i < 4; ++i) CHECK(y.data()[i] == x.data()[i]);
    ag::sum(y).backward();
    for (double g : x.grad()) CHECK(g == 1.0);
    CHECK_THROWS(ag::dropout(x, 1.5, true, &rng));
    CHECK_THROWS(ag::dropout(x, -0.1, false, &rng));
  }

  TEST_CASE("shape mismatches raise") {
    auto a = TD::zeros({2, 3});
    auto b = TD::zeros({2, 3});
    CHECK_THROWS_AS(ag::matmul(a, b), ag::ShapeError);
    CHECK_THROWS_AS(ag::add(a, TD::zeros({2})), ag::ShapeError);
    CHECK_THROWS_AS(ag::mul(a, TD::zeros({3, 2})), ag::ShapeError);
    CHECK_THROWS_AS(TD::from_data({2, 2}, {1, 2, 3}), ag::ShapeError);
  }

  TEST_CASE("no graph under NoGradGuard") {
    auto x = TD::from_data({2}, {1, 2}, true);
    ag::NoGradGuard g;
    auto y = ag::mul(x, x);
    CHECK_FALSE(y.requires_grad());
  }

  TEST_CASE("softmax rows sum to one and cross-entropy is nonnegative") {
    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
      auto x = testing::random_tensor(rng, testing::random_shape(rng, 2, 8), 5.0);
      auto y = ag::softmax(x, 1);
      const auto cols = y.size(1);
      for (std::size_t r = 0; r < y.size(0); ++r) {
        double s = 0;
        for (std::size_t c = 0; c < cols; ++c) s += y.at(r, c);
        CHECK(std::abs(s - 1.0) < 1e-6);
      }
      std::vector<TokenId> t(x.size(0), 0);
      CHECK(ag::cross_entropy_loss(x, t).item() >= 0.0);
    }
  }
}

TEST_SUITE("autograd") {
  TEST_CASE("first Adam step is -lr times the gradient sign") {
    // Closed form: m1 = (1-b1) g, v1 = (1-b2) g^2; bias-corrected m/sqrt(v) = g/|g|.
    const double lr = 1e-3, g = 1.0, eps = 1e-8;
    const double expected = -lr * g / (std::sqrt(g * g) + eps);
    auto w = TD::scalar(0.0, true);
    Optimizer<double> opt({w}, OptimizerConfig::adam(lr));
    w.node()->ensure_grad();
    w.grad()[0] = g;
    opt.step();
    CHECK(w.item() == doctest::Approx(expected).epsilon(1e-12));
    CHECK(opt.steps() == 1);
  }

  TEST_CASE("Adam and AdamW coincide without weight decay") {
    auto a = TD::from_data({3}, {0.5, -1, 2}, true);
    auto b = TD::from_data({3}, {0.5, -1, 2}, true);
    Optimizer<double> oa({a}, OptimizerConfig::adam(1e-2));
    Optimizer<double> ob({b}, OptimizerConfig::adamw(1e-2, 0.0));
    for (int s = 0; s < 5; ++s) {
      for (auto* t : {&a, &b}) {
        t->zero_grad();
        ag::sum(ag::mul(*t, *t)).backward();
      }
      oa.step();
      ob.step();
    }
    for (std::size_t i = 0; i < 3; ++i) CHECK(a.data()[i] == b.data()[i]);
  }

  TEST_CASE("AdamW decays weights directly") {
    auto w = TD::scalar(2.0, true);
    Optimizer<double> opt({w}, OptimizerConfig::adamw(0.1, 0.5));
    w.node()->ensure_grad();
    opt.step();
    // Zero gradient: only the decoupled decay moves the weight.
    CHECK(w.item() == doctest::Approx(2.0 - 0.1 * 0.5 * 2.0));
  }

  TEST_CASE("zero gradient without decay leaves parameters unchanged") {
    auto w = TD::from_data({2}, {1.5, -2.5}, true);
    Optimizer<double> opt({w}, OptimizerConfig::adam(1e-3));
    w.node()->ensure_grad();
    opt.step();
    CHECK(w.data()[0] == 1.5);
    CHECK(w.data()[1] == -2.5);
  }

  TEST_CASE("step without gradients raises") {
    auto w = TD::scalar(1.0, true);
    Optimizer<double> opt({w}, OptimizerConfig::adam());
    CHECK_THROWS(opt.step());
  }

  TEST_CASE("global norm clipping") {
    auto w = TD::from_data({2}, {0, 0}, true);
    w.node()->ensure_grad();
    w.grad()[0] = 3;
    w.grad()[1] = 4;
    CHECK(clip_grad_norm<double>({w}, 1.0) == doctest::Approx(5.0));
    CHECK(w.grad()[0] == doctest::Approx(0.6));
    CHECK(w.grad()[1] == doctest::Approx(0.8));
  }
}
