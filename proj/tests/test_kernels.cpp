#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "songlm/kernels.hpp"
#include "songlm/rng.hpp"

using namespace songlm;

TEST_SUITE("kernels") {
  TEST_CASE("gemm matches the serial reference in every transpose mode") {
    Rng rng(3);
    for (int trial = 0; trial < 24; ++trial) {
      const std::size_t m = 1 + rng.below(70), n = 1 + rng.below(70), k = 1 + rng.below(70);
      const bool ta = trial & 1, tb = trial & 2, acc = trial & 4;
      std::vector<float> a(m * k), b(k * n), c(m * n), r(m * n);
      for (auto& x : a) x = static_cast<float>(rng.normal());
      for (auto& x : b) x = static_cast<float>(rng.normal());
      for (std::size_t i = 0; i < c.size(); ++i) c[i] = r[i] = static_cast<float>(rng.normal());
      kernels::gemm(ta, tb, m, n, k, a.data(), b.data(), c.data(), acc);
      kernels::gemm_serial(ta, tb, m, n, k, a.data(), b.data(), r.data(), acc);
      for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == doctest::Approx(r[i]).epsilon(1e-4));
    }
  }

  TEST_CASE("2x3 by 3x2 by hand") {
    const double a[] = {1, 2, 3, 4, 5, 6};
    const double b[] = {7, 8, 9, 10, 11, 12};
    double c[4] = {};
    kernels::gemm(false, false, 2, 2, 3, a, b, c, false);
    CHECK(c[0] == 58);
    CHECK(c[1] == 64);
    CHECK(c[2] == 139);
    CHECK(c[3] == 154);
  }

  TEST_CASE("softmax rows and the fully masked row") {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> x{0, 0, 0, -inf, -inf, -inf, 1, 2, -inf};
    std::vector<double> y(9), z(9);
    kernels::softmax_rows(x.data(), y.data(), 3, 3);
    kernels::softmax_rows_serial(x.data(), z.data(), 3, 3);
    CHECK(y[0] == doctest::Approx(1.0 / 3));
    CHECK(y[3] == 0.0);
    CHECK(y[8] == 0.0);
    CHECK(y[6] + y[7] == doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i < 9; ++i) CHECK(y[i] == doctest::Approx(z[i]));
  }

  TEST_CASE("layer norm matches the serial reference") {
    Rng rng(5);
    const std::size_t rows = 33, cols = 17;
    std::vector<float> x(rows * cols), g(cols), b(cols);
    for (auto& v : x) v = static_cast<float>(rng.normal(1.0, 3.0));
    for (auto& v : g) v = static_cast<float>(rng.normal(1.0, 0.2));
    for (auto& v : b) v = static_cast<float>(rng.normal());
    std::vector<float> y(x.size()), xh(x.size()), inv(rows), y2(x.size()), xh2(x.size()), inv2(rows);
    kernels::layer_norm_rows(x.data(), g.data(), b.data(), y.data(), xh.data(), inv.data(), rows, cols, 1e-5);
    kernels::layer_norm_rows_serial(x.data(), g.data(), b.data(), y2.data(), xh2.data(), inv2.data(), rows, cols, 1e-5);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(y[i] == doctest::Approx(y2[i]).epsilon(1e-5));
      CHECK(xh[i] == doctest::Approx(xh2[i]).epsilon(1e-5));
    }
    double mean = 0;
    for (std::size_t j = 0; j < cols; ++j) mean += xh[j];
    CHECK(std::abs(mean / cols) < 1e-5);
  }
}
