#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "songlm/ops.hpp"
#include "songlm/rng.hpp"
#include "songlm/tensor.hpp"

namespace testing {

using songlm::ag::Shape;
using songlm::ag::Tensor;
using TD = Tensor<double>;

inline TD random_tensor(songlm::Rng& rng, Shape shape, double scale = 1.0) {
  std::vector<double> v(songlm::ag::numel(shape));
  for (auto& x : v) x = rng.normal(0.0, scale);
  return TD::from_data(std::move(shape), std::move(v), true);
}

inline Shape random_shape(songlm::Rng& rng, std::size_t rank, std::size_t max_dim = 4) {
  Shape s(rank);
  for (auto& d : s) d = 1 + rng.below(max_dim);
  return s;
}

/// Reduces an op's output to a scalar through fixed random weights, so
/// every output element contributes a distinct gradient.
inline TD weighted_sum(const TD& y, std::uint64_t seed) {
  songlm::Rng rng(seed);
  std::vector<double> w(y.numel());
  for (auto& x : w) x = rng.uniform(-1.0, 1.0);
  auto wt = TD::from_data(y.shape(), std::move(w), false);
  return songlm::ag::sum(songlm::ag::mul(y, wt));
}

/// Largest gradient discrepancy relative to the largest analytic entry,
/// over all inputs. Each element's analytic value comes from one backward
/// pass; the numeric value from a central difference with step h.
inline double gradcheck(const std::function<TD(const std::vector<TD>&)>& f, std::vector<TD> inputs, double h = 1e-5) {
  for (auto& x : inputs) x.clear_grad();
  auto loss = f(inputs);
  loss.backward();
  double worst = 0.0;
  for (auto& x : inputs) {
    if (!x.requires_grad()) continue;
    std::vector<double> analytic(x.numel(), 0.0);
    if (x.has_grad()) std::copy(x.grad().begin(), x.grad().end(), analytic.begin());
    std::vector<double> numeric(x.numel());
    for (std::size_t i = 0; i < x.numel(); ++i) {
      const double orig = x.data()[i];
      double fp, fm;
      {
        songlm::ag::NoGradGuard g;
        x.data()[i] = orig + h;
        fp = f(inputs).item();
        x.data()[i] = orig - h;
        fm = f(inputs).item();
      }
      x.data()[i] = orig;
      numeric[i] = (fp - fm) / (2 * h);
    }
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
      scale = std::max(scale, std::abs(analytic[i]));
    }
    worst = std::max(worst, diff / (scale + 1e-8));
  }
  return worst;
}

}  // namespace testing
