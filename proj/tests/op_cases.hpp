#pragma once

#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "songlm/gpt.hpp"
#include "songlm/rnn.hpp"

namespace testing {

struct OpCase {
  std::string name;
  std::function<double(std::uint64_t seed)> run;  // worst relative error for one random instance
};

inline std::vector<OpCase> op_cases() {
  namespace ag = songlm::ag;
  using songlm::Rng;
  std::vector<OpCase> cases;
  auto add = [&](std::string name, std::function<double(std::uint64_t)> fn) { cases.push_back({std::move(name), std::move(fn)}); };

  add("matmul", [](std::uint64_t s) {
    Rng r(s);
    const auto m = 1 + r.below(4), k = 1 + r.below(4), n = 1 + r.below(4);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::matmul(x[0], x[1]), s); },
                     {random_tensor(r, {m, k}), random_tensor(r, {k, n})});
  });
  add("transpose", [](std::uint64_t s) {
    Rng r(s);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::transpose(x[0]), s); },
                     {random_tensor(r, random_shape(r, 2))});
  });
  add("add", [](std::uint64_t s) {
    Rng r(s);
    auto shape = random_shape(r, 2);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::add(x[0], x[1]), s); },
                     {random_tensor(r, shape), random_tensor(r, shape)});
  });
  add("add_broadcast", [](std::uint64_t s) {
    Rng r(s);
    auto shape = random_shape(r, 2);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::add(x[0], x[1]), s); },
                     {random_tensor(r, shape), random_tensor(r, {shape[1]})});
  });
  add("sub", [](std::uint64_t s) {
    Rng r(s);
    auto shape = random_shape(r, 2);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::sub(x[0], x[1]), s); },
                     {random_tensor(r, shape), random_tensor(r, shape)});
  });
  add("mul", [](std::uint64_t s) {
    Rng r(s);
    auto shape = random_shape(r, 2);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::mul(x[0], x[1]), s); },
                     {random_tensor(r, shape), random_tensor(r, shape)});
  });
  add("scale", [](std::uint64_t s) {
    Rng r(s);
    const double f = r.uniform(-2.0, 2.0);
    return gradcheck([s, f](const std::vector<TD>& x) { return weighted_sum(ag::scale(x[0], f), s); },
                     {random_tensor(r, random_shape(r, 2))});
  });
  add("embedding", [](std::uint64_t s) {
    Rng r(s);
    const auto v = 2 + r.below(3), h = 1 + r.below(4), t = 1 + r.below(4);
    std::vector<songlm::TokenId> ids(t);
    for (auto& i : ids) i = static_cast<songlm::TokenId>(r.below(v));
    return gradcheck([s, ids](const std::vector<TD>& x) { return weighted_sum(ag::embedding(x[0], ids), s); },
                     {random_tensor(r, {v, h})});
  });
  add("layer_norm", [](std::uint64_t s) {
    Rng r(s);
    const auto t = 1 + r.below(4), h = 2 + r.below(3);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::layer_norm(x[0], x[1], x[2]), s); },
                     {random_tensor(r, {t, h}), random_tensor(r, {h}), random_tensor(r, {h})});
  });
  add("softmax_last", [](std::uint64_t s) {
    Rng r(s);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::softmax(x[0], 1), s); },
                     {random_tensor(r, random_shape(r, 2))});
  });
  add("softmax_axis0", [](std::uint64_t s) {
    Rng r(s);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::softmax(x[0], 0), s); },
                     {random_tensor(r, random_shape(r, 3))});
  });
  add("gelu", [](std::uint64_t s) {
    Rng r(s);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::gelu(x[0]), s); },
                     {random_tensor(r, random_shape(r, 2))});
  });
  add("tanh", [](std::uint64_t s) {
    Rng r(s);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::tanh(x[0]), s); },
                     {random_tensor(r, random_shape(r, 2))});
  });
  add("sigmoid", [](std::uint64_t s) {
    Rng r(s);
    return gradcheck([s](const std::vector<TD>& x) { return weighted_sum(ag::sigmoid(x[0]), s); },
                     {random_tensor(r, random_shape(r, 2))});
  });
  add("dropout", [](std::uint64_t s) {
    Rng r(s);
    const double p = r.uniform(0.1, 0.6);
    // The mask is redrawn from the same seed on every evaluation.
    return gradcheck(
        [s, p](const std::vector<TD>& x) {
          Rng mask(s + 17);
          return weighted_sum(ag::dropout(x[0], p, true, &mask), s);
        },
        {random_tensor(r, random_shape(r, 2))});
  });
  add("concat", [](std::uint64_t s) {
    Rng r(s);
    const std::size_t axis = r.below(2);
    auto a = random_shape(r, 2), b = a;
    b[axis] = 1 + r.below(4);
    return gradcheck([s, axis](const std::vector<TD>& x) { return weighted_sum(ag::concat(x, axis), s); },
                     {random_tensor(r, a), random_tensor(r, b)});
  });
  add("slice", [](std::uint64_t s) {
    Rng r(s);
    auto shape = random_shape(r, 2);
    const std::size_t axis = r.below(2);
    const auto b = r.below(shape[axis]);
    const auto e = b + 1 + r.below(shape[axis] - b);
    return gradcheck([s, axis, b, e](const std::vector<TD>& x) { return weighted_sum(ag::slice(x[0], axis, b, e), s); },
                     {random_tensor(r, shape)});
  });
  add("causal_mask_softmax", [](std::uint64_t s) {
    Rng r(s);
    const auto t = 1 + r.below(4);
    std::optional<std::size_t> span;
    if (r.bernoulli(0.5)) span = 1 + r.below(3);
    return gradcheck(
        [s, span](const std::vector<TD>& x) { return weighted_sum(ag::softmax(ag::causal_mask(x[0], span), 1), s); },
        {random_tensor(r, {t, t})});
  });
  add("cross_entropy", [](std::uint64_t s) {
    Rng r(s);
    const auto t = 1 + r.below(4), v = 2 + r.below(3);
    std::vector<songlm::TokenId> targets(t);
    std::vector<std::uint8_t> mask(t);
    for (std::size_t i = 0; i < t; ++i) {
      targets[i] = static_cast<songlm::TokenId>(r.below(v));
      mask[i] = i == 0 || r.bernoulli(0.7);
    }
    return gradcheck(
        [targets, mask](const std::vector<TD>& x) { return ag::cross_entropy_loss(x[0], targets, mask); },
        {random_tensor(r, {t, v})});
  });
  add("sum", [](std::uint64_t s) {
    Rng r(s);
    return gradcheck([](const std::vector<TD>& x) { return ag::sum(x[0]); }, {random_tensor(r, random_shape(r, 2))});
  });
  add("mean", [](std::uint64_t s) {
    Rng r(s);
    return gradcheck([](const std::vector<TD>& x) { return ag::mean(x[0]); }, {random_tensor(r, random_shape(r, 2))});
  });
  return cases;
}

/// Whole-model checks: loss gradient against every parameter.
template <class Model>
double model_gradcheck(const Model& model, const std::vector<songlm::TokenId>& ids) {
  auto params = model.parameter_tensors();
  std::span<const songlm::TokenId> all(ids);
  return gradcheck(
      [&](const std::vector<TD>&) {
        auto logits = model.logits(all.first(ids.size() - 1), {});
        return songlm::ag::cross_entropy_loss(logits, all.subspan(1));
      },
      params);
}

}  // namespace testing
