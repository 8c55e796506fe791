#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "songlm/arborescence.hpp"
#include "songlm/rng.hpp"

namespace testing {

inline bool reaches_root(const std::vector<long>& parent, std::size_t root) {
  const std::size_t n = parent.size();
  for (std::size_t v = 0; v < n; ++v) {
    std::size_t x = v, steps = 0;
    while (x != root) {
      if (++steps > n || parent[x] < 0) return false;
      x = static_cast<std::size_t>(parent[x]);
    }
  }
  return true;
}

/// Best total weight over every parent assignment (n^(n-1) of them).
inline double brute_force_best(const songlm::Matrix& w, std::size_t root) {
  const std::size_t n = w.rows;
  std::vector<long> parent(n, -1);
  double best = -std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, double)> rec = [&](std::size_t v, double acc) {
    if (v == n) {
      if (reaches_root(parent, root)) best = std::max(best, acc);
      return;
    }
    if (v == root) return rec(v + 1, acc);
    for (std::size_t h = 0; h < n; ++h) {
      if (h == v) continue;
      parent[v] = static_cast<long>(h);
      rec(v + 1, acc + w(h, v));
    }
    parent[v] = -1;
  };
  rec(0, 0.0);
  return best;
}

/// Uniformly random node order; each node hangs from a random earlier one.
inline std::vector<long> random_arborescence(std::size_t n, std::size_t root, songlm::Rng& rng) {
  std::vector<std::size_t> order;
  for (std::size_t v = 0; v < n; ++v)
    if (v != root) order.push_back(v);
  rng.shuffle(order.begin(), order.end());
  order.insert(order.begin(), root);
  std::vector<long> parent(n, -1);
  for (std::size_t i = 1; i < n; ++i) parent[order[i]] = static_cast<long>(order[rng.below(i)]);
  return parent;
}

inline double tree_weight(const songlm::Matrix& w, const std::vector<long>& parent) {
  double s = 0;
  for (std::size_t v = 0; v < parent.size(); ++v)
    if (parent[v] >= 0) s += w(static_cast<std::size_t>(parent[v]), v);
  return s;
}

inline songlm::Matrix random_weights(std::size_t n, songlm::Rng& rng) {
  songlm::Matrix w(n, n);
  for (auto& x : w.data) x = rng.uniform();
  return w;
}

}  // namespace testing
