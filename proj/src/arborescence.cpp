#include "songlm/arborescence.hpp"

#include <limits>
#include <stdexcept>
#include <string>

namespace songlm {

nlohmann::json Arborescence::to_json() const {
  return {{"root", root}, {"parent", parent}, {"total_weight", total_weight}, {"flagged", flagged}};
}

namespace {

struct Edge {
  std::size_t u, v;
  double w;
  std::size_t head;  // original head index, for tie-breaks
};

bool better(const Edge& a, const Edge& b) {
  if (a.w != b.w) return a.w > b.w;
  return a.head < b.head;
}

// Returns, for every node, the index into `edges` of its incoming edge
// (npos at the root).
std::vector<std::size_t> solve(std::size_t n, std::size_t root, const std::vector<Edge>& edges) {
  constexpr auto npos = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> in(n, npos);
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& E = edges[e];
    if (E.v == root || E.u == E.v) continue;
    if (in[E.v] == npos || better(E, edges[in[E.v]])) in[E.v] = e;
  }
  for (std::size_t v = 0; v < n; ++v)
    if (v != root && in[v] == npos) throw std::invalid_argument("node unreachable from the root");

  std::vector<std::size_t> comp(n, npos), mark(n, npos);
  std::size_t count = 0;
  bool has_cycle = false;
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t v = s;
    while (v != root && mark[v] == npos && comp[v] == npos) {
      mark[v] = s;
      v = edges[in[v]].u;
    }
    if (v != root && comp[v] == npos && mark[v] == s) {
      has_cycle = true;
      for (std::size_t x = edges[in[v]].u; x != v; x = edges[in[x]].u) comp[x] = count;
      comp[v] = count++;
    }
  }
  if (!has_cycle) return in;

  std::vector<bool> in_cycle(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (comp[v] != npos) in_cycle[v] = true;
    else comp[v] = count++;
  }

  std::vector<Edge> reduced;
  std::vector<std::size_t> origin;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& E = edges[e];
    if (comp[E.u] == comp[E.v] || E.v == root) continue;
    const double w = in_cycle[E.v] ? E.w - edges[in[E.v]].w : E.w;
    reduced.push_back({comp[E.u], comp[E.v], w, E.head});
    origin.push_back(e);
  }
  const auto sub = solve(count, comp[root], reduced);

  std::vector<std::size_t> result(n, npos);
  for (std::size_t v = 0; v < n; ++v)
    if (in_cycle[v]) result[v] = in[v];
  for (std::size_t c = 0; c < count; ++c) {
    if (sub[c] == npos) continue;
    const auto e = origin[sub[c]];
    result[edges[e].v] = e;
  }
  return result;
}

}  // namespace

Arborescence max_arborescence(const Matrix& weights, std::size_t root, const Matrix& allowed) {
  const std::size_t n = weights.rows;
  if (weights.cols != n) throw std::invalid_argument("weight matrix must be square");
  if (root >= n) throw std::invalid_argument("root out of range");
  if (!allowed.data.empty() && (allowed.rows != n || allowed.cols != n))
    throw std::invalid_argument("allowed mask shape differs from weights");

  std::vector<Edge> edges;
  for (std::size_t h = 0; h < n; ++h)
    for (std::size_t d = 0; d < n; ++d) {
      if (h == d || d == root) continue;
      if (!allowed.data.empty() && allowed(h, d) == 0.0) continue;
      edges.push_back({h, d, weights(h, d), h});
    }

  Arborescence tree;
  tree.root = root;
  tree.parent.assign(n, -1);
  if (n == 1) return tree;
  const auto chosen = solve(n, root, edges);
  for (std::size_t v = 0; v < n; ++v) {
    if (v == root) continue;
    const auto& e = edges[chosen[v]];
    tree.parent[v] = static_cast<long>(e.u);
    tree.total_weight += weights(e.u, v);
  }
  return tree;
}

Arborescence cle_mst(const Matrix& attn) {
  const std::size_t n = attn.rows;
  if (attn.cols != n) throw std::invalid_argument("attention matrix must be square");
  if (n == 0) throw std::invalid_argument("attention matrix is empty");
  Matrix w(n, n), allowed(n, n);
  std::vector<std::size_t> flagged;
  for (std::size_t i = 1; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < i; ++j) {
      w(j, i) = attn(i, j);
      allowed(j, i) = 1.0;
      any = any || attn(i, j) > 0.0;
    }
    if (!any) flagged.push_back(i);
  }
  auto tree = max_arborescence(w, 0, allowed);
  for (auto i : flagged) tree.parent[i] = 0;
  tree.flagged = flagged;
  return tree;
}

std::string arborescence_problem(const Arborescence& tree) {
  const std::size_t n = tree.parent.size();
  if (tree.root >= n) return "root out of range";
  if (tree.parent[tree.root] != -1) return "root has a parent";
  for (std::size_t v = 0; v < n; ++v) {
    if (v == tree.root) continue;
    const long p = tree.parent[v];
    if (p < 0 || static_cast<std::size_t>(p) >= n) return "node " + std::to_string(v) + " lacks a parent";
    // Walk to the root; more than n steps means a cycle.
    std::size_t x = v, steps = 0;
    while (x != tree.root) {
      if (++steps > n) return "cycle through node " + std::to_string(v);
      const long px = tree.parent[x];
      if (px < 0) return "node " + std::to_string(x) + " is a second root";
      x = static_cast<std::size_t>(px);
    }
  }
  return {};
}

}  // namespace songlm
