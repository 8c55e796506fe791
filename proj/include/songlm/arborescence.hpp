#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "songlm/matrix.hpp"

namespace songlm {

struct Arborescence {
  std::size_t root = 0;
  std::vector<long> parent;           // -1 at the root
  double total_weight = 0.0;
  std::vector<std::size_t> flagged;   // nodes attached by a forced zero-weight edge

  std::size_t size() const { return parent.size(); }
  nlohmann::json to_json() const;
};

/// Maximum-weight spanning arborescence (Chu-Liu/Edmonds) of a dense
/// digraph. weights(h, d) is the weight of edge h -> d; edges with
/// allowed(h, d) == 0 are absent (pass an empty matrix to allow all
/// non-loop edges). Ties prefer the smaller head index. Throws when some
/// node cannot be reached from the root.
Arborescence max_arborescence(const Matrix& weights, std::size_t root, const Matrix& allowed = {});

/// Tree over one attention map: node i's head is a key j < i, scored by
/// attn(i, j). Rooted at position 0 (bos). Nodes whose causal attention is
/// all zero are hung from the root and flagged.
Arborescence cle_mst(const Matrix& attn);

/// Checks the structural invariants; returns an empty string when valid.
std::string arborescence_problem(const Arborescence& tree);

}  // namespace songlm
