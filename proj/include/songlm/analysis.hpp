#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "songlm/arborescence.hpp"
#include "songlm/corpus.hpp"
#include "songlm/gpt.hpp"
#include "songlm/matrix.hpp"

namespace songlm {

struct SpanPair {
  std::size_t song = 0;
  std::size_t layer = 0;
  std::size_t head = 0;
  std::size_t query = 0;
  std::size_t key = 0;
  double weight = 0.0;
};

struct HeadSpan {
  std::size_t head = 0;
  std::size_t n_pairs = 0;
  double mean_span = std::numeric_limits<double>::quiet_NaN();
};

/// Pairs above the threshold, pooled over the heads of one layer.
/// mean_span is NaN when no pair qualifies.
struct SpanStat {
  std::size_t layer = 0;
  std::vector<SpanPair> pairs;
  std::size_t n_pairs = 0;
  double mean_span = std::numeric_limits<double>::quiet_NaN();
  std::vector<HeadSpan> per_head;
};

/// Statistics over captured records (one per song); layers are 0-based.
std::vector<SpanStat> span_stats(const std::vector<AttentionRecord>& records, double threshold = 0.5);

/// Runs the model with capture over the first `n_songs` songs (or all of
/// them, with a warning, when the corpus is smaller).
std::vector<SpanStat> span_stats(const Gpt<float>& model, const Corpus& corpus, std::size_t n_songs = 200,
                                 double threshold = 0.5);

AttentionRecord capture_attention(const Gpt<float>& model, const Song& song);

std::string span_pairs_csv(const std::vector<SpanStat>& stats);
std::string span_summary_csv(const std::vector<SpanStat>& stats);

/// One tree per (layer, head) for a song.
struct HeadTree {
  std::size_t layer = 0;
  std::size_t head = 0;
  Arborescence tree;
};
std::vector<HeadTree> attention_trees(const AttentionRecord& record);
nlohmann::json attention_trees_json(const std::vector<HeadTree>& trees, const Song& song, const Vocab& vocab);

/// Residual-stream states: layer 0 is token + position embedding, layer l
/// the output of block l.
struct EmbeddingTrace {
  std::size_t song = 0;
  std::vector<TokenId> tokens;
  std::vector<Matrix> states;  // L+1 matrices of T x H

  std::size_t layers() const { return states.size(); }
  std::size_t length() const { return tokens.size(); }
};

EmbeddingTrace embedding_trace(const Gpt<float>& model, const Song& song, std::size_t song_index = 0);

struct PcaResult {
  std::vector<double> mean;          // H
  Matrix components;                 // dims x H, orthonormal rows
  std::vector<double> eigenvalues;   // all H, descending
  std::vector<double> explained;     // dims fractions of total variance

  double total_variance() const;
  std::vector<double> project(std::span<const double> x) const;
};

/// Principal components of the rows of X (1/N covariance). Throws unless
/// X has at least dims + 1 rows. Each component's largest-magnitude
/// loading is made positive.
PcaResult pca_fit(const Matrix& x, std::size_t dims);

struct ProjectedTrace {
  std::size_t song = 0;
  std::vector<TokenId> tokens;
  std::vector<Matrix> coords;  // per layer, T x dims
};

/// One PCA over all states of all traces and layers, then per-trace projections.
std::vector<ProjectedTrace> pca_project(const std::vector<EmbeddingTrace>& traces, std::size_t dims,
                                        PcaResult* fit = nullptr);
std::string trajectories_csv(const std::vector<ProjectedTrace>& traces, const Vocab& vocab);

struct CosineDistribution {
  std::vector<double> values;
  std::size_t n_occurrences = 0;
  std::size_t n_excluded = 0;  // zero-norm states
  bool degenerate = false;     // mean vector has (near) zero norm
};

/// Cosine of each occurrence of `token` at `layer` against the mean of
/// those occurrences, in the full state space.
CosineDistribution cosine_similarity_distribution(const std::vector<EmbeddingTrace>& traces, TokenId token,
                                                  std::size_t layer);

/// Best two-group split of 1-D values: between-group over total sum of
/// squares, in [0, 1]; 0 when all values coincide.
double two_cluster_separation(std::vector<double> values);

}  // namespace songlm
