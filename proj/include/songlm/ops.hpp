#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "songlm/corpus.hpp"
#include "songlm/rng.hpp"
#include "songlm/tensor.hpp"

// Differentiable operations. Every op records a graph node when grad mode is
// on and at least one input requires grad; otherwise it only computes values.
namespace songlm::ag {

/// [m,k] x [k,n] -> [m,n]
template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

/// 2-D transpose.
template <class T>
Tensor<T> transpose(const Tensor<T>& a);

/// Elementwise sum. `b` may also match a trailing suffix of `a`'s shape
/// (e.g. a bias row added to every row of a matrix).
template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);

/// Elementwise product of equal shapes.
template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

template <class T>
Tensor<T> scale(const Tensor<T>& a, double factor);

/// Rows of `table` ([V,H]) selected by `ids` -> [T,H].
template <class T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const TokenId> ids);

/// Normalises over the last axis, then applies gamma/beta.
template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps = 1e-5);

template <class T>
Tensor<T> softmax(const Tensor<T>& x, std::size_t axis);

/// GPT-2 tanh approximation.
template <class T>
Tensor<T> gelu(const Tensor<T>& x);

template <class T>
Tensor<T> tanh(const Tensor<T>& x);

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x);

/// Inverted dropout. Identity when `train` is false or p == 0.
template <class T>
Tensor<T> dropout(const Tensor<T>& x, double p, bool train, Rng* rng);

template <class T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);

/// Half-open range [begin, end) along `axis`.
template <class T>
Tensor<T> slice(const Tensor<T>& x, std::size_t axis, std::size_t begin, std::size_t end);

/// Attention-score mask for a [Tq, Tk] matrix whose last query is the last
/// key. Query q may see key k iff k <= q and q - k <= span; all other
/// entries become -inf so the following softmax assigns them exactly 0.
template <class T>
Tensor<T> causal_mask(const Tensor<T>& scores, std::optional<std::size_t> span);

/// Cross-entropy of row-wise softmax(logits) against `targets`, in nats.
/// Rows with mask 0 are skipped. The sum is divided by `normalizer`, or by
/// the number of included rows when normalizer <= 0.
template <class T>
Tensor<T> cross_entropy_loss(const Tensor<T>& logits, std::span<const TokenId> targets,
                             std::span<const std::uint8_t> mask = {}, double normalizer = 0.0);

template <class T>
Tensor<T> sum(const Tensor<T>& x);

template <class T>
Tensor<T> mean(const Tensor<T>& x);

}  // namespace songlm::ag
