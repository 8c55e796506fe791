#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "songlm/corpus.hpp"
#include "songlm/markov.hpp"
#include "songlm/rng.hpp"
#include "songlm/tensor.hpp"

namespace songlm {

template <class T>
struct NamedParameter {
  std::string name;
  ag::Tensor<T> tensor;
};

/// Per-call switches for a forward pass.
struct ForwardOptions {
  bool train = false;
  Rng* rng = nullptr;  // dropout source; required when train is set
  bool capture = false;
};

/// Common surface of the neural next-token models.
template <class T>
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual std::string arch() const = 0;
  /// Logits [ids.size(), V]; row t scores the token following ids[t].
  virtual ag::Tensor<T> logits(std::span<const TokenId> ids, const ForwardOptions& options) const = 0;
  virtual std::vector<NamedParameter<T>> parameters() const = 0;
  virtual std::size_t vocab_size() const = 0;
  /// Longest accepted input; 0 when unbounded.
  virtual std::size_t max_input_length() const = 0;
  virtual nlohmann::json config_json() const = 0;

  std::vector<ag::Tensor<T>> parameter_tensors() const {
    std::vector<ag::Tensor<T>> out;
    for (auto& p : parameters()) out.push_back(p.tensor);
    return out;
  }
  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.tensor.numel();
    return n;
  }
};

/// Snapshot of parameter values, used for best-epoch checkpoints.
template <class T>
std::vector<std::vector<T>> snapshot(const LanguageModel<T>& model) {
  std::vector<std::vector<T>> out;
  for (const auto& p : model.parameters()) out.emplace_back(p.tensor.data().begin(), p.tensor.data().end());
  return out;
}

template <class T>
void restore(const LanguageModel<T>& model, const std::vector<std::vector<T>>& values) {
  auto params = model.parameters();
  if (params.size() != values.size()) throw std::invalid_argument("snapshot does not match model");
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto d = params[i].tensor.data();
    if (d.size() != values[i].size()) throw std::invalid_argument("snapshot shape mismatch for " + params[i].name);
    std::copy(values[i].begin(), values[i].end(), d.begin());
  }
}

/// Autoregressive sampling from bos until eos or `max_len` tokens.
/// temperature 0 means greedy decoding with ties to the lowest id.
template <class T>
GeneratedSong sample(const LanguageModel<T>& model, std::uint64_t seed, std::size_t max_len, double temperature);

}  // namespace songlm
