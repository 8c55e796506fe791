#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "songlm/language_model.hpp"
#include "songlm/matrix.hpp"

namespace songlm {

enum class CellKind { rnn, lstm };

std::string to_string(CellKind kind);
CellKind parse_cell(const std::string& name);

struct RnnConfig {
  CellKind cell = CellKind::lstm;
  std::size_t n_layers = 1;  // 1..6
  std::size_t hidden = 32;   // 10..100
  std::size_t embed = 32;    // 10..100
  double dropout = 0.0;      // [0, 1]
  std::size_t vocab_size = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static RnnConfig from_json(const nlohmann::json& j);
};

/// Per-layer hidden (and, for LSTM, cell) states over time, each T x H.
struct RnnStates {
  std::vector<Matrix> hidden;
  std::vector<Matrix> cell;
};

template <class T>
struct RnnOutput {
  ag::Tensor<T> logits;
  RnnStates states;  // filled when captured
};

/// Stacked Elman RNN or LSTM with an embedding input and a linear head.
/// LSTM gate order in the packed weights is input, forget, cell, output.
template <class T>
class Rnn final : public LanguageModel<T> {
 public:
  Rnn(RnnConfig config, std::uint64_t init_seed);

  RnnOutput<T> forward(std::span<const TokenId> ids, const ForwardOptions& options) const;

  std::string arch() const override { return to_string(config_.cell); }
  ag::Tensor<T> logits(std::span<const TokenId> ids, const ForwardOptions& options) const override {
    return forward(ids, options).logits;
  }
  std::vector<NamedParameter<T>> parameters() const override;
  std::size_t vocab_size() const override { return config_.vocab_size; }
  std::size_t max_input_length() const override { return 0; }
  nlohmann::json config_json() const override { return config_.to_json(); }

  const RnnConfig& config() const { return config_; }

 private:
  struct Layer {
    ag::Tensor<T> w_ih, w_hh, b;
  };

  RnnConfig config_;
  ag::Tensor<T> embedding_;
  std::vector<Layer> layers_;
  ag::Tensor<T> w_out_, b_out_;
};

extern template class Rnn<float>;
extern template class Rnn<double>;

}  // namespace songlm
