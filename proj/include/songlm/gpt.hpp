#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "songlm/language_model.hpp"
#include "songlm/matrix.hpp"
#include "songlm/tensor.hpp"

namespace songlm {

struct GptConfig {
  std::size_t n_layers = 6;
  std::size_t n_heads = 6;
  std::size_t hidden = 384;
  std::size_t context_len = 256;
  double dropout = 0.1;
  std::size_t vocab_size = 0;
  /// Keys further than this from the query are masked; nullopt = unlimited.
  std::optional<std::size_t> attention_span;

  void validate() const;
  nlohmann::json to_json() const;
  static GptConfig from_json(const nlohmann::json& j);

  static GptConfig small(std::size_t vocab);   // 1L 1A 192H
  static GptConfig medium(std::size_t vocab);  // 6L 6A 384H
  static GptConfig large(std::size_t vocab);   // 12L 12A 768H
};

/// Post-softmax attention maps of one forward pass, indexed [layer][head];
/// each map is T x T (query x key).
struct AttentionRecord {
  std::vector<std::vector<Matrix>> maps;

  std::size_t layers() const { return maps.size(); }
  std::size_t heads() const { return maps.empty() ? 0 : maps.front().size(); }
};

template <class T>
struct GptOutput {
  ag::Tensor<T> logits;                       // [T, V]
  ag::Tensor<T> final_hidden;                 // [T, H], after the final layer norm
  std::optional<AttentionRecord> attention;   // when captured
  std::vector<Matrix> states;                 // residual stream, L+1 entries, when captured
};

/// GPT-2 style decoder: learned positions, pre-norm blocks, GELU MLP of
/// width 4H, output head tied to the token embedding.
template <class T>
class Gpt final : public LanguageModel<T> {
 public:
  Gpt(GptConfig config, std::uint64_t init_seed);

  GptOutput<T> forward(std::span<const TokenId> ids, const ForwardOptions& options) const;

  std::string arch() const override { return "gpt"; }
  ag::Tensor<T> logits(std::span<const TokenId> ids, const ForwardOptions& options) const override {
    return forward(ids, options).logits;
  }
  std::vector<NamedParameter<T>> parameters() const override;
  std::size_t vocab_size() const override { return config_.vocab_size; }
  std::size_t max_input_length() const override { return config_.context_len; }
  nlohmann::json config_json() const override { return config_.to_json(); }

  const GptConfig& config() const { return config_; }
  /// Changes the attention span without touching parameters.
  void set_attention_span(std::optional<std::size_t> span);

  /// Deep copy with independent parameter storage.
  Gpt clone() const;

 private:
  struct Block {
    ag::Tensor<T> ln1_g, ln1_b, w_qkv, b_qkv, w_o, b_o, ln2_g, ln2_b, w_fc, b_fc, w_proj, b_proj;
  };

  GptConfig config_;
  ag::Tensor<T> wte_, wpe_, lnf_g_, lnf_b_;
  std::vector<Block> blocks_;
};

extern template class Gpt<float>;
extern template class Gpt<double>;

}  // namespace songlm
