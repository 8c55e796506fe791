#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "songlm/corpus.hpp"
#include "songlm/rng.hpp"

namespace songlm {

/// Output of autoregressive sampling: bos, tokens..., and eos unless the
/// length limit cut the song short.
struct GeneratedSong {
  std::vector<TokenId> ids;
  bool truncated = false;

  /// Framed song; a truncated sample gets eos appended.
  Song to_song() const;
};

/// k-th order Markov model holding count tables for every order 1..k.
/// Prediction backs off to the longest context suffix present in the
/// tables and falls back to uniform over non-pad tokens.
class MarkovModel {
 public:
  static constexpr int kDefaultMaxOrder = 6;

  static MarkovModel fit(const Corpus& corpus, int order, int max_order = kDefaultMaxOrder);

  int order() const { return order_; }
  const Vocab& vocab() const { return vocab_; }
  std::size_t vocab_size() const { return vocab_.size(); }

  /// Next-token distribution after `context` (which starts at bos).
  std::vector<double> predict(std::span<const TokenId> context) const;
  /// Order of the table row `predict` would use; 0 means uniform fallback.
  int matched_order(std::span<const TokenId> context) const;
  /// Raw counts for a context of exactly `context.size()` tokens, or null.
  const std::vector<std::uint32_t>* counts(std::span<const TokenId> context) const;
  std::size_t context_count(int order) const { return tables_.at(static_cast<std::size_t>(order - 1)).size(); }

  GeneratedSong generate(Rng& rng, std::size_t max_len) const;
  GeneratedSong generate(std::uint64_t seed, std::size_t max_len) const;

  nlohmann::json to_json() const;
  static MarkovModel from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static MarkovModel load(const std::filesystem::path& path);

 private:
  using Key = std::u32string;
  static Key encode(std::span<const TokenId> context);

  int order_ = 1;
  Vocab vocab_;
  std::vector<std::unordered_map<Key, std::vector<std::uint32_t>>> tables_;
};

/// Shannon entropy in nats.
double entropy(std::span<const double> p);

struct SynthResult {
  Corpus corpus;
  /// Tokens emitted per id, bos and eos included.
  std::vector<std::size_t> emission_counts;
  std::size_t truncated = 0;
};

/// Samples `n_songs` songs from `model`. Truncated samples are closed with eos.
SynthResult synth_corpus(const MarkovModel& model, std::size_t n_songs, std::uint64_t seed,
                         std::size_t max_len = 256);

}  // namespace songlm
