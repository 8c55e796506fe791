#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace songlm {

using TokenId = std::int32_t;

/// Reserved ids; every vocabulary starts with these four entries.
namespace special {
inline constexpr TokenId bos = 0;
inline constexpr TokenId eos = 1;
inline constexpr TokenId pad = 2;
inline constexpr TokenId unk = 3;
inline constexpr TokenId count = 4;
}  // namespace special

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bidirectional token <-> id map. Ids are dense and 0-based; ids 0..3 are
/// the specials "<bos>", "<eos>", "<pad>", "<unk>".
class Vocab {
 public:
  Vocab();

  /// Specials followed by the distinct syllables in lexicographic order.
  static Vocab from_syllables(std::vector<std::string> syllables);

  TokenId add(const std::string& token);
  std::optional<TokenId> find(std::string_view token) const;
  /// Id for `token`, or unk when absent.
  TokenId id(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const { return tokens_.size(); }
  std::size_t syllable_count() const { return tokens_.size() - special::count; }
  const std::vector<std::string>& tokens() const { return tokens_; }

  static bool is_reserved(std::string_view token);

  nlohmann::json to_json() const;
  static Vocab from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Vocab load(const std::filesystem::path& path);

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

/// One song: bos, syllables..., eos.
struct Song {
  std::vector<TokenId> ids;

  std::size_t size() const { return ids.size(); }
  std::size_t syllables() const { return ids.size() >= 2 ? ids.size() - 2 : 0; }
  /// Throws CorpusError when the bos/eos framing or interior is invalid.
  void validate(std::size_t vocab_size) const;
};

/// Builds a framed song from syllable ids.
Song make_song(std::span<const TokenId> syllables);

struct Corpus {
  std::vector<Song> songs;
  Vocab vocab;
  std::string provenance;

  std::size_t size() const { return songs.size(); }
  bool empty() const { return songs.empty(); }
  void validate() const;
  /// Copy containing the songs at `indices`, same vocab.
  Corpus subset(std::span<const std::size_t> indices) const;
};

struct LoadOptions {
  /// Treat every character of an unseparated line as one token.
  bool char_tokens = false;
};

/// Reads one song per line. When `vocab` is given, tokens outside it map to
/// unk; otherwise the vocabulary is built from the observed tokens.
Corpus load_corpus(const std::filesystem::path& path, const std::optional<Vocab>& vocab = std::nullopt,
                   const LoadOptions& options = {});
Corpus parse_corpus(std::string_view text, const std::optional<Vocab>& vocab = std::nullopt,
                    const LoadOptions& options = {});

/// Writes syllables space-separated, one song per line, specials stripped.
std::string format_corpus(const Corpus& corpus);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct SplitSpec {
  double train = 0.8;
  double eval = 0.1;
  double test = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CorpusSplits {
  Corpus train;
  Corpus eval;
  Corpus test;
};

/// Song-level holdout split. Eval and test sizes are floor(n * fraction),
/// raised to one song each; the remainder goes to train.
CorpusSplits split(const Corpus& corpus, const SplitSpec& spec);

/// Index lists behind `split`, for callers that carry per-song side data.
struct SplitIndices {
  std::vector<std::size_t> train, eval, test;
};
SplitIndices split_indices(std::size_t n_songs, const SplitSpec& spec);

struct CorpusStats {
  std::size_t song_count = 0;
  std::size_t token_count = 0;  // including bos/eos
  std::vector<std::size_t> token_frequency;  // indexed by id
  std::map<std::size_t, std::size_t> length_histogram;  // song length (with specials) -> songs
};

CorpusStats corpus_stats(const Corpus& corpus);
nlohmann::json to_json(const CorpusStats& stats, const Vocab& vocab);

/// Corpus with one binary label per song; 1 is the perturbed (positive) class.
struct LabeledCorpus {
  Corpus corpus;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  void validate() const;
  LabeledCorpus subset(std::span<const std::size_t> indices) const;
};

/// Label sidecar: one "song-line-index label" pair per line, 0-based index.
std::vector<int> load_labels(const std::filesystem::path& path, std::size_t n_songs);
void save_labels(std::span<const int> labels, const std::filesystem::path& path);

/// Concatenates two corpora that share a vocabulary, labelling the first 0
/// and the second 1.
LabeledCorpus label_pair(const Corpus& negative, const Corpus& positive);

}  // namespace songlm
