#include "songlm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "songlm/rng.hpp"

namespace songlm {

namespace {

constexpr std::string_view kSpecialNames[] = {"<bos>", "<eos>", "<pad>", "<unk>"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 0;
}

std::vector<std::string> tokenize_line(std::string_view line, bool char_tokens, std::size_t line_no) {
  std::vector<std::string> out;
  if (!char_tokens) {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      std::size_t j = i;
      while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
      if (j > i) out.emplace_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    const auto c = static_cast<unsigned char>(line[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    const std::size_t len = utf8_length(c);
    if (len == 0 || i + len > line.size())
      throw CorpusError("invalid UTF-8 at line " + std::to_string(line_no));
    out.emplace_back(line.substr(i, len));
    i += len;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- Vocab

Vocab::Vocab() {
  for (auto name : kSpecialNames) {
    index_.emplace(std::string(name), static_cast<TokenId>(tokens_.size()));
    tokens_.emplace_back(name);
  }
}

bool Vocab::is_reserved(std::string_view token) {
  return std::find(std::begin(kSpecialNames), std::end(kSpecialNames), token) != std::end(kSpecialNames);
}

Vocab Vocab::from_syllables(std::vector<std::string> syllables) {
  std::sort(syllables.begin(), syllables.end());
  syllables.erase(std::unique(syllables.begin(), syllables.end()), syllables.end());
  Vocab v;
  for (const auto& s : syllables) v.add(s);
  return v;
}

TokenId Vocab::add(const std::string& token) {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  if (token.empty()) throw CorpusError("empty token is not representable");
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocab::id(std::string_view token) const { return find(token).value_or(special::unk); }

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
    throw CorpusError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

nlohmann::json Vocab::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < tokens_.size(); ++i) j[tokens_[i]] = i;
  return nlohmann::json::parse(j.dump());
}

Vocab Vocab::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw CorpusError("vocab JSON must be an object {token: id}");
  std::vector<std::string> by_id(j.size());
  std::vector<bool> seen(j.size(), false);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto id = it.value().get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= by_id.size() || seen[static_cast<std::size_t>(id)])
      throw CorpusError("vocab ids must be dense, unique and 0-based");
    seen[static_cast<std::size_t>(id)] = true;
    by_id[static_cast<std::size_t>(id)] = it.key();
  }
  if (by_id.size() < static_cast<std::size_t>(special::count))
    throw CorpusError("vocab is missing the special tokens");
  for (std::size_t i = 0; i < static_cast<std::size_t>(special::count); ++i)
    if (by_id[i] != kSpecialNames[i]) throw CorpusError("vocab special token mismatch at id " + std::to_string(i));
  Vocab v;
  for (std::size_t i = special::count; i < by_id.size(); ++i) {
    if (is_reserved(by_id[i])) throw CorpusError("reserved token reused: " + by_id[i]);
    v.add(by_id[i]);
  }
  return v;
}

void Vocab::save(const std::filesystem::path& path) const {
  // Ordered by id so the sidecar diffs cleanly.
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < tokens_.size(); ++i) j[tokens_[i]] = i;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Vocab Vocab::load(const std::filesystem::path& path) { return from_json(nlohmann::json::parse(read_file(path))); }

// ---------------------------------------------------------------- Song / Corpus

void Song::validate(std::size_t vocab_size) const {
  if (ids.size() < 3) throw CorpusError("song must contain at least one syllable");
  if (ids.front() != special::bos || ids.back() != special::eos)
    throw CorpusError("song must start with bos and end with eos");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const TokenId t = ids[i];
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) throw CorpusError("token id out of vocabulary");
    if (i > 0 && i + 1 < ids.size() && (t == special::bos || t == special::eos || t == special::pad))
      throw CorpusError("special token inside song");
  }
}

Song make_song(std::span<const TokenId> syllables) {
  Song s;
  s.ids.reserve(syllables.size() + 2);
  s.ids.push_back(special::bos);
  s.ids.insert(s.ids.end(), syllables.begin(), syllables.end());
  s.ids.push_back(special::eos);
  return s;
}

void Corpus::validate() const {
  for (const auto& s : songs) s.validate(vocab.size());
}

Corpus Corpus::subset(std::span<const std::size_t> indices) const {
  Corpus out;
  out.vocab = vocab;
  out.provenance = provenance;
  out.songs.reserve(indices.size());
  for (auto i : indices) out.songs.push_back(songs.at(i));
  return out;
}

Corpus parse_corpus(std::string_view text, const std::optional<Vocab>& vocab, const LoadOptions& options) {
  std::vector<std::vector<std::string>> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    auto tokens = tokenize_line(line, options.char_tokens, line_no);
    if (tokens.empty()) throw CorpusError("empty song at line " + std::to_string(line_no));
    for (const auto& t : tokens)
      if (Vocab::is_reserved(t))
        throw CorpusError("token '" + t + "' at line " + std::to_string(line_no) + " is not representable");
    lines.push_back(std::move(tokens));
    pos = end + 1;
  }
  if (lines.empty()) throw CorpusError("corpus is empty");

  Corpus corpus;
  if (vocab) {
    corpus.vocab = *vocab;
  } else {
    std::vector<std::string> all;
    for (const auto& l : lines) all.insert(all.end(), l.begin(), l.end());
    corpus.vocab = Vocab::from_syllables(std::move(all));
  }
  corpus.songs.reserve(lines.size());
  for (const auto& l : lines) {
    std::vector<TokenId> ids;
    ids.reserve(l.size());
    for (const auto& t : l) ids.push_back(corpus.vocab.id(t));
    corpus.songs.push_back(make_song(ids));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, const std::optional<Vocab>& vocab, const LoadOptions& options) {
  if (!std::filesystem::exists(path)) throw CorpusError("no such file: " + path.string());
  Corpus c = parse_corpus(read_file(path), vocab, options);
  c.provenance = path.filename().string();
  return c;
}

std::string format_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& s : corpus.songs) {
    bool first = true;
    for (std::size_t i = 1; i + 1 < s.ids.size(); ++i) {
      if (!first) out += ' ';
      out += corpus.vocab.token(s.ids[i]);
      first = false;
    }
    out += '\n';
  }
  return out;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write " + path.string());
  out << format_corpus(corpus);
}

// ---------------------------------------------------------------- split

void SplitSpec::validate() const {
  for (double f : {train, eval, test})
    if (!(f > 0.0 && f < 1.0)) throw CorpusError("split fractions must lie in (0, 1)");
  if (std::abs(train + eval + test - 1.0) > 1e-9) throw CorpusError("split fractions must sum to 1");
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  if (n < 3) throw CorpusError("split needs at least 3 songs, got " + std::to_string(n));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order.begin(), order.end());

  const auto sized = [n](double f) {
    const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + 1e-9));
    return std::max<std::size_t>(k, 1);
  };
  const std::size_t n_eval = sized(spec.eval);
  const std::size_t n_test = sized(spec.test);
  if (n_eval + n_test >= n) throw CorpusError("split leaves no training songs");

  SplitIndices out;
  out.eval.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_eval));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_eval),
                  order.begin() + static_cast<std::ptrdiff_t>(n_eval + n_test));
  out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_eval + n_test), order.end());
  return out;
}

CorpusSplits split(const Corpus& corpus, const SplitSpec& spec) {
  const auto idx = split_indices(corpus.size(), spec);
  CorpusSplits out{corpus.subset(idx.train), corpus.subset(idx.eval), corpus.subset(idx.test)};
  out.train.provenance = corpus.provenance + " [train]";
  out.eval.provenance = corpus.provenance + " [eval]";
  out.test.provenance = corpus.provenance + " [test]";
  return out;
}

// ---------------------------------------------------------------- stats

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.song_count = corpus.songs.size();
  s.token_frequency.assign(corpus.vocab.size(), 0);
  for (const auto& song : corpus.songs) {
    s.token_count += song.ids.size();
    ++s.length_histogram[song.ids.size()];
    for (auto id : song.ids) ++s.token_frequency.at(static_cast<std::size_t>(id));
  }
  return s;
}

nlohmann::json to_json(const CorpusStats& stats, const Vocab& vocab) {
  nlohmann::ordered_json j;
  j["songs"] = stats.song_count;
  j["tokens"] = stats.token_count;
  j["vocab_size"] = vocab.size();
  nlohmann::ordered_json freq = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < stats.token_frequency.size(); ++i) freq[vocab.token(static_cast<TokenId>(i))] = stats.token_frequency[i];
  j["frequency"] = freq;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (auto [len, n] : stats.length_histogram) hist[std::to_string(len)] = n;
  j["length_histogram"] = hist;
  return nlohmann::json::parse(j.dump());
}

// ---------------------------------------------------------------- labels

void LabeledCorpus::validate() const {
  if (labels.size() != corpus.size()) throw CorpusError("label count does not match song count");
  for (int l : labels)
    if (l != 0 && l != 1) throw CorpusError("labels must be 0 or 1");
}

LabeledCorpus LabeledCorpus::subset(std::span<const std::size_t> indices) const {
  LabeledCorpus out;
  out.corpus = corpus.subset(indices);
  out.labels.reserve(indices.size());
  for (auto i : indices) out.labels.push_back(labels.at(i));
  return out;
}

std::vector<int> load_labels(const std::filesystem::path& path, std::size_t n_songs) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open " + path.string());
  std::vector<int> labels(n_songs, -1);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    long long index = -1;
    int label = -1;
    if (!(ls >> index >> label) || index < 0 || static_cast<std::size_t>(index) >= n_songs || (label != 0 && label != 1))
      throw CorpusError("bad label entry at line " + std::to_string(line_no));
    labels[static_cast<std::size_t>(index)] = label;
  }
  for (std::size_t i = 0; i < n_songs; ++i)
    if (labels[i] < 0) throw CorpusError("song " + std::to_string(i) + " has no label");
  return labels;
}

void save_labels(std::span<const int> labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CorpusError("cannot write " + path.string());
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ' ' << labels[i] << '\n';
}

LabeledCorpus label_pair(const Corpus& negative, const Corpus& positive) {
  if (!(negative.vocab == positive.vocab)) throw CorpusError("labelled corpora must share a vocabulary");
  LabeledCorpus out;
  out.corpus.vocab = negative.vocab;
  out.corpus.provenance = negative.provenance + " (0) + " + positive.provenance + " (1)";
  for (const auto& s : negative.songs) {
    out.corpus.songs.push_back(s);
    out.labels.push_back(0);
  }
  for (const auto& s : positive.songs) {
    out.corpus.songs.push_back(s);
    out.labels.push_back(1);
  }
  return out;
}

}  // namespace songlm
