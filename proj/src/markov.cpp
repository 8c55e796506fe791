#include "songlm/markov.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace songlm {

Song GeneratedSong::to_song() const {
  Song s{ids};
  if (truncated || s.ids.empty() || s.ids.back() != special::eos) s.ids.push_back(special::eos);
  return s;
}

MarkovModel::Key MarkovModel::encode(std::span<const TokenId> context) {
  Key k;
  k.reserve(context.size());
  for (auto t : context) k.push_back(static_cast<char32_t>(t));
  return k;
}

MarkovModel MarkovModel::fit(const Corpus& corpus, int order, int max_order) {
  if (order < 1) throw std::invalid_argument("Markov order must be at least 1");
  if (order > max_order)
    throw std::invalid_argument("Markov order " + std::to_string(order) + " exceeds limit " + std::to_string(max_order));
  if (corpus.empty()) throw std::invalid_argument("cannot fit a Markov model on an empty corpus");

  MarkovModel m;
  m.order_ = order;
  m.vocab_ = corpus.vocab;
  m.tables_.resize(static_cast<std::size_t>(order));
  const std::size_t v = corpus.vocab.size();
  for (const auto& song : corpus.songs) {
    const auto& ids = song.ids;
    for (std::size_t t = 1; t < ids.size(); ++t) {
      const auto target = static_cast<std::size_t>(ids[t]);
      for (int j = 1; j <= order && static_cast<std::size_t>(j) <= t; ++j) {
        const std::span<const TokenId> ctx(ids.data() + t - static_cast<std::size_t>(j), static_cast<std::size_t>(j));
        auto& row = m.tables_[static_cast<std::size_t>(j - 1)][encode(ctx)];
        if (row.empty()) row.assign(v, 0);
        ++row[target];
      }
    }
  }
  return m;
}

const std::vector<std::uint32_t>* MarkovModel::counts(std::span<const TokenId> context) const {
  if (context.empty() || context.size() > static_cast<std::size_t>(order_)) return nullptr;
  const auto& table = tables_[context.size() - 1];
  auto it = table.find(encode(context));
  return it == table.end() ? nullptr : &it->second;
}

int MarkovModel::matched_order(std::span<const TokenId> context) const {
  const std::size_t longest = std::min(context.size(), static_cast<std::size_t>(order_));
  for (std::size_t j = longest; j >= 1; --j)
    if (counts(context.subspan(context.size() - j))) return static_cast<int>(j);
  return 0;
}

std::vector<double> MarkovModel::predict(std::span<const TokenId> context) const {
  const std::size_t v = vocab_.size();
  std::vector<double> p(v, 0.0);
  const int j = matched_order(context);
  if (j == 0) {
    const double u = 1.0 / static_cast<double>(v - 1);
    for (std::size_t i = 0; i < v; ++i) p[i] = i == static_cast<std::size_t>(special::pad) ? 0.0 : u;
    return p;
  }
  const auto& row = *counts(context.subspan(context.size() - static_cast<std::size_t>(j)));
  double total = 0.0;
  for (std::size_t i = 0; i < v; ++i)
    if (i != static_cast<std::size_t>(special::pad)) total += row[i];
  for (std::size_t i = 0; i < v; ++i)
    p[i] = i == static_cast<std::size_t>(special::pad) ? 0.0 : static_cast<double>(row[i]) / total;
  return p;
}

GeneratedSong MarkovModel::generate(Rng& rng, std::size_t max_len) const {
  GeneratedSong g;
  g.ids.push_back(special::bos);
  while (true) {
    if (g.ids.size() - 1 >= max_len) {
      g.truncated = true;
      break;
    }
    auto p = predict(g.ids);
    p[static_cast<std::size_t>(special::bos)] = 0.0;
    const auto next = static_cast<TokenId>(rng.categorical(std::span<const double>(p)));
    g.ids.push_back(next);
    if (next == special::eos) break;
  }
  return g;
}

GeneratedSong MarkovModel::generate(std::uint64_t seed, std::size_t max_len) const {
  Rng rng(seed);
  return generate(rng, max_len);
}

nlohmann::json MarkovModel::to_json() const {
  nlohmann::json j;
  j["format"] = "songlm-markov";
  j["version"] = 1;
  j["order"] = order_;
  j["vocab"] = vocab_.to_json();
  j["tables"] = nlohmann::json::array();
  for (int o = 1; o <= order_; ++o) {
    std::vector<std::pair<std::vector<TokenId>, const std::vector<std::uint32_t>*>> rows;
    for (const auto& [key, counts] : tables_[static_cast<std::size_t>(o - 1)]) {
      std::vector<TokenId> ctx(key.begin(), key.end());
      rows.emplace_back(std::move(ctx), &counts);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    nlohmann::json table = nlohmann::json::array();
    for (const auto& [ctx, counts] : rows) {
      nlohmann::json ctx_tokens = nlohmann::json::array();
      for (auto t : ctx) ctx_tokens.push_back(vocab_.token(t));
      nlohmann::json c = nlohmann::json::object();
      for (std::size_t i = 0; i < counts->size(); ++i)
        if ((*counts)[i]) c[vocab_.token(static_cast<TokenId>(i))] = (*counts)[i];
      table.push_back({{"context", ctx_tokens}, {"counts", c}});
    }
    j["tables"].push_back({{"order", o}, {"rows", table}});
  }
  return j;
}

MarkovModel MarkovModel::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "songlm-markov") throw std::runtime_error("not a songlm Markov model");
  MarkovModel m;
  m.order_ = j.at("order").get<int>();
  m.vocab_ = Vocab::from_json(j.at("vocab"));
  m.tables_.resize(static_cast<std::size_t>(m.order_));
  const auto lookup = [&m](const std::string& tok) {
    auto id = m.vocab_.find(tok);
    if (!id) throw std::runtime_error("Markov table token not in vocab: " + tok);
    return *id;
  };
  for (const auto& table : j.at("tables")) {
    const int o = table.at("order").get<int>();
    if (o < 1 || o > m.order_) throw std::runtime_error("bad table order");
    for (const auto& row : table.at("rows")) {
      std::vector<TokenId> ctx;
      for (const auto& t : row.at("context")) ctx.push_back(lookup(t.get<std::string>()));
      if (ctx.size() != static_cast<std::size_t>(o)) throw std::runtime_error("context length does not match order");
      std::vector<std::uint32_t> counts(m.vocab_.size(), 0);
      for (auto it = row.at("counts").begin(); it != row.at("counts").end(); ++it)
        counts[static_cast<std::size_t>(lookup(it.key()))] = it.value().get<std::uint32_t>();
      m.tables_[static_cast<std::size_t>(o - 1)][encode(ctx)] = std::move(counts);
    }
  }
  return m;
}

void MarkovModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

MarkovModel MarkovModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return from_json(nlohmann::json::parse(in));
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p)
    if (x > 0.0) h -= x * std::log(x);
  return h;
}

SynthResult synth_corpus(const MarkovModel& model, std::size_t n_songs, std::uint64_t seed, std::size_t max_len) {
  SynthResult r;
  r.corpus.vocab = model.vocab();
  r.corpus.provenance = "markov-order-" + std::to_string(model.order()) + " synth seed=" + std::to_string(seed);
  r.emission_counts.assign(model.vocab_size(), 0);
  Rng rng(seed);
  r.corpus.songs.reserve(n_songs);
  for (std::size_t i = 0; i < n_songs; ++i) {
    auto g = model.generate(rng, max_len);
    if (g.truncated) ++r.truncated;
    Song s = g.to_song();
    for (auto id : s.ids) ++r.emission_counts[static_cast<std::size_t>(id)];
    r.corpus.songs.push_back(std::move(s));
  }
  return r;
}

}  // namespace songlm
