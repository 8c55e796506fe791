#include "songlm/synthlab.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "songlm/io.hpp"
#include "songlm/rng.hpp"

namespace songlm {

const char* to_string(Role role) {
  switch (role) {
    case Role::special: return "special";
    case Role::filler: return "filler";
    case Role::cue: return "cue";
    case Role::echo: return "echo";
    case Role::ambiguous: return "ambiguous";
  }
  return "?";
}

void LongRangeGrammar::validate() const {
  if (n_fillers < 1 || n_pairs < 1) throw std::invalid_argument("grammar needs fillers and cue/echo pairs");
  if (distance < 2) throw std::invalid_argument("dependency distance must be at least 2");
  if (min_length < 1 || min_length > max_length) throw std::invalid_argument("song length range is invalid");
  if (distance >= min_length)
    throw std::invalid_argument("distance " + std::to_string(distance) + " does not fit in songs of " +
                                std::to_string(min_length) + " syllables");
  if (pairs_per_song < 1) throw std::invalid_argument("songs need at least one cue/echo pair");
  if (!(echo_fidelity >= 0.0 && echo_fidelity <= 1.0)) throw std::invalid_argument("echo fidelity must lie in [0, 1]");
}

Vocab LongRangeGrammar::vocab() const {
  std::vector<std::string> syl;
  for (std::size_t i = 0; i < n_fillers; ++i) syl.push_back("f" + std::to_string(i));
  for (std::size_t i = 0; i < n_pairs; ++i) {
    syl.push_back("c" + std::to_string(i));
    syl.push_back("e" + std::to_string(i));
  }
  auto v = Vocab::from_syllables(syl);
  if (v.size() > 17)
    log_warning("long-range vocabulary has " + std::to_string(v.size()) + " ids, above the usual limit of 17");
  return v;
}

double LongRangeGrammar::filler_entropy() const { return std::log(static_cast<double>(n_fillers)); }

double LongRangeGrammar::echo_entropy() const {
  const double k = static_cast<double>(n_pairs);
  const double p_right = echo_fidelity + (1.0 - echo_fidelity) / k;
  const double p_wrong = (1.0 - echo_fidelity) / k;
  double h = p_right > 0 ? -p_right * std::log(p_right) : 0.0;
  if (p_wrong > 0) h -= (k - 1.0) * p_wrong * std::log(p_wrong);
  return h;
}

nlohmann::json LongRangeGrammar::to_json() const {
  return {{"n_fillers", n_fillers},   {"n_pairs", n_pairs},       {"distance", distance},
          {"min_length", min_length}, {"max_length", max_length}, {"pairs_per_song", pairs_per_song},
          {"echo_fidelity", echo_fidelity}};
}

LongRangeGrammar LongRangeGrammar::from_json(const nlohmann::json& j) {
  LongRangeGrammar g;
  g.n_fillers = j.value("n_fillers", g.n_fillers);
  g.n_pairs = j.value("n_pairs", g.n_pairs);
  g.distance = j.value("distance", g.distance);
  g.min_length = j.value("min_length", g.min_length);
  g.max_length = j.value("max_length", g.max_length);
  g.pairs_per_song = j.value("pairs_per_song", g.pairs_per_song);
  g.echo_fidelity = j.value("echo_fidelity", g.echo_fidelity);
  g.validate();
  return g;
}

PositionFilter SynthCorpus::role_filter(Role role) const {
  return [this, role](std::size_t song, std::size_t target) { return roles.at(song).at(target) == role; };
}

std::size_t SynthCorpus::role_count(Role role) const {
  std::size_t n = 0;
  for (const auto& r : roles) n += static_cast<std::size_t>(std::count(r.begin(), r.end(), role));
  return n;
}

namespace {

void count_emissions(SynthCorpus& out) {
  out.emission_counts.assign(out.corpus.vocab.size(), 0);
  for (const auto& s : out.corpus.songs)
    for (auto id : s.ids) ++out.emission_counts[static_cast<std::size_t>(id)];
}

}  // namespace

SynthCorpus gen_long_range(const LongRangeGrammar& grammar, std::size_t n_songs, std::uint64_t seed,
                           double scramble) {
  grammar.validate();
  if (!(scramble >= 0.0 && scramble <= 1.0)) throw std::invalid_argument("scramble degree must lie in [0, 1]");
  SynthCorpus out;
  out.corpus.vocab = grammar.vocab();
  const auto& vocab = out.corpus.vocab;
  std::vector<TokenId> fillers, cues, echoes;
  for (std::size_t i = 0; i < grammar.n_fillers; ++i) fillers.push_back(vocab.id("f" + std::to_string(i)));
  for (std::size_t i = 0; i < grammar.n_pairs; ++i) {
    cues.push_back(vocab.id("c" + std::to_string(i)));
    echoes.push_back(vocab.id("e" + std::to_string(i)));
  }

  Rng rng(seed);
  const std::size_t d = grammar.distance;
  std::size_t n_pairs_total = 0, n_redrawn = 0;
  for (std::size_t s = 0; s < n_songs; ++s) {
    const auto len = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(grammar.min_length), static_cast<std::int64_t>(grammar.max_length)));
    // Syllable slots 1..len inside the framed song.
    std::vector<Role> role(len + 2, Role::filler);
    role.front() = role.back() = Role::special;
    std::vector<TokenId> ids(len + 2, special::pad);
    ids.front() = special::bos;
    ids.back() = special::eos;

    std::size_t placed = 0;
    for (std::size_t attempt = 0; placed < grammar.pairs_per_song && attempt < 64 * grammar.pairs_per_song; ++attempt) {
      const auto p = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(len - d)));
      if (role[p] != Role::filler || role[p + d] != Role::filler) continue;
      const auto which = static_cast<std::size_t>(rng.below(grammar.n_pairs));
      std::size_t echo = which;
      if (rng.uniform() >= grammar.echo_fidelity) echo = static_cast<std::size_t>(rng.below(grammar.n_pairs));
      if (scramble > 0.0 && rng.uniform() < scramble) {
        echo = static_cast<std::size_t>(rng.below(grammar.n_pairs));
        ++n_redrawn;
      }
      role[p] = Role::cue;
      role[p + d] = Role::echo;
      ids[p] = cues[which];
      ids[p + d] = echoes[echo];
      ++placed;
    }
    n_pairs_total += placed;
    for (std::size_t t = 1; t <= len; ++t)
      if (role[t] == Role::filler) ids[t] = fillers[rng.below(fillers.size())];
    out.corpus.songs.push_back({std::move(ids)});
    out.roles.push_back(std::move(role));
  }
  out.corpus.provenance = "longrange d=" + std::to_string(d) + " scramble=" + format_real(scramble) +
                          " seed=" + std::to_string(seed);
  count_emissions(out);
  // A redraw is one more uniform draw, so scrambling just lowers fidelity.
  LongRangeGrammar effective = grammar;
  effective.echo_fidelity = grammar.echo_fidelity * (1.0 - scramble);
  out.ground_truth = {{"grammar", grammar.to_json()},
                      {"scramble", scramble},
                      {"seed", seed},
                      {"n_songs", n_songs},
                      {"n_pairs", n_pairs_total},
                      {"n_redrawn", n_redrawn},
                      {"filler_entropy_nats", grammar.filler_entropy()},
                      {"echo_entropy_nats", effective.echo_entropy()},
                      {"role_counts",
                       {{"filler", out.role_count(Role::filler)},
                        {"cue", out.role_count(Role::cue)},
                        {"echo", out.role_count(Role::echo)}}}};
  return out;
}

std::pair<SynthCorpus, SynthCorpus> ablation_like_pair(const LongRangeGrammar& grammar, double degree,
                                                       std::size_t n_songs, std::uint64_t seed) {
  if (!(degree >= 0.0 && degree <= 1.0)) throw std::invalid_argument("scramble degree must lie in [0, 1]");
  Rng rng(seed);
  const auto s1 = rng.fork_seed();
  const auto s2 = rng.fork_seed();
  return {gen_long_range(grammar, n_songs, s1, 0.0), gen_long_range(grammar, n_songs, s2, degree)};
}

// ---------------------------------------------------------------- two-context grammar

void TwoContextGrammar::validate() const {
  if (n_fillers < 1) throw std::invalid_argument("grammar needs fillers");
  if (min_length < 3 || min_length > max_length) throw std::invalid_argument("song length range is invalid");
  if (motifs_per_song < 1 || 3 * motifs_per_song > min_length)
    throw std::invalid_argument("motifs do not fit in the shortest song");
  if (!(first_context >= 0.0 && first_context <= 1.0)) throw std::invalid_argument("first_context must be in [0, 1]");
}

Vocab TwoContextGrammar::vocab() const {
  std::vector<std::string> syl{"a", "b", "c", "d", "x"};
  for (std::size_t i = 0; i < n_fillers; ++i) syl.push_back("f" + std::to_string(i));
  return Vocab::from_syllables(syl);
}

SynthCorpus gen_two_context(const TwoContextGrammar& grammar, std::size_t n_songs, std::uint64_t seed) {
  grammar.validate();
  SynthCorpus out;
  out.corpus.vocab = grammar.vocab();
  const auto& v = out.corpus.vocab;
  const TokenId a = v.id("a"), b = v.id("b"), c = v.id("c"), dd = v.id("d"), x = v.id("x");
  std::vector<TokenId> fillers;
  for (std::size_t i = 0; i < grammar.n_fillers; ++i) fillers.push_back(v.id("f" + std::to_string(i)));

  Rng rng(seed);
  for (std::size_t s = 0; s < n_songs; ++s) {
    const auto len = static_cast<std::size_t>(
        rng.uniform_int(static_cast<std::int64_t>(grammar.min_length), static_cast<std::int64_t>(grammar.max_length)));
    std::vector<Role> role(len + 2, Role::filler);
    role.front() = role.back() = Role::special;
    std::vector<TokenId> ids(len + 2, special::pad);
    ids.front() = special::bos;
    ids.back() = special::eos;
    std::size_t placed = 0;
    for (std::size_t attempt = 0; placed < grammar.motifs_per_song && attempt < 64 * grammar.motifs_per_song; ++attempt) {
      const auto p = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(len - 2)));
      if (role[p] != Role::filler || role[p + 1] != Role::filler || role[p + 2] != Role::filler) continue;
      const bool first = rng.bernoulli(grammar.first_context);
      ids[p] = first ? a : c;
      ids[p + 1] = x;
      ids[p + 2] = first ? b : dd;
      role[p] = Role::cue;
      role[p + 1] = Role::ambiguous;
      role[p + 2] = Role::echo;
      ++placed;
    }
    for (std::size_t t = 1; t <= len; ++t)
      if (role[t] == Role::filler) ids[t] = fillers[rng.below(fillers.size())];
    out.corpus.songs.push_back({std::move(ids)});
    out.roles.push_back(std::move(role));
  }
  out.corpus.provenance = "twocontext seed=" + std::to_string(seed);
  count_emissions(out);
  out.ground_truth = {{"seed", seed}, {"n_songs", n_songs}, {"ambiguous_token", "x"}, {"first_context", grammar.first_context},
                      {"continuations", {{"a", "b"}, {"c", "d"}}}};
  return out;
}

// ---------------------------------------------------------------- motif seed

Corpus motif_seed_corpus(std::size_t n_songs, std::uint64_t seed) {
  // Motifs share syllables, so the next syllable often depends on several
  // preceding ones.
  static const std::vector<std::vector<std::string>> motifs{
      {"A", "B", "C", "D"}, {"A", "B", "E"}, {"F", "C", "D", "B"}, {"G", "E", "A", "B"}, {"H", "F", "C"}};
  // Successor motifs; index motifs.size() closes the song.
  static const std::vector<std::vector<std::size_t>> next{{1, 2, 5}, {0, 3}, {4, 1, 5}, {2, 0}, {3, 5}};
  static const std::vector<std::size_t> openers{0, 3, 4};

  Corpus corpus;
  std::vector<std::string> syl{"A", "B", "C", "D", "E", "F", "G", "H"};
  corpus.vocab = Vocab::from_syllables(syl);
  Rng rng(seed);
  for (std::size_t s = 0; s < n_songs; ++s) {
    std::vector<TokenId> ids;
    std::size_t m = openers[rng.below(openers.size())];
    for (std::size_t steps = 0; m < motifs.size() && steps < 12; ++steps) {
      for (const auto& t : motifs[m]) ids.push_back(corpus.vocab.id(t));
      m = next[m][rng.below(next[m].size())];
    }
    corpus.songs.push_back(make_song(ids));
  }
  corpus.provenance = "motif seed " + std::to_string(seed);
  return corpus;
}

MarkovModel motif_markov_generator(std::size_t order, std::uint64_t seed) {
  return MarkovModel::fit(motif_seed_corpus(400, seed), static_cast<int>(order));
}

double generator_entropy_rate(const MarkovModel& generator, const Corpus& corpus) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& song : corpus.songs) {
    const auto mask = prediction_mask(song);
    for (std::size_t t = 1; t < song.ids.size(); ++t) {
      if (!mask[t - 1]) continue;
      const auto p = generator.predict(std::span<const TokenId>(song.ids.data(), t));
      sum += entropy(p);
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("corpus has no prediction positions");
  return sum / static_cast<double>(n);
}

}  // namespace songlm
