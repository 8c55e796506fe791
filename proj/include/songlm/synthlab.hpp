#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "songlm/corpus.hpp"
#include "songlm/markov.hpp"
#include "songlm/metrics.hpp"

namespace songlm {

/// What generated each position of a synthetic song.
enum class Role : std::uint8_t { special, filler, cue, echo, ambiguous };

const char* to_string(Role role);

/// Songs of uniform filler syllables carrying cue/echo pairs: the echo sits
/// exactly `distance` positions after its cue and names the same pair.
struct LongRangeGrammar {
  std::size_t n_fillers = 10;
  std::size_t n_pairs = 3;
  std::size_t distance = 8;
  std::size_t min_length = 20;  // syllables
  std::size_t max_length = 60;
  std::size_t pairs_per_song = 3;
  /// Probability that an echo names its own cue; otherwise it is drawn
  /// uniformly from all echoes.
  double echo_fidelity = 1.0;

  void validate() const;
  Vocab vocab() const;
  /// Entropy of a filler position given its role (nats).
  double filler_entropy() const;
  /// Entropy of an echo given its cue (nats).
  double echo_entropy() const;
  nlohmann::json to_json() const;
  static LongRangeGrammar from_json(const nlohmann::json& j);
};

/// A generated corpus with the generator's own bookkeeping.
struct SynthCorpus {
  Corpus corpus;
  std::vector<std::vector<Role>> roles;      // aligned with each song's ids
  std::vector<std::size_t> emission_counts;  // per id, bos and eos included
  nlohmann::json ground_truth;

  /// Restricts metric evaluation to positions whose target has `role`.
  PositionFilter role_filter(Role role) const;
  std::size_t role_count(Role role) const;
};

/// Song length is uniform on [min_length, max_length]; up to
/// pairs_per_song cues are placed at distinct positions, never sharing a
/// slot with another pair's echo. `scramble` is the probability that an
/// echo is redrawn uniformly, severing it from its cue.
SynthCorpus gen_long_range(const LongRangeGrammar& grammar, std::size_t n_songs, std::uint64_t seed,
                           double scramble = 0.0);

/// Two corpora from the same grammar and inventory: intact, and with each
/// echo redrawn with probability `degree`. Independent song draws.
std::pair<SynthCorpus, SynthCorpus> ablation_like_pair(const LongRangeGrammar& grammar, double degree,
                                                       std::size_t n_songs, std::uint64_t seed);

/// Token "x" appears inside motifs "a x b" and "c x d": what follows x is
/// fixed by what preceded it.
struct TwoContextGrammar {
  std::size_t n_fillers = 8;
  std::size_t min_length = 16;
  std::size_t max_length = 32;
  std::size_t motifs_per_song = 3;
  // Share of motifs that are "a x b". At 0.5 the two clusters of x sit
  // symmetrically about its mean and cosine-to-mean cannot tell them apart.
  double first_context = 0.7;

  void validate() const;
  Vocab vocab() const;
};

SynthCorpus gen_two_context(const TwoContextGrammar& grammar, std::size_t n_songs, std::uint64_t seed);

/// Songs built from a handful of fixed motifs chained by a sparse motif
/// transition table; a compact source for exact-order Markov generators.
Corpus motif_seed_corpus(std::size_t n_songs, std::uint64_t seed);

/// Order-k generator fitted on the motif seed corpus.
MarkovModel motif_markov_generator(std::size_t order, std::uint64_t seed);

/// Mean generator entropy (nats) over the masked prediction positions of
/// `corpus`; the entropy rate the refit model should approach.
double generator_entropy_rate(const MarkovModel& generator, const Corpus& corpus);

}  // namespace songlm
