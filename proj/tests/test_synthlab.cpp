#include <doctest.h>

#include <cmath>
#include <map>

#include "songlm/synthlab.hpp"

using namespace songlm;

namespace {

// Cue index and echo index for every pair in the corpus.
std::vector<std::pair<int, int>> cue_echo_pairs(const SynthCorpus& s, std::size_t distance) {
  std::vector<std::pair<int, int>> out;
  const auto& v = s.corpus.vocab;
  for (std::size_t i = 0; i < s.corpus.size(); ++i) {
    const auto& ids = s.corpus.songs[i].ids;
    for (std::size_t t = 0; t < ids.size(); ++t)
      if (s.roles[i][t] == Role::cue) {
        REQUIRE(s.roles[i][t + distance] == Role::echo);
        out.emplace_back(std::stoi(v.token(ids[t]).substr(1)), std::stoi(v.token(ids[t + distance]).substr(1)));
      }
  }
  return out;
}

double conditional_entropy(const std::vector<std::pair<int, int>>& pairs) {
  std::map<int, std::map<int, double>> joint;
  std::map<int, double> cue;
  for (auto [c, e] : pairs) {
    joint[c][e] += 1;
    cue[c] += 1;
  }
  double h = 0;
  const double n = static_cast<double>(pairs.size());
  for (auto& [c, row] : joint)
    for (auto& [e, k] : row) h -= k / n * std::log(k / cue[c]);
  return h;
}

double mutual_information(const std::vector<std::pair<int, int>>& pairs) {
  std::map<int, double> echo;
  for (auto [c, e] : pairs) echo[e] += 1;
  double h = 0;
  const double n = static_cast<double>(pairs.size());
  for (auto& [e, k] : echo) h -= k / n * std::log(k / n);
  return h - conditional_entropy(pairs);
}

std::vector<double> echo_marginal(const std::vector<std::pair<int, int>>& pairs, int k) {
  std::vector<double> p(static_cast<std::size_t>(k), 0.0);
  for (auto [c, e] : pairs) p[static_cast<std::size_t>(e)] += 1.0 / static_cast<double>(pairs.size());
  return p;
}

}  // namespace

TEST_SUITE("synthlab") {
  TEST_CASE("cue and echo sit exactly d apart") {
    LongRangeGrammar g;
    auto s = gen_long_range(g, 200, 1);
    s.corpus.validate();
    for (const auto& [c, e] : cue_echo_pairs(s, g.distance)) CHECK(c == e);
    for (std::size_t i = 0; i < s.corpus.size(); ++i) {
      const auto n = s.corpus.songs[i].syllables();
      CHECK(n >= g.min_length);
      CHECK(n <= g.max_length);
      CHECK(s.roles[i].size() == s.corpus.songs[i].size());
    }
    CHECK(s.corpus.vocab.size() == 20);
  }

  TEST_CASE("echo entropy matches simulation") {
    LongRangeGrammar g;
    g.echo_fidelity = 0.7;
    auto s = gen_long_range(g, 6000, 2);
    CHECK(std::abs(conditional_entropy(cue_echo_pairs(s, g.distance)) - g.echo_entropy()) < 0.01);
    CHECK(s.ground_truth["echo_entropy_nats"].get<double>() == doctest::Approx(g.echo_entropy()));
    LongRangeGrammar exact;
    CHECK(exact.echo_entropy() == 0.0);
    CHECK(exact.filler_entropy() == doctest::Approx(std::log(10.0)));
  }

  TEST_CASE("full scrambling severs the cue") {
    LongRangeGrammar g;
    auto [intact, scrambled] = ablation_like_pair(g, 1.0, 4000, 3);
    auto pi = cue_echo_pairs(intact, g.distance), ps = cue_echo_pairs(scrambled, g.distance);
    CHECK(mutual_information(pi) > 1.0);
    CHECK(mutual_information(ps) < 0.02);
    CHECK(scrambled.ground_truth["echo_entropy_nats"].get<double>() == doctest::Approx(std::log(3.0)));
    // Same inventory and marginals.
    CHECK(intact.corpus.vocab == scrambled.corpus.vocab);
    auto a = echo_marginal(pi, 3), b = echo_marginal(ps, 3);
    double tv = 0;
    for (std::size_t i = 0; i < 3; ++i) tv += std::abs(a[i] - b[i]) / 2;
    CHECK(tv < 0.02);
  }

  TEST_CASE("degree 0 pair is statistically the same source") {
    LongRangeGrammar g;
    auto [a, b] = ablation_like_pair(g, 0.0, 3000, 4);
    auto pa = cue_echo_pairs(a, g.distance), pb = cue_echo_pairs(b, g.distance);
    CHECK(mutual_information(pb) == doctest::Approx(mutual_information(pa)).epsilon(0.02));
    const double ta = static_cast<double>(a.role_count(Role::filler)) / static_cast<double>(a.corpus.size());
    const double tb = static_cast<double>(b.role_count(Role::filler)) / static_cast<double>(b.corpus.size());
    CHECK(ta == doctest::Approx(tb).epsilon(0.03));
  }

  TEST_CASE("bookkeeping matches the corpus") {
    LongRangeGrammar g;
    auto s = gen_long_range(g, 300, 5, 0.5);
    std::vector<std::size_t> counts(s.corpus.vocab.size(), 0);
    for (const auto& song : s.corpus.songs)
      for (auto id : song.ids) ++counts[static_cast<std::size_t>(id)];
    CHECK(counts == s.emission_counts);
    CHECK(s.ground_truth["role_counts"]["echo"].get<std::size_t>() == s.role_count(Role::echo));
    CHECK(s.role_count(Role::cue) == s.role_count(Role::echo));
    CHECK(s.ground_truth["n_pairs"].get<std::size_t>() == s.role_count(Role::cue));
    CHECK(counts[special::pad] == 0);
    CHECK(counts[special::unk] == 0);
  }

  TEST_CASE("role filter selects echo targets") {
    LongRangeGrammar g;
    auto s = gen_long_range(g, 10, 6);
    auto f = s.role_filter(Role::echo);
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.corpus.size(); ++i)
      for (std::size_t t = 0; t < s.corpus.songs[i].size(); ++t)
        if (f(i, t)) {
          ++n;
          CHECK(s.corpus.vocab.token(s.corpus.songs[i].ids[t])[0] == 'e');
        }
    CHECK(n == s.role_count(Role::echo));
  }

  TEST_CASE("invalid grammars") {
    LongRangeGrammar g;
    g.distance = 20;
    CHECK_THROWS(g.validate());
    g = {};
    g.distance = 1;
    CHECK_THROWS(g.validate());
    g = {};
    g.echo_fidelity = 1.5;
    CHECK_THROWS(g.validate());
    CHECK_THROWS(gen_long_range({}, 5, 1, -0.1));
    auto j = LongRangeGrammar{}.to_json();
    j["distance"] = 5;
    CHECK(LongRangeGrammar::from_json(j).distance == 5);
  }

  TEST_CASE("same seed, same corpus") {
    LongRangeGrammar g;
    CHECK(format_corpus(gen_long_range(g, 50, 9).corpus) == format_corpus(gen_long_range(g, 50, 9).corpus));
    CHECK(format_corpus(gen_long_range(g, 50, 9).corpus) != format_corpus(gen_long_range(g, 50, 10).corpus));
    auto a = gen_two_context({}, 40, 3), b = gen_two_context({}, 40, 3);
    CHECK(format_corpus(a.corpus) == format_corpus(b.corpus));
  }

  TEST_CASE("two-context motifs") {
    TwoContextGrammar g;
    auto s = gen_two_context(g, 300, 7);
    const auto& v = s.corpus.vocab;
    const TokenId x = v.id("x");
    std::size_t from_a = 0, from_c = 0;
    for (const auto& song : s.corpus.songs)
      for (std::size_t t = 1; t + 1 < song.size(); ++t)
        if (song.ids[t] == x) {
          const auto& before = v.token(song.ids[t - 1]);
          const auto& after = v.token(song.ids[t + 1]);
          if (before == "a") {
            CHECK(after == "b");
            ++from_a;
          } else {
            CHECK(before == "c");
            CHECK(after == "d");
            ++from_c;
          }
        }
    // 900 motifs at p = 0.7: sd of the share is about 0.015.
    const double share = static_cast<double>(from_a) / static_cast<double>(from_a + from_c);
    CHECK(std::abs(share - g.first_context) < 0.06);
    CHECK(s.role_count(Role::ambiguous) == from_a + from_c);

    g.first_context = 1.0;
    auto only_a = gen_two_context(g, 20, 7);
    for (const auto& song : only_a.corpus.songs)
      for (auto id : song.ids) CHECK(id != only_a.corpus.vocab.id("c"));

    g.first_context = 1.5;
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
  }

  TEST_CASE("motif generator entropy rate is attainable") {
    auto gen = motif_markov_generator(6, 11);
    auto data = synth_corpus(gen, 2000, 12);
    const double h = generator_entropy_rate(gen, data.corpus);
    CHECK(h > 0.05);
    CHECK(h < std::log(8.0));
    auto refit = MarkovModel::fit(data.corpus, 6);
    auto r = next_token_cross_entropy(MarkovPredictor(refit), data.corpus);
    // In-sample refit cannot be worse than the source on average by much.
    CHECK(r.mean_nats <= h + 0.05);
  }
}
