#include <doctest.h>

#include <cmath>
#include <map>

#include "songlm/markov.hpp"
#include "songlm/synthlab.hpp"

using namespace songlm;

namespace {

std::vector<TokenId> ctx(const Corpus& c, std::initializer_list<const char*> toks) {
  std::vector<TokenId> out{special::bos};
  for (auto t : toks) out.push_back(c.vocab.id(t));
  return out;
}

}  // namespace

TEST_SUITE("markov") {
  TEST_CASE("forced counts") {
    auto c = parse_corpus("a b\na b\n");
    auto m = MarkovModel::fit(c, 1);
    auto p = m.predict(ctx(c, {"a"}));
    CHECK(p[c.vocab.id("b")] == 1.0);
    auto q = m.predict(ctx(c, {"a", "b"}));
    CHECK(q[special::eos] == 1.0);
  }

  TEST_CASE("symmetric continuation") {
    auto c = parse_corpus("a b\na c\n");
    auto m = MarkovModel::fit(c, 1);
    auto p = m.predict(ctx(c, {"a"}));
    CHECK(p[c.vocab.id("b")] == 0.5);
    CHECK(p[c.vocab.id("c")] == 0.5);
  }

  TEST_CASE("order-2 tables equal a recount by hand") {
    auto c = parse_corpus("a b a b\nb a a\na a b\n");
    auto m = MarkovModel::fit(c, 2);
    // Independent recount: every (prev2, prev1) -> next inside each framed song.
    std::map<std::vector<TokenId>, std::map<TokenId, int>> want;
    for (const auto& s : c.songs)
      for (std::size_t t = 1; t < s.ids.size(); ++t) {
        ++want[{s.ids[t - 1]}][s.ids[t]];
        if (t >= 2) ++want[{s.ids[t - 2], s.ids[t - 1]}][s.ids[t]];
      }
    std::size_t rows = 0;
    for (const auto& [key, next] : want) {
      const auto* got = m.counts(key);
      REQUIRE(got);
      for (TokenId i = 0; i < static_cast<TokenId>(c.vocab.size()); ++i) {
        auto it = next.find(i);
        CHECK((*got)[i] == static_cast<std::uint32_t>(it == next.end() ? 0 : it->second));
      }
      ++rows;
    }
    CHECK(rows == m.context_count(1) + m.context_count(2));
  }

  TEST_CASE("backoff at song start and uniform fallback") {
    auto c = parse_corpus("a b c d e f g h\n");
    auto m = MarkovModel::fit(c, 6);
    CHECK(m.matched_order(ctx(c, {"a", "b"})) == 3);
    auto full = ctx(c, {"a", "b", "c", "d", "e", "f", "g"});
    CHECK(m.matched_order(full) == 6);
    // Full-length known context: the order-6 row exactly.
    auto p = m.predict(full);
    CHECK(p[c.vocab.id("h")] == 1.0);
    // Unseen token context: uniform over everything but pad.
    std::vector<TokenId> unseen{special::unk};
    auto u = m.predict(unseen);
    CHECK(m.matched_order(unseen) == 0);
    CHECK(u[special::pad] == 0.0);
    CHECK(u[special::bos] == doctest::Approx(1.0 / (c.vocab.size() - 1)));
  }

  TEST_CASE("predictions sum to one") {
    auto sc = gen_long_range({}, 50, 3);
    auto m = MarkovModel::fit(sc.corpus, 3);
    for (const auto& s : sc.corpus.songs)
      for (std::size_t t = 1; t < s.ids.size(); ++t) {
        auto p = m.predict(std::span<const TokenId>(s.ids.data(), t));
        double sum = 0;
        for (double x : p) sum += x;
        CHECK(std::abs(sum - 1.0) < 1e-9);
      }
  }

  TEST_CASE("order bounds") {
    auto c = parse_corpus("a b\n");
    CHECK_THROWS(MarkovModel::fit(c, 0));
    CHECK_THROWS(MarkovModel::fit(c, 7));
    CHECK_NOTHROW(MarkovModel::fit(c, 7, 7));
    CHECK_THROWS(MarkovModel::fit(Corpus{}, 1));
  }

  TEST_CASE("deterministic chain and seeded generation") {
    auto c = parse_corpus("a b\n");
    auto m = MarkovModel::fit(c, 1);
    for (std::uint64_t s = 0; s < 5; ++s) {
      auto g = m.generate(s, 10);
      CHECK_FALSE(g.truncated);
      CHECK(g.ids == c.songs[0].ids);
    }
    auto sc = gen_long_range({}, 30, 1);
    auto m3 = MarkovModel::fit(sc.corpus, 3);
    CHECK(m3.generate(42, 100).ids == m3.generate(42, 100).ids);
    auto t = m3.generate(42, 3);
    CHECK(t.truncated);
    CHECK(t.ids.size() == 4);
    CHECK(t.to_song().ids.back() == special::eos);
  }

  TEST_CASE("sampled frequencies match table probabilities") {
    auto c = parse_corpus("a b\na c\na c\na d\nb c\n");
    auto m = MarkovModel::fit(c, 1);
    const int n = 10000;
    std::map<TokenId, int> first;
    Rng rng(5);
    for (int i = 0; i < n; ++i) ++first[m.generate(rng, 20).ids[1]];
    const auto p = m.predict(std::vector<TokenId>{special::bos});
    for (TokenId t = 0; t < static_cast<TokenId>(p.size()); ++t) {
      const double mean = n * p[t];
      const double sd = std::sqrt(n * p[t] * (1 - p[t]));
      CHECK(std::abs(first[t] - mean) <= 3 * sd + 1e-9);
    }
  }

  TEST_CASE("synthetic corpus bookkeeping") {
    auto m = motif_markov_generator(6, 1);
    auto empty = synth_corpus(m, 0, 1);
    CHECK(empty.corpus.empty());
    auto r = synth_corpus(m, 200, 2);
    CHECK(r.corpus.size() == 200);
    CHECK(r.corpus.provenance.find("markov-order-6") != std::string::npos);
    auto st = corpus_stats(r.corpus);
    for (std::size_t i = 0; i < st.token_frequency.size(); ++i) CHECK(st.token_frequency[i] == r.emission_counts[i]);
  }

  TEST_CASE("order-6 synthesis: next token independent of the 7th-back token") {
    // Random three-syllable songs leave every 6-gram context several successors.
    Rng rng(4);
    Corpus seed;
    seed.vocab = Vocab::from_syllables({"a", "b", "c"});
    for (int i = 0; i < 300; ++i) {
      std::vector<TokenId> syl(20 + rng.below(20));
      for (auto& t : syl) t = static_cast<TokenId>(4 + rng.below(3));
      seed.songs.push_back(make_song(syl));
    }
    auto m = MarkovModel::fit(seed, 6);
    auto r = synth_corpus(m, 4000, 9);
    // Chi-square test of independence per 6-gram context between the
    // token 7 back and the next token.
    std::map<std::vector<TokenId>, std::map<TokenId, std::map<TokenId, double>>> tab;
    for (const auto& s : r.corpus.songs)
      for (std::size_t t = 7; t < s.ids.size(); ++t)
        ++tab[std::vector<TokenId>(s.ids.begin() + t - 6, s.ids.begin() + t)][s.ids[t - 7]][s.ids[t]];
    double chi2 = 0.0;
    int dof = 0;
    for (const auto& [key, rows] : tab) {
      std::map<TokenId, double> col;
      double total = 0;
      for (const auto& [back, nexts] : rows)
        for (const auto& [nx, k] : nexts) {
          col[nx] += k;
          total += k;
        }
      if (rows.size() < 2 || col.size() < 2 || total < 50) continue;
      for (const auto& [back, nexts] : rows) {
        double rt = 0;
        for (const auto& [nx, k] : nexts) rt += k;
        for (const auto& [nx, ck] : col) {
          const double e = rt * ck / total;
          auto it = nexts.find(nx);
          const double o = it == nexts.end() ? 0.0 : it->second;
          chi2 += (o - e) * (o - e) / e;
        }
      }
      dof += static_cast<int>((rows.size() - 1) * (col.size() - 1));
    }
    REQUIRE(dof > 0);
    // Wilson-Hilferty upper 1% point of chi-square(dof).
    const double k = dof, z = 2.326;
    const double crit = k * std::pow(1 - 2 / (9 * k) + z * std::sqrt(2 / (9 * k)), 3);
    INFO("chi2 " << chi2 << " dof " << dof);
    CHECK(chi2 < crit);
  }

  TEST_CASE("json round trip") {
    auto sc = gen_long_range({}, 20, 2);
    auto m = MarkovModel::fit(sc.corpus, 2);
    auto back = MarkovModel::from_json(m.to_json());
    CHECK(back.to_json() == m.to_json());
    const auto& s = sc.corpus.songs[0];
    CHECK(back.predict(std::span<const TokenId>(s.ids.data(), 5)) == m.predict(std::span<const TokenId>(s.ids.data(), 5)));
  }

  TEST_CASE("entropy") {
    std::vector<double> u(4, 0.25);
    CHECK(entropy(u) == doctest::Approx(std::log(4.0)));
    std::vector<double> d{0, 1, 0};
    CHECK(entropy(d) == 0.0);
  }
}
