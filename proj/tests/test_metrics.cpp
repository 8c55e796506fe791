#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "songlm/markov.hpp"
#include "songlm/metrics.hpp"
#include "songlm/rng.hpp"

using namespace songlm;

namespace {

/// Knows every song: one-hot on the true next token.
class OraclePredictor final : public NextTokenPredictor {
 public:
  explicit OraclePredictor(std::size_t v) : v_(v) {}
  Matrix predict(const Song& s) const override {
    Matrix m(s.ids.size() - 1, v_);
    for (std::size_t t = 1; t < s.ids.size(); ++t) m(t - 1, static_cast<std::size_t>(s.ids[t])) = 1.0;
    return m;
  }
  std::size_t vocab_size() const override { return v_; }

 private:
  std::size_t v_;
};

/// Always puts its largest mass on one token.
class ConstantPredictor final : public NextTokenPredictor {
 public:
  ConstantPredictor(std::size_t v, TokenId favourite) : v_(v), fav_(favourite) {}
  Matrix predict(const Song& s) const override {
    Matrix m(s.ids.size() - 1, v_, 0.5 / static_cast<double>(v_ - 1));
    for (std::size_t r = 0; r < m.rows; ++r) m(r, static_cast<std::size_t>(fav_)) = 0.5;
    return m;
  }
  std::size_t vocab_size() const override { return v_; }

 private:
  std::size_t v_;
  TokenId fav_;
};

double mann_whitney(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      if (y[i] == 1 && y[j] == 0) {
        pairs += 1;
        wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
      }
  return wins / pairs;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("mask drops the first syllable and eos") {
    auto c = parse_corpus("a b c d\na\n");
    auto m = prediction_mask(c.songs[0]);
    CHECK(m == std::vector<std::uint8_t>{0, 1, 1, 1, 0});
    auto m2 = prediction_mask(c.songs[1]);
    CHECK(m2 == std::vector<std::uint8_t>{0, 0});
  }

  TEST_CASE("oracle model") {
    auto c = parse_corpus("a b c d\nb b a c\n");
    auto s = evaluate_next_token(OraclePredictor(c.vocab.size()), c);
    CHECK(s.cross_entropy == 0.0);
    CHECK(s.accuracy == 1.0);
    CHECK(s.n_predictions == 6);
  }

  TEST_CASE("uniform model scores ln of its support") {
    auto c = parse_corpus("a b c\nc b a a\n");
    std::vector<TokenId> support{special::eos, 4, 5, 6, 0, 3, 2};
    UniformPredictor u(c.vocab.size(), support);
    auto r = next_token_cross_entropy(u, c);
    CHECK(std::abs(r.mean_nats - std::log(7.0)) < 1e-9);
  }

  TEST_CASE("order-1 Markov equals the hand computation") {
    auto c = parse_corpus("a b a\na a b\n");
    auto m = MarkovModel::fit(c, 1);
    // After a: b 2, a 1, eos 1. After b: a 1, eos 1.
    // Masked targets: b|a, a|b in song 1; a|a, b|a in song 2.
    const double want = -(std::log(2.0 / 4) + std::log(1.0 / 2) + std::log(1.0 / 4) + std::log(2.0 / 4)) / 4;
    auto r = next_token_cross_entropy(MarkovPredictor(m), c);
    CHECK(r.n_predictions == 4);
    CHECK(r.mean_nats == doctest::Approx(want).epsilon(1e-12));
  }

  TEST_CASE("constant prediction accuracy equals the token's share") {
    // Masked targets: 10 positions, "x" in 4 of them.
    auto c = parse_corpus("s x y x z y\ns z x y y x\n");
    const auto x = c.vocab.id("x");
    CHECK(next_token_accuracy(ConstantPredictor(c.vocab.size(), x), c) == doctest::Approx(0.4));
  }

  TEST_CASE("deterministic chain with its Markov fit") {
    auto c = parse_corpus("a b c d e\na b c d e\n");
    auto m = MarkovModel::fit(c, 1);
    CHECK(next_token_accuracy(MarkovPredictor(m), c) == 1.0);
  }

  TEST_CASE("zero probability on the truth is infinite and flagged") {
    auto train = parse_corpus("a b\n");
    auto test = parse_corpus("a b a b\n", train.vocab);
    auto m = MarkovModel::fit(train, 1);
    auto s = evaluate_next_token(MarkovPredictor(m), test);
    CHECK(std::isinf(s.cross_entropy));
    CHECK(s.n_infinite == 1);
  }

  TEST_CASE("argmax ties go to the lowest id") {
    auto c = parse_corpus("a b c\n");
    std::vector<TokenId> support{4, 5, 6};
    // Uniform over a, b, c: argmax is a (id 4); the masked target is b.
    CHECK(next_token_accuracy(UniformPredictor(c.vocab.size(), support), c) == 0.0);
  }

  TEST_CASE("confusion arithmetic") {
    ConfusionCounts k{2, 1, 3, 4};
    CHECK(k.accuracy() == 0.5);
    CHECK(k.true_positive_rate() == doctest::Approx(1.0 / 3));
    CHECK(k.false_positive_rate() == 0.25);
  }

  TEST_CASE("perfect separation") {
    std::vector<double> s{0.1, 0.2, 0.8, 0.9};
    std::vector<int> y{0, 0, 1, 1};
    auto r = classification_metrics(s, y);
    CHECK(r.auc == 1.0);
    CHECK(r.accuracy == 1.0);
    CHECK(r.roc.front().fpr == 0.0);
    CHECK(r.roc.back().tpr == 1.0);
  }

  TEST_CASE("AUC equals Mann-Whitney with ties") {
    Rng rng(2);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 + rng.below(30);
      std::vector<double> s(n);
      std::vector<int> y(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<double>(rng.below(6)) / 5.0;
        y[i] = static_cast<int>(rng.below(2));
      }
      y[0] = 0;
      y[1] = 1;
      CHECK(std::abs(roc_auc(s, y) - mann_whitney(s, y)) < 1e-12);
      auto roc = roc_curve(s, y);
      for (std::size_t i = 1; i < roc.size(); ++i) {
        CHECK(roc[i].fpr >= roc[i - 1].fpr);
        CHECK(roc[i].tpr >= roc[i - 1].tpr);
      }
    }
  }

  TEST_CASE("independent labels give AUC near one half") {
    Rng rng(8);
    const std::size_t n = 4000;
    std::vector<double> s(n);
    std::vector<int> y(n);
    std::size_t pos = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.uniform();
      y[i] = rng.bernoulli(0.5);
      pos += y[i];
    }
    const double n1 = pos, n0 = n - pos;
    const double sd = std::sqrt((n0 + n1 + 1) / (12 * n0 * n1));
    CHECK(std::abs(roc_auc(s, y) - 0.5) < 3 * sd);
  }

  TEST_CASE("single-class labels make AUC undefined") {
    std::vector<double> s{0.1, 0.4};
    std::vector<int> y{1, 1};
    CHECK_THROWS_AS(roc_auc(s, y), MetricError);
    std::vector<int> bad{1};
    CHECK_THROWS(confusion_at(s, bad, 0.5));
  }
}
