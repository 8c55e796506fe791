#include <doctest.h>

#include <cmath>

#include "songlm/classify.hpp"
#include "songlm/rng.hpp"

using namespace songlm;

namespace {

Gpt<float> tiny_backbone(std::uint64_t seed = 1) {
  GptConfig c;
  c.n_layers = 1;
  c.n_heads = 2;
  c.hidden = 16;
  c.context_len = 16;
  c.dropout = 0.0;
  c.vocab_size = 7;
  return Gpt<float>(c, seed);
}

// Class 0 songs use syllable 4 only, class 1 uses syllable 5; filler 6 mixed in.
LabeledCorpus toy(std::size_t n, std::uint64_t seed, bool shuffle_labels = false) {
  Rng rng(seed);
  LabeledCorpus d;
  d.corpus.vocab = Vocab::from_syllables({"a", "b", "c"});
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    std::vector<TokenId> syl;
    const auto len = 3 + rng.below(6);
    for (std::size_t t = 0; t < len; ++t) syl.push_back(t > 0 && rng.bernoulli(0.5) ? 6 : (label ? 5 : 4));
    d.corpus.songs.push_back(make_song(syl));
    d.labels.push_back(label);
  }
  if (shuffle_labels) rng.shuffle(d.labels.begin(), d.labels.end());
  return d;
}

TrainSpec quick_spec() {
  TrainSpec s;
  s.batch_size = 8;
  s.lr = 1e-2;
  s.max_epochs = 30;
  s.patience = 5;
  s.seed = 4;
  return s;
}

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("separable toy is learned") {
    Classifier clf(tiny_backbone(), 2);
    auto train_set = toy(80, 1), eval_set = toy(40, 2), test_set = toy(100, 3);
    auto hist = finetune(clf, train_set, eval_set, quick_spec());
    CHECK(hist.best_eval_accuracy >= 0.99);
    auto rep = evaluate_classifier(clf, test_set);
    CHECK(rep.accuracy >= 0.99);
    CHECK(rep.auc >= 0.99);
  }

  TEST_CASE("shuffled labels stay near chance") {
    Classifier clf(tiny_backbone(), 2);
    auto spec = quick_spec();
    spec.max_epochs = 5;
    finetune(clf, toy(80, 1, true), toy(40, 2, true), spec);
    auto rep = evaluate_classifier(clf, toy(400, 5, true));
    CHECK(rep.accuracy > 0.4);
    CHECK(rep.accuracy < 0.6);
  }

  TEST_CASE("head-only tuning leaves the backbone untouched") {
    auto backbone = tiny_backbone();
    auto before = snapshot(backbone);
    Classifier clf(backbone.clone(), 2);
    auto spec = quick_spec();
    spec.max_epochs = 3;
    finetune(clf, toy(40, 1), toy(20, 2), spec, FinetuneScope::head_only);
    CHECK(snapshot(clf.backbone()) == before);
    CHECK(clf.parameters(FinetuneScope::head_only).size() == 2);
    CHECK(clf.parameters(FinetuneScope::full).size() == backbone.parameters().size() + 2);
  }

  TEST_CASE("single-class training data is rejected") {
    Classifier clf(tiny_backbone(), 2);
    auto d = toy(10, 1);
    for (auto& l : d.labels) l = 1;
    CHECK_THROWS_AS(finetune(clf, d, toy(10, 2), quick_spec()), std::invalid_argument);
  }

  TEST_CASE("upper bound is accuracy on the training split") {
    Classifier clf(tiny_backbone(), 2);
    auto d = toy(30, 1);
    auto s = clf.scores(d.corpus);
    CHECK(upper_bound_accuracy(clf, d) == doctest::Approx(confusion_at(s, d.labels, 0.5).accuracy()));
  }

  TEST_CASE("duplicate injection caps the upper bound") {
    auto d = inject_cross_label_duplicates(toy(100, 1), 0.1, 3);
    std::size_t clashes = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = i + 1; j < d.size(); ++j)
        if (d.labels[i] != d.labels[j] && d.corpus.songs[i].ids == d.corpus.songs[j].ids) ++clashes;
    CHECK(clashes >= 5);
    Classifier clf(tiny_backbone(), 2);
    finetune(clf, d, toy(20, 2), quick_spec());
    CHECK(upper_bound_accuracy(clf, d) <= 0.95);
  }

  TEST_CASE("checkpoint round trip keeps scores") {
    Classifier clf(tiny_backbone(), 9);
    auto d = toy(10, 1);
    auto back = Classifier::from_checkpoint(clf.to_checkpoint(d.corpus.vocab));
    auto a = clf.scores(d.corpus), b = back.scores(d.corpus);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }

  TEST_CASE("long songs keep their tail") {
    Classifier clf(tiny_backbone(), 2);
    Song s = make_song(std::vector<TokenId>(40, 4));
    const double p = clf.positive_probability(s);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }

  TEST_CASE("span sweep runs each span") {
    auto spec = quick_spec();
    spec.max_epochs = 2;
    auto rows = span_restricted_classification([](std::size_t) { return tiny_backbone(); }, {1, 16}, toy(20, 1),
                                               toy(10, 2), toy(20, 3), spec);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].span == 1);
    CHECK(sweep_csv(rows).find("span") != std::string::npos);
    CHECK_FALSE(roc_csv(rows).empty());
  }

  TEST_CASE("scope names") {
    CHECK(parse_scope("full") == FinetuneScope::full);
    CHECK(parse_scope("head") == FinetuneScope::head_only);
    CHECK_THROWS(parse_scope("tail"));
  }
}
