#include <doctest.h>

#include <cmath>
#include <limits>

#include "op_cases.hpp"
#include "songlm/checkpoint.hpp"
#include "songlm/gpt.hpp"
#include "songlm/rnn.hpp"
#include "songlm/training.hpp"

using namespace songlm;

namespace {

GptConfig tiny_gpt(std::size_t layers = 2, std::size_t heads = 2, std::size_t hidden = 8) {
  GptConfig c;
  c.n_layers = layers;
  c.n_heads = heads;
  c.hidden = hidden;
  c.context_len = 16;
  c.dropout = 0.0;
  c.vocab_size = 9;
  return c;
}

std::vector<TokenId> ids_of(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_SUITE("models") {
  TEST_CASE("config validation and presets") {
    auto c = tiny_gpt();
    CHECK_NOTHROW(c.validate());
    c.n_heads = 3;
    CHECK_THROWS(c.validate());
    c = tiny_gpt();
    c.attention_span = 0;
    CHECK_THROWS(c.validate());
    CHECK(GptConfig::medium(16).hidden == 384);
    CHECK(GptConfig::large(16).n_layers == 12);
    CHECK(GptConfig::small(16).n_heads == 1);
    auto back = GptConfig::from_json(tiny_gpt().to_json());
    CHECK(back.to_json() == tiny_gpt().to_json());
  }

  TEST_CASE("captured attention is causal and row-stochastic") {
    Gpt<float> m(tiny_gpt(), 1);
    ForwardOptions o;
    o.capture = true;
    auto out = m.forward(ids_of({0, 4, 5, 6, 7}), o);
    CHECK(out.logits.shape() == ag::Shape{5, 9});
    REQUIRE(out.attention);
    CHECK(out.attention->layers() == 2);
    CHECK(out.attention->heads() == 2);
    CHECK(out.states.size() == 3);
    for (const auto& layer : out.attention->maps)
      for (const auto& a : layer)
        for (std::size_t q = 0; q < 5; ++q) {
          double s = 0;
          for (std::size_t k = 0; k < 5; ++k) {
            if (k > q) CHECK(a(q, k) == 0.0);
            s += a(q, k);
          }
          CHECK(std::abs(s - 1.0) < 1e-5);
        }
  }

  TEST_CASE("span 1 leaves support {t-1, t} in every layer") {
    auto c = tiny_gpt();
    c.attention_span = 1;
    Gpt<float> m(c, 2);
    ForwardOptions o;
    o.capture = true;
    auto out = m.forward(ids_of({0, 4, 5, 6, 7, 8}), o);
    for (const auto& layer : out.attention->maps)
      for (const auto& a : layer)
        for (std::size_t q = 0; q < 6; ++q)
          for (std::size_t k = 0; k < 6; ++k) {
            const bool allowed = k <= q && q - k <= 1;
            if (!allowed) CHECK(a(q, k) == 0.0);
            else CHECK(a(q, k) > 0.0);
          }
  }

  TEST_CASE("span of the full context equals the unrestricted model") {
    Gpt<float> a(tiny_gpt(), 3);
    auto b = a.clone();
    b.set_attention_span(16);
    auto ids = ids_of({0, 4, 5, 6, 7, 8, 4, 4});
    auto la = a.logits(ids, {});
    auto lb = b.logits(ids, {});
    for (std::size_t i = 0; i < la.numel(); ++i) CHECK(la.data()[i] == lb.data()[i]);
  }

  TEST_CASE("zero token embeddings give uniform next-token rows") {
    Gpt<float> m(tiny_gpt(), 4);
    for (auto& p : m.parameters())
      if (p.name == "wte") std::fill(p.tensor.data().begin(), p.tensor.data().end(), 0.0f);
    auto l = m.logits(ids_of({0, 4, 5}), {});
    auto s = ag::softmax(l, 1);
    for (float v : s.data()) CHECK(v == doctest::Approx(1.0 / 9));
  }

  TEST_CASE("input errors") {
    Gpt<float> m(tiny_gpt(), 5);
    std::vector<TokenId> long_ids(17, 4);
    CHECK_THROWS(m.logits(long_ids, {}));
    CHECK_THROWS(m.logits(ids_of({0, 9}), {}));
    CHECK_THROWS(m.logits(std::vector<TokenId>{}, {}));
    RnnConfig rc;
    rc.vocab_size = 5;
    rc.hidden = 10;
    rc.embed = 10;
    Rnn<float> r(rc, 1);
    CHECK_THROWS(r.logits(ids_of({0, 5}), {}));
  }

  TEST_CASE("recurrent config ranges") {
    RnnConfig c;
    c.vocab_size = 5;
    CHECK_NOTHROW(c.validate());
    c.n_layers = 7;
    CHECK_THROWS(c.validate());
    c = RnnConfig{};
    c.vocab_size = 5;
    c.hidden = 9;
    CHECK_THROWS(c.validate());
    c.hidden = 10;
    c.dropout = 1.5;
    CHECK_THROWS(c.validate());
  }

  TEST_CASE("zero-weight recurrent step is uniform") {
    RnnConfig c;
    c.cell = CellKind::rnn;
    c.vocab_size = 6;
    c.hidden = 10;
    c.embed = 10;
    Rnn<float> m(c, 1);
    for (auto& p : m.parameters()) std::fill(p.tensor.data().begin(), p.tensor.data().end(), 0.0f);
    auto s = ag::softmax(m.logits(ids_of({0}), {}), 1);
    for (float v : s.data()) CHECK(v == doctest::Approx(1.0 / 6));
  }

  TEST_CASE("LSTM with open forget gate and shut input gate keeps its cell") {
    RnnConfig c;
    c.cell = CellKind::lstm;
    c.vocab_size = 6;
    c.hidden = 10;
    c.embed = 10;
    Rnn<double> m(c, 2);
    for (auto& p : m.parameters()) {
      if (p.name == "l0.w_ih" || p.name == "l0.w_hh") std::fill(p.tensor.data().begin(), p.tensor.data().end(), 0.0);
      if (p.name == "l0.b") {
        auto d = p.tensor.data();
        for (std::size_t i = 0; i < 10; ++i) d[i] = -1000.0;      // input gate
        for (std::size_t i = 10; i < 20; ++i) d[i] = 1000.0;      // forget gate
      }
    }
    ForwardOptions o;
    o.capture = true;
    auto out = m.forward(ids_of({0, 4, 5, 1, 2}), o);
    const auto& cell = out.states.cell.at(0);
    for (std::size_t t = 1; t < cell.rows; ++t)
      for (std::size_t j = 0; j < cell.cols; ++j) CHECK(cell(t, j) == cell(0, j));
  }

  TEST_CASE("whole-model gradient checks") {
    Gpt<double> g(tiny_gpt(2, 2, 4), 7);
    CHECK(testing::model_gradcheck(g, ids_of({0, 4, 5, 6, 4, 1})) < 1e-4);
    auto sc = tiny_gpt(1, 1, 4);
    sc.attention_span = 2;
    Gpt<double> gs(sc, 8);
    CHECK(testing::model_gradcheck(gs, ids_of({0, 4, 5, 6, 4, 1})) < 1e-4);
    for (auto cell : {CellKind::rnn, CellKind::lstm}) {
      RnnConfig c;
      c.cell = cell;
      c.vocab_size = 6;
      c.hidden = 10;
      c.embed = 10;
      c.n_layers = 2;
      Rnn<double> r(c, 9);
      CHECK(testing::model_gradcheck(r, ids_of({0, 4, 5, 3, 1})) < 1e-4);
    }
  }

  TEST_CASE("sampling is seeded and truncation is flagged") {
    Gpt<float> m(tiny_gpt(), 11);
    auto a = sample(m, 5, 10, 1.0);
    auto b = sample(m, 5, 10, 1.0);
    CHECK(a.ids == b.ids);
    auto t = sample(m, 5, 2, 1.0);
    if (t.ids.back() != special::eos) {
      CHECK(t.truncated);
      CHECK(t.ids.size() == 3);
    }
  }

  TEST_CASE("greedy sampling reproduces a memorised song") {
    auto c = parse_corpus("a b c a d\n");
    GptConfig cfg = tiny_gpt(1, 1, 16);
    cfg.vocab_size = c.vocab.size();
    Gpt<float> m(cfg, 12);
    TrainSpec ts;
    ts.max_epochs = 300;
    ts.patience = 300;
    ts.lr = 1e-2;
    ts.optimizer = OptimizerKind::adamw;
    train(m, c, c, ts);
    auto g = sample(m, 0, 20, 0.0);
    CHECK(g.ids == c.songs[0].ids);
  }

  TEST_CASE("checkpoint round trip") {
    auto c = parse_corpus("a b\nb a\n");
    auto cfg = tiny_gpt();
    cfg.vocab_size = c.vocab.size();
    Gpt<float> m(cfg, 13);
    auto ck = make_checkpoint(m, c.vocab);
    auto back = Checkpoint::from_json(nlohmann::json::parse(ck.to_json().dump()));
    auto m2 = instantiate(back);
    auto ids = ids_of({0, 4, 5});
    auto a = m.logits(ids, {}), b = m2->logits(ids, {});
    for (std::size_t i = 0; i < a.numel(); ++i) CHECK(a.data()[i] == b.data()[i]);
    CHECK(describe(back)["parameter_count"] == m.parameter_count());

    RnnConfig rc;
    rc.vocab_size = c.vocab.size();
    rc.hidden = 10;
    rc.embed = 12;
    Rnn<float> r(rc, 3);
    auto r2 = instantiate(make_checkpoint(r, c.vocab));
    CHECK(r2->arch() == "lstm");
    CHECK(r2->parameter_count() == r.parameter_count());
  }

  TEST_CASE("base64") {
    const std::string s = "songlm\x01\x02";
    std::vector<unsigned char> bytes(s.begin(), s.end());
    CHECK(base64_decode(base64_encode(bytes)) == bytes);
  }
}
