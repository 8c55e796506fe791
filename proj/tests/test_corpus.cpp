#include <doctest.h>

#include <filesystem>

#include "songlm/corpus.hpp"
#include "songlm/io.hpp"

using namespace songlm;

TEST_SUITE("corpus") {
  TEST_CASE("two songs build a seven-id vocabulary") {
    auto c = parse_corpus("a b b\na c\n");
    CHECK(c.size() == 2);
    CHECK(c.vocab.size() == 7);
    CHECK(c.songs[0].ids.front() == special::bos);
    CHECK(c.songs[0].ids.back() == special::eos);
    CHECK(c.songs[0].ids.size() == 5);
    CHECK(c.vocab.token(c.songs[0].ids[1]) == "a");
  }

  TEST_CASE("vocab round-trips and keeps specials at 0..3") {
    auto v = Vocab::from_syllables({"z", "a", "m"});
    CHECK(v.token(special::bos) == "<bos>");
    CHECK(v.token(special::unk) == "<unk>");
    for (TokenId i = 0; i < static_cast<TokenId>(v.size()); ++i) CHECK(v.id(v.token(i)) == i);
    auto back = Vocab::from_json(v.to_json());
    CHECK(back == v);
  }

  TEST_CASE("blank line is an empty song") {
    try {
      parse_corpus("a b\n\nc\n");
      FAIL("expected an error");
    } catch (const CorpusError& e) {
      CHECK(std::string(e.what()).find("empty song at line 2") != std::string::npos);
    }
  }

  TEST_CASE("empty file and reserved tokens are rejected") {
    CHECK_THROWS_AS(parse_corpus(""), CorpusError);
    CHECK_THROWS_AS(parse_corpus("a <eos> b\n"), CorpusError);
  }

  TEST_CASE("fixed vocab maps unseen tokens to unk") {
    auto v = Vocab::from_syllables({"a", "b"});
    auto c = parse_corpus("a b c\n", v);
    CHECK(c.songs[0].ids[3] == special::unk);
    CHECK(c.vocab.size() == v.size());
  }

  TEST_CASE("character tokens") {
    LoadOptions o;
    o.char_tokens = true;
    auto c = parse_corpus("abca\n", std::nullopt, o);
    CHECK(c.songs[0].syllables() == 4);
    CHECK(c.vocab.syllable_count() == 3);
  }

  TEST_CASE("format round-trip normalises whitespace") {
    const std::string text = "a  b\tc\nd e\n";
    auto c = parse_corpus(text);
    CHECK(format_corpus(c) == "a b c\nd e\n");
    CHECK(format_corpus(parse_corpus(format_corpus(c))) == format_corpus(c));
  }

  TEST_CASE("file load and save") {
    const auto dir = std::filesystem::temp_directory_path() / "songlm_corpus_test";
    std::filesystem::create_directories(dir);
    write_text(dir / "c.txt", "a b\nb a a\n");
    auto c = load_corpus(dir / "c.txt");
    save_corpus(c, dir / "d.txt");
    CHECK(read_text(dir / "d.txt") == "a b\nb a a\n");
    CHECK_THROWS(load_corpus(dir / "missing.txt"));
  }

  TEST_CASE("split sizes, determinism and disjointness") {
    std::string text;
    for (int i = 0; i < 10; ++i) text += "s" + std::to_string(i) + "\n";
    auto c = parse_corpus(text);
    SplitSpec spec{0.8, 0.1, 0.1, 7};
    auto a = split(c, spec);
    CHECK(a.train.size() == 8);
    CHECK(a.eval.size() == 1);
    CHECK(a.test.size() == 1);
    auto b = split(c, spec);
    CHECK(format_corpus(a.train) == format_corpus(b.train));
    CHECK(format_corpus(a.test) == format_corpus(b.test));
    auto idx = split_indices(10, spec);
    std::vector<int> seen(10, 0);
    for (auto* part : {&idx.train, &idx.eval, &idx.test})
      for (auto i : *part) ++seen[i];
    for (int s : seen) CHECK(s == 1);
  }

  TEST_CASE("split preconditions") {
    auto two = parse_corpus("a\nb\n");
    CHECK_THROWS(split(two, {}));
    auto three = parse_corpus("a\nb\nc\n");
    CHECK_THROWS(split(three, {0.5, 0.5, 0.5, 0}));
    CHECK_THROWS(split(three, {1.0, 0.0, 0.0, 0}));
  }

  TEST_CASE("training vocabulary is closed") {
    auto c = parse_corpus("a b c\nd e\nf a\ng h\n");
    auto s = split(c, {0.5, 0.25, 0.25, 1});
    auto re = parse_corpus(format_corpus(s.train), c.vocab);
    for (const auto& song : re.songs)
      for (auto id : song.ids) CHECK(id != special::unk);
  }

  TEST_CASE("stats") {
    auto c = parse_corpus("a b c\na b c d e\n");
    auto st = corpus_stats(c);
    CHECK(st.song_count == 2);
    CHECK(st.token_count == 12);
    CHECK(st.token_frequency[c.vocab.id("a")] == 2);
    CHECK(st.length_histogram.at(5) == 1);
    CHECK(st.length_histogram.at(7) == 1);
    Corpus empty;
    auto e = corpus_stats(empty);
    CHECK(e.song_count == 0);
    CHECK(e.token_count == 0);
  }

  TEST_CASE("labels sidecar") {
    const auto dir = std::filesystem::temp_directory_path() / "songlm_corpus_test";
    std::filesystem::create_directories(dir);
    std::vector<int> labels{0, 1, 1, 0};
    save_labels(labels, dir / "labels.txt");
    CHECK(load_labels(dir / "labels.txt", 4) == labels);
    CHECK_THROWS(load_labels(dir / "labels.txt", 5));
    auto neg = parse_corpus("a b\n");
    auto pos = parse_corpus("b a\n", neg.vocab);
    auto lc = label_pair(neg, pos);
    CHECK(lc.labels == std::vector<int>{0, 1});
  }
}
