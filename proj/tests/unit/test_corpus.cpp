#include "doctest.h"
#include "rtm/corpus.hpp"
#include "rtm/error.hpp"
#include "rtm/random.hpp"
#include "support.hpp"

using namespace rtm;
using Tokens = std::vector<std::string>;

TEST_CASE("tokenize splits punctuation and lowercases") {
  const auto t = tokenize("Red apple!");
  CHECK(t.tokens == Tokens{"red", "apple", "!"});
  CHECK(t.charCount == 10);
}

TEST_CASE("tokenize empty input") {
  const auto t = tokenize("");
  CHECK(t.tokens.empty());
  CHECK(t.charCount == 0);
}

TEST_CASE("tokenize keeps tweet markers attached") {
  const auto t = tokenize("@sam #JOY :)");
  CHECK(t.tokens == Tokens{"@sam", "#joy", ":", ")"});
  CHECK(t.charCount == 12);
}

TEST_CASE("tokenize handles UTF-8 text") {
  const auto t = tokenize("ÉTÉ café");
  CHECK(t.tokens == Tokens{"été", "café"});
  CHECK(t.charCount == 8);
  CHECK(tokenize("A", {false}).tokens == Tokens{"A"});
  CHECK(tokenize("# x").tokens == Tokens{"#", "x"});
}

TEST_CASE("tokenize is idempotent on its joined output") {
  Rng rng(3);
  const std::vector<std::string> pieces{"Hi", "there", ",", "#Tag", "@who", "!!", "Ünïcode", "x.y", " ", "\t"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    for (int i = 0; i < 8; ++i) text += pieces[rng.below(pieces.size())] + (rng.below(2) ? " " : "");
    const auto once = tokenize(text);
    const auto twice = tokenize(once.joined());
    CHECK(twice.tokens == once.tokens);
    for (const auto& tok : once.tokens) {
      CHECK_FALSE(tok.empty());
      CHECK(tok.find(' ') == std::string::npos);
    }
  }
}

TEST_CASE("extractNGrams windows") {
  TokenSeq aba{{"a", "b", "a"}, 5};
  CHECK(extractNGrams(aba, 1) == Tokens{"a", "b", "a"});
  CHECK(countNGrams(aba, 1) == std::map<NGram, int>{{"a", 2}, {"b", 1}});
  CHECK(extractNGrams(TokenSeq{{"a", "b"}, 3}, 3).empty());
  CHECK(countNGrams(TokenSeq{{"a", "b", "a", "b"}, 7}, 2) == std::map<NGram, int>{{"a b", 2}, {"b a", 1}});
  CHECK_THROWS_AS(extractNGrams(aba, 0), Error);
  CHECK(ngramOrder("a b c") == 3);
}

TEST_CASE("n-gram counts add up over orders") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    TokenSeq s;
    const auto len = rng.below(9);
    for (std::size_t i = 0; i < len; ++i) s.tokens.push_back(std::string(1, static_cast<char>('a' + rng.below(3))));
    std::size_t total = 0, expected = 0;
    for (int n = 1; n <= 3; ++n) {
      total += extractNGrams(s, n).size();
      expected += len >= static_cast<std::size_t>(n) ? len - n + 1 : 0;
    }
    CHECK(total == expected);
  }
}

TEST_CASE("intensity dataset loading") {
  rtmtest::TempDir dir("corpus");
  const auto p = dir.file("i.tsv");
  rtmtest::writeText(p, "# note\nid\ttext\taffect\tscore\n1\tGood day\tjoy\t0.0\n2\tOk\tjoy\t0.5\n3\tBad\tjoy\t1.0\n");
  const auto d = loadIntensityDataset(p);
  REQUIRE(d.size() == 3);
  CHECK(d[0].id == "1");
  CHECK(*d[0].gold == 0.0);
  CHECK(*d[1].gold == 0.5);
  CHECK(*d[2].gold == 1.0);
  CHECK(d[0].source.tokens == Tokens{"good", "day"});

  rtmtest::writeText(p, formatIntensityDataset(d));
  CHECK(loadIntensityDataset(p) == d);

  rtmtest::writeText(p, "id\ttext\taffect\tscore\n1\tx\tjoy\tNONE\n2\ty\tjoy\n");
  const auto unlabeled = loadIntensityDataset(p);
  CHECK_FALSE(unlabeled[0].gold.has_value());
  CHECK_FALSE(unlabeled[1].gold.has_value());

  rtmtest::writeText(p, "id\ttext\taffect\tscore\n1\tx\tjoy\t1.5\n");
  CHECK_THROWS_AS(loadIntensityDataset(p), ParseError);
  rtmtest::writeText(p, "id\ttext\taffect\tscore\n1\tx\n");
  try {
    loadIntensityDataset(p);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("triple dataset loading") {
  rtmtest::TempDir dir("triples");
  const auto p = dir.file("t.tsv");
  rtmtest::writeText(p, "id\tword1\tword2\tattribute\tlabel\na\tapple\tbanana\tred\t1\nb\tcar\tbus\twheels\tNONE\n");
  const auto d = loadTripleDataset(p);
  REQUIRE(d.size() == 2);
  CHECK(*d[0].gold == 1);
  CHECK_FALSE(d[1].gold.has_value());
  rtmtest::writeText(p, formatTripleDataset(d));
  CHECK(loadTripleDataset(p) == d);

  rtmtest::writeText(p, "a\tapple\tbanana\tred\t1\nb\tcar\tbus\twheels\t2\n");
  try {
    loadTripleDataset(p);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  rtmtest::writeText(p, "a\tapple\t\tred\t1\n");
  CHECK_THROWS_AS(loadTripleDataset(p), ParseError);
}

TEST_CASE("lexicon loading and targets") {
  rtmtest::TempDir dir("lex");
  const auto p = dir.file("lex.txt");
  rtmtest::writeText(p, "#joy\nglad\nmerry\nover the moon\nglad\n\n#sadness\nblue\n");
  const auto lex = loadLexicon(p);
  CHECK(lex.emotions == Tokens{"joy", "sadness"});
  CHECK(lex.entries.at("joy").size() == 3);
  CHECK(lex.entries.at("joy")[2].tokens == Tokens{"over", "the", "moon"});

  rtmtest::writeText(p, formatLexicon(lex));
  const auto again = loadLexicon(p);
  CHECK(again.emotions == lex.emotions);
  CHECK(again.entries == lex.entries);

  const auto joy = lexiconToTarget(lex, {"joy"});
  CHECK(joy.tokens == Tokens{"glad", "merry", "over", "the", "moon"});
  CHECK(joy.charCount == std::string("glad merry over the moon").size());
  CHECK(lexiconToTarget(lex, {"joy", "sadness"}).tokens.back() == "blue");
  CHECK(lexiconToTarget(lex, {"sadness", "joy"}).tokens.front() == "blue");
  CHECK_THROWS_AS(lexiconToTarget(lex, {}), Error);
  CHECK_THROWS_AS(lexiconToTarget(lex, {"anger"}), Error);

  rtmtest::writeText(p, "glad\n");
  CHECK_THROWS_AS(loadLexicon(p), ParseError);
  rtmtest::writeText(p, "#joy\n#sad\nblue\n");
  CHECK_THROWS_AS(loadLexicon(p), Error);
}

TEST_CASE("corpus loading skips empty lines") {
  rtmtest::TempDir dir("corpusfile");
  const auto p = dir.file("c.txt");
  rtmtest::writeText(p, "one two\n\n   \nthree\n");
  const auto c = loadCorpus(p);
  REQUIRE(c.sentences.size() == 2);
  CHECK(c.sentences[1].tokens == Tokens{"three"});
  CHECK(c.sourcePath == p);
}
