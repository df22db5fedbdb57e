#include <random>
#include <sstream>

#include "doctest.h"
#include "dlmparse/corpus.hpp"
#include "dlmparse/error.hpp"
#include "support/oracles.hpp"

using namespace dlmparse;
using dlmparse::testing::make_sentence;

namespace {

Treebank parse(const std::string& text) {
  std::istringstream in(text);
  return read_conll(in);
}

std::string write(const Treebank& tb) {
  std::ostringstream out;
  write_conll(out, tb);
  return out.str();
}

}  // namespace

TEST_CASE("empty stream reads as an empty treebank") {
  CHECK(parse("").size() == 0);
  CHECK(parse("\n\n").size() == 0);
}

TEST_CASE("two-token sentence round-trips byte for byte") {
  const std::string text =
      "1\ta\t_\tD\tD\t_\t2\tdet\t_\t_\n"
      "2\tb\t_\tN\tN\t_\t0\troot\t_\t_\n"
      "\n";
  Treebank tb = parse(text);
  REQUIRE(tb.size() == 1);
  const Sentence& s = tb.sentences[0];
  CHECK(s.at(1).head == 2);
  CHECK(s.at(2).head == 0);
  CHECK(s.at(1).deprel == "det");
  CHECK(s.at(2).pos == "N");
  CHECK(write(tb) == text);

  Treebank hand;
  Sentence h;
  h.tokens.push_back({1, "a", "_", "D", "D", 2, "det"});
  h.tokens.push_back({2, "b", "_", "N", "N", 0, "root"});
  hand.sentences.push_back(h);
  CHECK(write(hand) == text);
}

TEST_CASE("FEATS and projective columns are dropped and written as underscore") {
  Treebank tb = parse("1\ta\tA\tD\tDT\tx=1\t0\troot\t3\tfoo\n");
  CHECK(write(tb) == "1\ta\tA\tD\tDT\t_\t0\troot\t_\t_\n\n");
}

TEST_CASE("reader tolerates a missing trailing blank line, CRLF and repeated blank lines") {
  Treebank tb = parse("1\ta\t_\tD\tD\t_\t0\troot\t_\t_\r\n\n\n\n1\tb\t_\tN\tN\t_\t0\troot\t_\t_");
  REQUIRE(tb.size() == 2);
  CHECK(tb.sentences[1].at(1).form == "b");
}

TEST_CASE("malformed lines are parse errors carrying the line number") {
  SUBCASE("non-numeric head") {
    try {
      parse("1\ta\t_\tD\tD\t_\t0\troot\t_\t_\n2\tb\t_\tN\tN\t_\tx\tdep\t_\t_\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("non-numeric id") {
    CHECK_THROWS_AS(parse("a\ta\t_\tD\tD\t_\t0\troot\t_\t_\n"), ParseError);
  }
  SUBCASE("too few columns") {
    try {
      parse("\n\n1\ta\t_\tD\tD\t_\t0\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
}

TEST_CASE("invalid trees are validation errors carrying the sentence index") {
  const std::string ok = "1\ta\t_\tD\tD\t_\t0\troot\t_\t_\n\n";
  SUBCASE("cycle") {
    try {
      parse(ok + "1\ta\t_\tD\tD\t_\t2\tx\t_\t_\n2\tb\t_\tD\tD\t_\t1\tx\t_\t_\n");
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.sentence() == 1);
    }
  }
  SUBCASE("out-of-range head") {
    CHECK_THROWS_AS(parse("1\ta\t_\tD\tD\t_\t5\troot\t_\t_\n"), ValidationError);
  }
  SUBCASE("id gap") {
    CHECK_THROWS_AS(parse("1\ta\t_\tD\tD\t_\t0\troot\t_\t_\n3\tb\t_\tD\tD\t_\t1\tx\t_\t_\n"),
                    ValidationError);
  }
  SUBCASE("self loop") {
    CHECK_THROWS_AS(parse("1\ta\t_\tD\tD\t_\t1\troot\t_\t_\n"), ValidationError);
  }
}

TEST_CASE("multi-rooted and non-projective trees are accepted") {
  CHECK(tree_violation(make_sentence({0, 0})).empty());
  CHECK(tree_violation(make_sentence({3, 0, 2})).empty());
  CHECK(root_count(make_sentence({0, 0, 1})) == 2);
}

TEST_CASE("writer") {
  CHECK(write(Treebank{}).empty());
  Treebank tb;
  tb.sentences.push_back(make_sentence({0}, {"root"}, {"a\tb"}));
  CHECK_THROWS_AS(write(tb), SerializationError);
  tb.sentences[0].tokens[0].form = "ok";
  tb.sentences[0].tokens[0].deprel = "";
  CHECK_THROWS_AS(write(tb), SerializationError);
}

TEST_CASE("write then read is the identity on random treebanks") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> forms = {"the", "Ünïcode", "日本", "a_b", "x.y", "\"q\"", "-"};
  for (int round = 0; round < 50; ++round) {
    Treebank tb;
    const int sentences = static_cast<int>(rng() % 6);
    for (int i = 0; i < sentences; ++i) {
      const int n = 1 + static_cast<int>(rng() % 12);
      Sentence s = dlmparse::testing::random_sentence(rng, n, 30, 5, {"a", "b", "root"});
      for (auto& t : s.tokens) {
        t.form = forms[rng() % forms.size()] + std::to_string(rng() % 3);
        t.lemma = (rng() % 2) ? "_" : t.form;
      }
      tb.sentences.push_back(s);
    }
    const std::string text = write(tb);
    const Treebank back = parse(text);
    CHECK(back == tb);
    CHECK(write(back) == text);
  }
}

TEST_CASE("is_projective examples") {
  CHECK(is_projective(make_sentence({2, 3, 0})));
  CHECK_FALSE(is_projective(make_sentence({3, 0, 2})));
  CHECK(is_projective(make_sentence({0})));
  CHECK(is_projective(make_sentence({0, 0, 0})));
  CHECK_FALSE(is_projective(make_sentence({3, 4, 0, 3})));
}

TEST_CASE("is_projective agrees with a pairwise crossing check on random trees") {
  std::mt19937_64 rng(11);
  std::size_t nonprojective = 0;
  for (int round = 0; round < 20000; ++round) {
    const int n = 1 + static_cast<int>(rng() % 10);
    const auto heads = dlmparse::testing::random_heads(rng, n);
    const bool expected = dlmparse::testing::projective_by_pairs(heads);
    nonprojective += expected ? 0 : 1;
    REQUIRE(is_projective(make_sentence(heads)) == expected);
  }
  CHECK(nonprojective > 0);
}

TEST_CASE("unparsed input: HEAD '_' reads as 0 only when allowed") {
  const std::string text = "1\tthe\t_\tDT\tDT\t_\t_\t_\n2\tdog\t_\tNN\tNN\t_\t_\t_\n\n";
  std::istringstream strict(text);
  CHECK_THROWS_AS(ConllReader(strict).next(), ParseError);
  std::istringstream loose(text);
  ConllReader reader(loose, true);
  auto s = reader.next();
  REQUIRE(s);
  CHECK(s->tokens[0].head == 0);
  CHECK(s->tokens[1].head == 0);
  CHECK_FALSE(reader.next());
}

TEST_CASE("errors name the source file") {
  std::istringstream in("1\tx\t_\n");
  try {
    read_conll(in, "corpus.conll");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(std::string(e.what()).rfind("corpus.conll:1: ", 0) == 0);
  }
}
