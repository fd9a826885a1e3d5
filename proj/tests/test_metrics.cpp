#include <doctest.h>

#include <map>

#include "covgen/metrics.hpp"
#include "covgen/util.hpp"

using namespace covgen;

namespace {
std::vector<std::string> toks(const std::string& s) { return split_whitespace(s); }
std::vector<std::vector<std::string>> sents(const std::vector<std::string>& ss) {
  std::vector<std::vector<std::string>> out;
  for (const auto& s : ss) out.push_back(toks(s));
  return out;
}
}  // namespace

TEST_CASE("rouge_n hand examples") {
  SUBCASE("identical texts") {
    const auto x = toks("the cat sat");
    for (size_t n = 1; n <= 3; ++n) {
      const RougeScore s = rouge_n(x, x, n);
      CHECK(s.f1 == doctest::Approx(1.0));
    }
  }
  SUBCASE("disjoint texts") {
    CHECK(rouge_n(toks("a b"), toks("c d"), 1).f1 == 0.0);
  }
  SUBCASE("partial overlap") {
    const auto cand = toks("the cat sat");
    const auto ref = toks("the cat ran");
    const RougeScore u = rouge_n(cand, ref, 1);
    CHECK(u.precision == doctest::Approx(2.0 / 3));
    CHECK(u.recall == doctest::Approx(2.0 / 3));
    CHECK(u.f1 == doctest::Approx(2.0 / 3));
    const RougeScore b = rouge_n(cand, ref, 2);
    CHECK(b.f1 == doctest::Approx(0.5));
  }
  SUBCASE("empty sides score zero") {
    CHECK(rouge_n({}, toks("a"), 1).f1 == 0.0);
    CHECK(rouge_n(toks("a"), {}, 1).f1 == 0.0);
  }
  SUBCASE("clipped counts") {
    // candidate repeats "a" three times, reference has it once
    const RougeScore s = rouge_n(toks("a a a"), toks("a b"), 1);
    CHECK(s.precision == doctest::Approx(1.0 / 3));
    CHECK(s.recall == doctest::Approx(0.5));
  }
}

TEST_CASE("rouge_n properties") {
  Rng rng(33);
  const std::vector<std::string> lexicon = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> x, y;
    for (size_t i = 0; i < 1 + rng.uniform_int(8); ++i) x.push_back(lexicon[rng.uniform_int(5)]);
    for (size_t i = 0; i < 1 + rng.uniform_int(8); ++i) y.push_back(lexicon[rng.uniform_int(5)]);
    const size_t n = 1 + rng.uniform_int(3);
    if (n <= x.size()) CHECK(rouge_n(x, x, n).f1 == doctest::Approx(1.0));
    const RougeScore ab = rouge_n(x, y, n);
    const RougeScore ba = rouge_n(y, x, n);
    CHECK(ab.precision == doctest::Approx(ba.recall));
    CHECK(ab.recall == doctest::Approx(ba.precision));
    CHECK(ab.f1 == doctest::Approx(ba.f1));
  }
}

TEST_CASE("rouge_l hand examples") {
  SUBCASE("identical texts") {
    const auto s = sents({"the cat sat .", "it purred ."});
    CHECK(rouge_l(s, s).f1 == doctest::Approx(1.0));
  }
  SUBCASE("subsequence match") {
    const RougeScore s = rouge_l(sents({"a b c d"}), sents({"a c e"}));
    CHECK(s.recall == doctest::Approx(2.0 / 3));
    CHECK(s.precision == doctest::Approx(0.5));
    CHECK(s.f1 == doctest::Approx(4.0 / 7));
  }
  SUBCASE("empty candidate") {
    const RougeScore s = rouge_l({}, sents({"a b"}));
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
  }
  SUBCASE("plain-LCS flag agrees on single sentences") {
    const auto c = sents({"a b c d"});
    const auto r = sents({"a c e"});
    CHECK(rouge_l(c, r, false).f1 == doctest::Approx(rouge_l(c, r, true).f1));
  }
}

TEST_CASE("rouge_l recall is 1 when the reference is a subsequence of the candidate") {
  Rng rng(44);
  const std::vector<std::string> lexicon = {"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> cand;
    for (size_t i = 0; i < 4 + rng.uniform_int(8); ++i) {
      cand.push_back(lexicon[rng.uniform_int(lexicon.size())]);
    }
    // sample a subsequence, then split it into 1-2 reference sentences
    std::vector<std::string> sub;
    for (const auto& t : cand) {
      if (rng.uniform() < 0.5) sub.push_back(t);
    }
    if (sub.empty()) sub.push_back(cand[0]);
    std::vector<std::vector<std::string>> ref;
    const size_t cut = sub.size() > 1 ? 1 + rng.uniform_int(sub.size() - 1) : sub.size();
    ref.emplace_back(sub.begin(), sub.begin() + cut);
    if (cut < sub.size()) ref.emplace_back(sub.begin() + cut, sub.end());
    CHECK(rouge_l({cand}, ref).recall == doctest::Approx(1.0));
  }
}

TEST_CASE("lead3 takes up to three sentences") {
  const auto five = sents({"s1 .", "s2 .", "s3 .", "s4 .", "s5 ."});
  CHECK(lead3(five) == toks("s1 . s2 . s3 ."));
  const auto two = sents({"s1 .", "s2 ."});
  CHECK(lead3(two) == toks("s1 . s2 ."));
  CHECK(lead3({}).empty());
}

TEST_CASE("repetition_stats hand examples") {
  SUBCASE("alternating pair") {
    const RepetitionReport r = repetition_stats({toks("a b a b")});
    CHECK(r.dup_ngram[0] == doctest::Approx(0.5));         // a,b repeat once each
    CHECK(r.dup_ngram[1] == doctest::Approx(1.0 / 3));     // "a b" repeats
    CHECK(r.dup_sentence == 0.0);
  }
  SUBCASE("all distinct") {
    const RepetitionReport r = repetition_stats({toks("a b c d")});
    for (double v : r.dup_ngram) CHECK(v == 0.0);
  }
  SUBCASE("two identical sentences") {
    const RepetitionReport r = repetition_stats(sents({"x y .", "x y ."}));
    CHECK(r.dup_sentence == doctest::Approx(0.5));
  }
}

TEST_CASE("novelty_stats hand examples") {
  SUBCASE("verbatim copy") {
    const NoveltyReport r = novelty_stats({toks("b c d")}, toks("a b c d e"));
    for (double v : r.novel_ngram) CHECK(v == 0.0);
    CHECK(r.copied_sentence == doctest::Approx(1.0));
  }
  SUBCASE("fully novel") {
    const NoveltyReport r = novelty_stats({toks("x y")}, toks("a b c"));
    CHECK(r.novel_ngram[0] == doctest::Approx(1.0));
    CHECK(r.novel_ngram[1] == doctest::Approx(1.0));
    CHECK(r.copied_sentence == 0.0);
  }
  SUBCASE("reversed order") {
    const NoveltyReport r = novelty_stats({toks("y beat x")}, toks("x beat y"));
    CHECK(r.novel_ngram[0] == 0.0);
    CHECK(r.novel_ngram[1] == doctest::Approx(1.0));
  }
}

TEST_CASE("repetition and novelty are invariant under token relabeling") {
  Rng rng(55);
  const std::vector<std::string> lexicon = {"a", "b", "c", "d", "e"};
  const std::map<std::string, std::string> relabel = {
      {"a", "z9"}, {"b", "q7"}, {"c", "m3"}, {"d", "k1"}, {"e", "w5"}};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> art, cand;
    for (size_t i = 0; i < 3 + rng.uniform_int(10); ++i) {
      art.push_back(lexicon[rng.uniform_int(5)]);
    }
    for (size_t i = 0; i < 2 + rng.uniform_int(8); ++i) {
      cand.push_back(lexicon[rng.uniform_int(5)]);
    }
    auto mapped = [&](const std::vector<std::string>& xs) {
      std::vector<std::string> out;
      for (const auto& x : xs) out.push_back(relabel.at(x));
      return out;
    };
    const RepetitionReport r1 = repetition_stats({cand});
    const RepetitionReport r2 = repetition_stats({mapped(cand)});
    const NoveltyReport n1 = novelty_stats({cand}, art);
    const NoveltyReport n2 = novelty_stats({mapped(cand)}, mapped(art));
    for (size_t k = 0; k < 4; ++k) {
      CHECK(r1.dup_ngram[k] == doctest::Approx(r2.dup_ngram[k]));
      CHECK(n1.novel_ngram[k] == doctest::Approx(n2.novel_ngram[k]));
    }
  }
}

TEST_CASE("repeating a sentence doubles its duplicate fractions") {
  const auto s = toks("u v w x y");
  const RepetitionReport r = repetition_stats({s, s});
  CHECK(r.dup_sentence == doctest::Approx(0.5));
  for (size_t n = 1; n <= 4; ++n) {
    CHECK(r.dup_ngram[n - 1] >= 0.5 - 1e-12);
  }
}

TEST_CASE("pgen_stats hand examples") {
  SUBCASE("constant value") {
    DecodedSteps d;
    d.tokens = {"a", "b", "c"};
    d.p_gens = {0.5, 0.5, 0.5};
    const PgenStats s = pgen_stats({d});
    CHECK(s.mean == doctest::Approx(0.5));
    CHECK(s.min == doctest::Approx(0.5));
    CHECK(s.max == doctest::Approx(0.5));
  }
  SUBCASE("class split after a period") {
    DecodedSteps d;
    d.tokens = {".", "b"};
    d.p_gens = {0.1, 0.9};
    const PgenStats s = pgen_stats({d});
    CHECK(s.sentence_initial_mean == doctest::Approx(0.9));
    CHECK(s.other_mean == doctest::Approx(0.1));
    CHECK(s.sentence_initial_steps == 1);
  }
  SUBCASE("mixed dump matches brute force") {
    DecodedSteps d;
    d.tokens = {"a", ".", "b", "c"};
    d.p_gens = {0.2, 0.4, 0.6, 0.8};
    const PgenStats s = pgen_stats({d});
    CHECK(s.mean == doctest::Approx((0.2 + 0.4 + 0.6 + 0.8) / 4));
    CHECK(s.min == doctest::Approx(0.2));
    CHECK(s.max == doctest::Approx(0.8));
    CHECK(s.sentence_initial_mean == doctest::Approx(0.6));
    CHECK(s.other_mean == doctest::Approx((0.2 + 0.4 + 0.8) / 3));
  }
  SUBCASE("dumps without p_gen are an error") {
    DecodedSteps d;
    d.tokens = {"a"};
    CHECK_THROWS_WITH(pgen_stats({d}), "no p_gen recorded");
  }
}
