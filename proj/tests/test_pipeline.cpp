#include <doctest.h>

#include "covgen/corpus.hpp"
#include "covgen/util.hpp"
#include "covgen/vocab.hpp"

using namespace covgen;

namespace {

Vocabulary vocab_from(const std::vector<std::string>& tokens, size_t cap) {
  VocabBuilder b;
  for (const auto& t : tokens) b.add(t);
  return b.build(cap);
}

}  // namespace

TEST_CASE("build_vocab keeps the most frequent words under the cap") {
  SUBCASE("all words fit") {
    const Vocabulary v = vocab_from({"a", "a", "b"}, 6);
    CHECK(v.size() == 6);
    CHECK(v.word(0) == "[PAD]");
    CHECK(v.word(1) == "[UNK]");
    CHECK(v.word(2) == "[START]");
    CHECK(v.word(3) == "[STOP]");
    CHECK(v.word(4) == "a");
    CHECK(v.word(5) == "b");
  }
  SUBCASE("frequency cut") {
    const Vocabulary v = vocab_from({"a", "a", "b", "c"}, 5);
    CHECK(v.size() == 5);
    CHECK(v.contains("a"));
    CHECK(!v.contains("b"));
    CHECK(!v.contains("c"));
    CHECK(v.id("b") == Vocabulary::kUnk);
  }
  SUBCASE("frequency ties go to the earlier-seen word") {
    const Vocabulary v = vocab_from({"b", "c", "b", "c"}, 5);
    CHECK(v.contains("b"));
    CHECK(!v.contains("c"));
  }
  SUBCASE("cap below the reserved set is rejected") {
    VocabBuilder b;
    b.add("a");
    CHECK_THROWS(b.build(4));
  }
  SUBCASE("reserved tokens are rejected as corpus words") {
    VocabBuilder b;
    CHECK_THROWS(b.add("[UNK]"));
  }
}

TEST_CASE("vocabulary save/load round trip") {
  const Vocabulary v = vocab_from({"a", "a", "a", "b", "b", "c"}, 8);
  const std::string path = "vocab_test.txt";
  v.save(path);
  const Vocabulary loaded = Vocabulary::load(path, 8);
  CHECK(loaded.size() == v.size());
  for (int i = 0; i < v.size(); ++i) CHECK(loaded.word(i) == v.word(i));
  const Vocabulary top = Vocabulary::load(path, 5);
  CHECK(top.size() == 5);
  CHECK(top.word(4) == "a");
}

TEST_CASE("encode_example assigns shared temporary ids to repeated OOVs") {
  const Vocabulary v = vocab_from({"a", "a", "b"}, 6);  // size 6
  const Example ex = encode_example({"x", "y", "x"}, {"a"}, v, 400, 100);
  CHECK(ex.article_ids == std::vector<int>{1, 1, 1});
  CHECK(ex.article_ext_ids == std::vector<int>{6, 7, 6});
  CHECK(ex.article_oovs == std::vector<std::string>{"x", "y"});
}

TEST_CASE("encode_example target ids point at article OOVs when possible") {
  const Vocabulary v = vocab_from({"a", "a", "b"}, 6);
  SUBCASE("abstract OOV present in article is pointable") {
    const Example ex = encode_example({"x", "a"}, {"x"}, v, 400, 100);
    CHECK(ex.target_ids == std::vector<int>{6, Vocabulary::kStop});
  }
  SUBCASE("abstract OOV absent from article becomes UNK") {
    const Example ex = encode_example({"x", "a"}, {"z"}, v, 400, 100);
    CHECK(ex.target_ids == std::vector<int>{Vocabulary::kUnk, Vocabulary::kStop});
  }
  SUBCASE("decoder input is START-prefixed and in-vocabulary") {
    const Example ex = encode_example({"x", "a"}, {"x", "a"}, v, 400, 100);
    CHECK(ex.dec_input_ids == std::vector<int>{Vocabulary::kStart, Vocabulary::kUnk, v.id("a")});
    CHECK(ex.target_ids == std::vector<int>{6, v.id("a"), Vocabulary::kStop});
  }
}

TEST_CASE("encode_example truncation") {
  const Vocabulary v = vocab_from({"a", "a", "b"}, 6);
  SUBCASE("empty source is an error") {
    CHECK_THROWS_WITH(encode_example({}, {"a"}, v, 400, 100), "empty source");
  }
  SUBCASE("article truncated before OOV discovery") {
    const Example ex = encode_example({"a", "b", "x"}, {"x"}, v, 2, 100);
    CHECK(ex.article_oovs.empty());
    CHECK(ex.target_ids == std::vector<int>{Vocabulary::kUnk, Vocabulary::kStop});
  }
  SUBCASE("decoder pair truncated to max_dec with equal lengths and no STOP") {
    const Example ex = encode_example({"a"}, {"a", "b", "a", "b"}, v, 400, 3);
    CHECK(ex.dec_input_ids.size() == 3);
    CHECK(ex.target_ids.size() == 3);
    CHECK(ex.dec_input_ids[0] == Vocabulary::kStart);
    CHECK(ex.target_ids.back() != Vocabulary::kStop);
  }
  SUBCASE("short abstracts keep the STOP") {
    const Example ex = encode_example({"a"}, {"a"}, v, 400, 100);
    CHECK(ex.dec_input_ids.size() == ex.target_ids.size());
    CHECK(ex.target_ids.back() == Vocabulary::kStop);
  }
}

TEST_CASE("extended-id round trip reproduces the truncated article") {
  Rng rng(5);
  const Vocabulary v = vocab_from({"a", "a", "a", "b", "b", "c"}, 7);
  const std::vector<std::string> lexicon = {"a", "b", "c", "q", "r", "s", "t"};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> article;
    const size_t len = 1 + rng.uniform_int(12);
    for (size_t i = 0; i < len; ++i) article.push_back(lexicon[rng.uniform_int(lexicon.size())]);
    const size_t max_enc = 1 + rng.uniform_int(14);
    const Example ex = encode_example(article, {"a"}, v, max_enc, 50);

    CHECK(ex.article_ids.size() == ex.article_ext_ids.size());
    for (size_t i = 0; i < ex.article_ext_ids.size(); ++i) {
      const int id = ex.article_ext_ids[i];
      std::string word;
      if (id < v.size()) {
        word = v.word(id);
        CHECK(ex.article_ids[i] == id);
      } else {
        word = ex.article_oovs[id - v.size()];
        CHECK(ex.article_ids[i] == Vocabulary::kUnk);
      }
      CHECK(word == article[i]);
    }
  }
}

TEST_CASE("target extended-id count equals pointable abstract occurrences") {
  Rng rng(9);
  const Vocabulary v = vocab_from({"a", "a", "a", "b", "b", "c"}, 7);
  const std::vector<std::string> lexicon = {"a", "b", "c", "q", "r", "s"};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> article, abstract;
    for (size_t i = 0; i < 1 + rng.uniform_int(8); ++i) {
      article.push_back(lexicon[rng.uniform_int(lexicon.size())]);
    }
    for (size_t i = 0; i < 1 + rng.uniform_int(6); ++i) {
      abstract.push_back(lexicon[rng.uniform_int(lexicon.size())]);
    }
    const Example ex = encode_example(article, abstract, v, 50, 50);
    size_t expected = 0;
    for (const auto& tok : abstract) {
      const bool oov = !v.contains(tok);
      const bool in_article =
          std::find(ex.article_tokens.begin(), ex.article_tokens.end(), tok) !=
          ex.article_tokens.end();
      if (oov && in_article) ++expected;
    }
    size_t got = 0;
    for (int id : ex.target_ids) {
      if (id >= v.size()) ++got;
    }
    CHECK(got == expected);
  }
}

TEST_CASE("truncation is prefix-preserving") {
  Rng rng(21);
  const Vocabulary v = vocab_from({"a", "a", "a", "b", "b", "c"}, 7);
  const std::vector<std::string> lexicon = {"a", "b", "q", "r", "s", "q"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::string> article;
    for (size_t i = 0; i < 3 + rng.uniform_int(10); ++i) {
      article.push_back(lexicon[rng.uniform_int(lexicon.size())]);
    }
    const Example full = encode_example(article, {"a"}, v, 400, 50);
    const size_t k = 1 + rng.uniform_int(article.size());
    const Example cut = encode_example(article, {"a"}, v, k, 50);
    CHECK(cut.article_ext_ids.size() == std::min(k, article.size()));
    for (size_t i = 0; i < cut.article_ext_ids.size(); ++i) {
      CHECK(cut.article_ext_ids[i] == full.article_ext_ids[i]);
    }
  }
}

TEST_CASE("make_batches pads, masks and is deterministic") {
  const Vocabulary v = vocab_from({"a", "a", "b"}, 6);
  std::vector<Example> exs;
  exs.push_back(encode_example({"a", "b", "a"}, {"a"}, v, 50, 50));
  exs.push_back(encode_example({"a", "b", "a", "b", "a"}, {"a", "b"}, v, 50, 50));
  exs.push_back(encode_example({"b"}, {"b", "a", "b"}, v, 50, 50));

  const auto batches = make_batches(exs, 2, 123);
  REQUIRE(batches.size() == 2);
  CHECK(batches[0].size() == 2);
  CHECK(batches[1].size() == 1);

  const auto again = make_batches(exs, 2, 123);
  CHECK(again[0].example_indices == batches[0].example_indices);
  CHECK(again[1].example_indices == batches[1].example_indices);

  // masks count exactly the real tokens, padding is PAD
  for (const auto& b : batches) {
    for (size_t r = 0; r < b.size(); ++r) {
      const Example& ex = exs[b.example_indices[r]];
      size_t mask_sum = 0;
      for (auto m : b.enc_mask[r]) mask_sum += m;
      CHECK(mask_sum == ex.article_ids.size());
      for (size_t i = ex.article_ids.size(); i < b.enc_ids[r].size(); ++i) {
        CHECK(b.enc_ids[r][i] == Vocabulary::kPad);
        CHECK(b.enc_mask[r][i] == 0);
      }
      CHECK(b.enc_ids[r].size() == b.enc_ids[0].size());
      CHECK(b.dec_input[r].size() == b.target[r].size());
    }
  }
}

TEST_CASE("corpus jsonl round trip") {
  std::vector<Document> docs(2);
  docs[0].article = {"the", "cat", "sat", "."};
  docs[0].abstract_sentences = {{"cat", "sat", "."}};
  docs[1].article = {"a", "b"};
  docs[1].abstract_sentences = {{"a", "."}, {"b", "."}};
  const std::string path = "corpus_test.jsonl";
  write_corpus_jsonl(path, docs);
  const auto loaded = read_corpus_jsonl(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].article == docs[0].article);
  CHECK(loaded[1].abstract_sentences == docs[1].abstract_sentences);
}
