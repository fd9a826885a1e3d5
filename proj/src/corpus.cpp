#include "covgen/corpus.hpp"

#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "covgen/util.hpp"

namespace covgen {

using nlohmann::json;

std::vector<std::string> Document::abstract_tokens() const {
  std::vector<std::string> out;
  for (const auto& sent : abstract_sentences) {
    out.insert(out.end(), sent.begin(), sent.end());
  }
  return out;
}

std::vector<Document> read_corpus_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus: " + path);
  std::vector<Document> docs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("article")) {
      throw std::runtime_error("malformed corpus line " + std::to_string(lineno) + " in " + path);
    }
    Document d;
    d.article = split_whitespace(j.at("article").get<std::string>());
    if (j.contains("abstract_sentences")) {
      for (const auto& s : j.at("abstract_sentences")) {
        d.abstract_sentences.push_back(split_whitespace(s.get<std::string>()));
      }
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

void write_corpus_jsonl(const std::string& path, const std::vector<Document>& docs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write corpus: " + path);
  for (const auto& d : docs) {
    json j;
    j["article"] = join(d.article);
    json sents = json::array();
    for (const auto& s : d.abstract_sentences) sents.push_back(join(s));
    j["abstract_sentences"] = std::move(sents);
    out << j.dump() << "\n";
  }
}

Example encode_example(const std::vector<std::string>& article_tokens,
                       const std::vector<std::string>& abstract_tokens, const Vocabulary& vocab,
                       size_t max_enc, size_t max_dec) {
  if (article_tokens.empty() || max_enc == 0) throw std::runtime_error("empty source");
  const int vocab_size = vocab.size();

  Example ex;
  const size_t enc_len = std::min(article_tokens.size(), max_enc);
  ex.article_tokens.assign(article_tokens.begin(), article_tokens.begin() + enc_len);

  std::unordered_map<std::string, int> oov_ids;
  for (const auto& tok : ex.article_tokens) {
    const int id = vocab.id(tok);
    ex.article_ids.push_back(id);
    if (id != Vocabulary::kUnk) {
      ex.article_ext_ids.push_back(id);
      continue;
    }
    auto [it, inserted] = oov_ids.try_emplace(tok, 0);
    if (inserted) {
      it->second = vocab_size + static_cast<int>(ex.article_oovs.size());
      ex.article_oovs.push_back(tok);
    }
    ex.article_ext_ids.push_back(it->second);
  }

  std::vector<int> abs_ids;
  std::vector<int> abs_ext_ids;
  for (const auto& tok : abstract_tokens) {
    const int id = vocab.id(tok);
    abs_ids.push_back(id);
    if (id != Vocabulary::kUnk) {
      abs_ext_ids.push_back(id);
    } else {
      auto it = oov_ids.find(tok);
      abs_ext_ids.push_back(it == oov_ids.end() ? Vocabulary::kUnk : it->second);
    }
  }

  // shift-by-one pair; when truncation hits, the STOP marker is dropped
  ex.dec_input_ids.push_back(Vocabulary::kStart);
  ex.dec_input_ids.insert(ex.dec_input_ids.end(), abs_ids.begin(), abs_ids.end());
  ex.target_ids = abs_ext_ids;
  ex.target_ids.push_back(Vocabulary::kStop);
  if (ex.dec_input_ids.size() > max_dec) {
    ex.dec_input_ids.resize(max_dec);
    ex.target_ids.resize(max_dec);
  }
  return ex;
}

Example encode_document(const Document& doc, const Vocabulary& vocab, size_t max_enc,
                        size_t max_dec) {
  return encode_example(doc.article, doc.abstract_tokens(), vocab, max_enc, max_dec);
}

std::vector<Batch> make_batches(const std::vector<Example>& examples, size_t batch_size,
                                uint64_t shuffle_seed) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  std::vector<size_t> order(examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(shuffle_seed);
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (size_t start = 0; start < order.size(); start += batch_size) {
    const size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    size_t enc_len = 0, dec_len = 0;
    for (size_t k = start; k < end; ++k) {
      const Example& ex = examples[order[k]];
      enc_len = std::max(enc_len, ex.article_ids.size());
      dec_len = std::max(dec_len, ex.dec_input_ids.size());
      b.max_oov = std::max(b.max_oov, ex.article_oovs.size());
      b.example_indices.push_back(order[k]);
    }
    for (size_t k = start; k < end; ++k) {
      const Example& ex = examples[order[k]];
      auto pad_ids = [](const std::vector<int>& ids, size_t len) {
        std::vector<int> out = ids;
        out.resize(len, Vocabulary::kPad);
        return out;
      };
      auto mask_of = [](size_t real, size_t len) {
        std::vector<uint8_t> m(len, 0);
        for (size_t i = 0; i < real; ++i) m[i] = 1;
        return m;
      };
      b.enc_ids.push_back(pad_ids(ex.article_ids, enc_len));
      b.enc_ext_ids.push_back(pad_ids(ex.article_ext_ids, enc_len));
      b.enc_mask.push_back(mask_of(ex.article_ids.size(), enc_len));
      b.dec_input.push_back(pad_ids(ex.dec_input_ids, dec_len));
      b.target.push_back(pad_ids(ex.target_ids, dec_len));
      b.dec_mask.push_back(mask_of(ex.dec_input_ids.size(), dec_len));
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace covgen
