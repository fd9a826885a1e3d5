#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covgen/vocab.hpp"

namespace covgen {

// One corpus entry: pre-tokenized, lowercased text. The abstract keeps its
// sentence boundaries for sentence-level metrics.
struct Document {
  std::vector<std::string> article;
  std::vector<std::vector<std::string>> abstract_sentences;

  std::vector<std::string> abstract_tokens() const;
};

// JSONL, one object per line: {"article": "...", "abstract_sentences": [...]}
std::vector<Document> read_corpus_jsonl(const std::string& path);
void write_corpus_jsonl(const std::string& path, const std::vector<Document>& docs);

// Per-example encoding. Out-of-vocabulary article words get temporary ids
// vocab_size + k in first-appearance order, shared across repeats; abstract
// OOVs map to those temporary ids when the word occurs in the article and to
// UNK otherwise. dec_input/target are the shift-by-one teacher-forcing pair.
struct Example {
  std::vector<int> article_ids;      // OOV -> UNK
  std::vector<int> article_ext_ids;  // OOV -> temporary extended id
  std::vector<std::string> article_oovs;
  std::vector<int> dec_input_ids;  // START-prefixed, in-vocabulary only
  std::vector<int> target_ids;     // STOP-suffixed, extended space
  std::vector<std::string> article_tokens;  // truncated article, for decode output
};

Example encode_example(const std::vector<std::string>& article_tokens,
                       const std::vector<std::string>& abstract_tokens, const Vocabulary& vocab,
                       size_t max_enc, size_t max_dec);

Example encode_document(const Document& doc, const Vocabulary& vocab, size_t max_enc,
                        size_t max_dec);

// Examples padded to the longest member of each batch; mask entries are 1
// exactly where a real token exists. max_oov is the largest per-example OOV
// count in the batch.
struct Batch {
  std::vector<std::vector<int>> enc_ids;
  std::vector<std::vector<int>> enc_ext_ids;
  std::vector<std::vector<uint8_t>> enc_mask;
  std::vector<std::vector<int>> dec_input;
  std::vector<std::vector<int>> target;
  std::vector<std::vector<uint8_t>> dec_mask;
  size_t max_oov = 0;
  std::vector<size_t> example_indices;

  size_t size() const { return enc_ids.size(); }
};

// Shuffles deterministically by seed, then chunks; the final partial batch
// is emitted.
std::vector<Batch> make_batches(const std::vector<Example>& examples, size_t batch_size,
                                uint64_t shuffle_seed);

}  // namespace covgen
