#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "covgen/corpus.hpp"
#include "covgen/model.hpp"
#include "covgen/vocab.hpp"

namespace covgen {

struct DecodeConfig {
  int beam_size = 4;
  int max_steps = 120;
  int min_steps = 0;
  bool length_normalize = true;  // final ranking by logp / emitted tokens
};

struct StepRecord {
  double p_gen = -1.0;  // < 0 when the model has no pointer switch
  std::vector<double> attn;
};

struct Hypothesis {
  std::vector<int> tokens;  // extended-vocabulary ids, starts with START
  double logp = 0.0;
  Tensor cell, hidden, context, coverage;
  std::vector<StepRecord> records;  // one per emitted token

  size_t emitted() const { return tokens.empty() ? 0 : tokens.size() - 1; }
};

struct DecodeResult {
  std::vector<std::string> words;  // decoded tokens; START/STOP stripped
  std::vector<int> token_ids;      // extended ids of `words`
  Hypothesis best;                 // full per-step records; may end in STOP
  bool finished = false;           // best came from the finished pool
};

// Beam search over the extended vocabulary. Each live hypothesis fans out
// over its top 2*beam_size candidates; emitting STOP after at least
// min_steps real tokens moves a hypothesis to the finished pool; decoding
// stops once beam_size hypotheses are finished or max_steps is reached.
// Extended ids are mapped to UNK before being fed back.
DecodeResult beam_search(const ModelParams& params, const Vocabulary& vocab, const Example& ex,
                         const DecodeConfig& cfg);

nlohmann::json decode_record_json(const Document& doc, const DecodeResult& result);

// Per-step dump of the winning hypothesis: chosen token, attention vector,
// p_gen (pointer modes) and the final coverage vector (coverage mode).
nlohmann::json inspection_record_json(const Document& doc, const DecodeResult& result,
                                      const ModelParams& params, const Vocabulary& vocab,
                                      const Example& ex);

}  // namespace covgen
