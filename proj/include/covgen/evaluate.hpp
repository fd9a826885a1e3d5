#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "covgen/metrics.hpp"

namespace covgen {

struct EvalItem {
  std::vector<std::string> article_tokens;
  std::vector<std::vector<std::string>> reference_sentences;
  std::vector<std::string> decoded_tokens;
};

struct ExampleEval {
  RougeScore r1, r2, rl;
  RougeScore lead3_r1, lead3_r2, lead3_rl;
  RepetitionReport rep_decoded, rep_reference;
  NoveltyReport nov_decoded, nov_reference;
};

struct CorpusEval {
  std::vector<ExampleEval> examples;
  double r1_f1 = 0, r2_f1 = 0, rl_f1 = 0;
  double lead3_r1_f1 = 0, lead3_r2_f1 = 0, lead3_rl_f1 = 0;
  std::array<double, 4> dup_model{}, dup_ref{}, novel_model{}, novel_ref{};
  double dup_sent_model = 0, dup_sent_ref = 0;
  double copy_sent_model = 0, copy_sent_ref = 0;
};

// Scores every example (in parallel, deterministic aggregation) and averages
// per-example values arithmetically. Decoded and article sentence boundaries
// come from "." tokens; reference boundaries are the corpus's own.
CorpusEval evaluate_corpus(const std::vector<EvalItem>& items);

nlohmann::json corpus_eval_json(const CorpusEval& eval);

// Plot-ready CSV: one row per n-gram order plus a sentence row, with
// duplicate and novel percentages for the model and the reference.
std::string fig_csv(const CorpusEval& eval);

}  // namespace covgen
