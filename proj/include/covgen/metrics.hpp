#pragma once

#include <array>
#include <string>
#include <vector>

namespace covgen {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

RougeScore make_rouge(double precision, double recall);

// Clipped n-gram overlap; empty candidate or reference scores zero.
RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, size_t n);

// Summary-level LCS: every reference sentence is matched against the whole
// candidate token sequence and the matched counts accumulate over sentences.
// With union_lcs=false both sides are treated as single sequences
// (plain LCS), kept as a cross-check.
RougeScore rouge_l(const std::vector<std::vector<std::string>>& candidate_sentences,
                   const std::vector<std::vector<std::string>>& reference_sentences,
                   bool union_lcs = true);

size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// First three sentences of the article (fewer if the article is shorter).
std::vector<std::string> lead3(const std::vector<std::vector<std::string>>& article_sentences);

// Fractions of n-gram (n=1..4) and sentence occurrences that repeat an
// earlier identical occurrence within the same text. N-grams run over the
// flattened token sequence.
struct RepetitionReport {
  std::array<double, 4> dup_ngram = {0, 0, 0, 0};
  double dup_sentence = 0.0;
};

RepetitionReport repetition_stats(const std::vector<std::vector<std::string>>& sentences);

// Fractions of candidate n-grams that never occur contiguously in the
// article, and of candidate sentences not copied verbatim from it.
struct NoveltyReport {
  std::array<double, 4> novel_ngram = {0, 0, 0, 0};
  double copied_sentence = 0.0;
};

NoveltyReport novelty_stats(const std::vector<std::vector<std::string>>& candidate_sentences,
                            const std::vector<std::string>& article_tokens);

// One decoded summary's per-step trace, as recorded by the inspection dump.
struct DecodedSteps {
  std::vector<std::string> tokens;
  std::vector<double> p_gens;  // empty when the dump has no pointer switch
};

struct PgenStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double sentence_initial_mean = 0.0;  // steps immediately following a "."
  double other_mean = 0.0;
  size_t steps = 0;
  size_t sentence_initial_steps = 0;
};

// Aggregates p_gen over all decoded steps; errors with "no p_gen recorded"
// when the dumps carry none.
PgenStats pgen_stats(const std::vector<DecodedSteps>& dumps);

}  // namespace covgen
