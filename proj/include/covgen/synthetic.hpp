#pragma once

#include <cstdint>
#include <string>

#include "covgen/corpus.hpp"

namespace covgen {

// Deterministic toy corpora.
//
// copy-task: the abstract is the article's prefix up to and including the
// first period; prefix positions become fresh OOV words at oov_rate, so
// reproducing the target requires pointing.
//
// template-summary: short match reports whose abstract follows the
// "X beat Y SCORE on DAY ." pattern; "beat" never occurs in articles, so it
// must be generated, while names (sometimes OOV) must be copied.
//
// repetition-trap: every article sentence shares one frame and differs only
// in its key word; the abstract lists the distinct key words, so a model
// that keeps re-attending the same sentence repeats itself.
struct SyntheticSpec {
  enum class Kind { kCopyTask, kTemplateSummary, kRepetitionTrap };
  Kind kind = Kind::kCopyTask;
  size_t count = 100;
  uint64_t seed = 1;
  size_t vocab_size = 50;  // size of the in-vocabulary content pool
  double oov_rate = 0.0;
};

SyntheticSpec::Kind synthetic_kind_from_name(const std::string& name);
std::string synthetic_kind_name(SyntheticSpec::Kind kind);

std::vector<Document> gen_synthetic(const SyntheticSpec& spec);

}  // namespace covgen
