#include "covgen/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace covgen {

namespace {

using Ngram = std::vector<std::string>;

std::vector<Ngram> ngrams(const std::vector<std::string>& tokens, size_t n) {
  std::vector<Ngram> out;
  if (n == 0 || tokens.size() < n) return out;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    out.emplace_back(tokens.begin() + i, tokens.begin() + i + n);
  }
  return out;
}

std::vector<std::string> flatten(const std::vector<std::vector<std::string>>& sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

bool contains_contiguous(const std::vector<std::string>& haystack,
                         const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    if (std::equal(needle.begin(), needle.end(), haystack.begin() + i)) return true;
  }
  return false;
}

}  // namespace

RougeScore make_rouge(double precision, double recall) {
  RougeScore s;
  s.precision = precision;
  s.recall = recall;
  s.f1 = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  return s;
}

RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, size_t n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto cand = ngrams(candidate, n);
  const auto ref = ngrams(reference, n);
  if (cand.empty() || ref.empty()) return RougeScore{};
  std::map<Ngram, long long> ref_counts;
  for (const auto& g : ref) ref_counts[g] += 1;
  long long overlap = 0;
  for (const auto& g : cand) {
    auto it = ref_counts.find(g);
    if (it != ref_counts.end() && it->second > 0) {
      it->second -= 1;
      ++overlap;
    }
  }
  return make_rouge(static_cast<double>(overlap) / static_cast<double>(cand.size()),
                    static_cast<double>(overlap) / static_cast<double>(ref.size()));
}

size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (size_t i = 1; i <= a.size(); ++i) {
    for (size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const std::vector<std::vector<std::string>>& candidate_sentences,
                   const std::vector<std::vector<std::string>>& reference_sentences,
                   bool union_lcs) {
  const auto cand = flatten(candidate_sentences);
  const auto ref = flatten(reference_sentences);
  if (cand.empty() || ref.empty()) return RougeScore{};
  size_t matched = 0;
  if (union_lcs) {
    for (const auto& sent : reference_sentences) matched += lcs_length(sent, cand);
  } else {
    matched = lcs_length(ref, cand);
  }
  return make_rouge(clamp01(static_cast<double>(matched) / static_cast<double>(cand.size())),
                    clamp01(static_cast<double>(matched) / static_cast<double>(ref.size())));
}

std::vector<std::string> lead3(const std::vector<std::vector<std::string>>& article_sentences) {
  std::vector<std::string> out;
  const size_t take = std::min<size_t>(3, article_sentences.size());
  for (size_t i = 0; i < take; ++i) {
    out.insert(out.end(), article_sentences[i].begin(), article_sentences[i].end());
  }
  return out;
}

RepetitionReport repetition_stats(const std::vector<std::vector<std::string>>& sentences) {
  RepetitionReport report;
  // n-grams stay within sentence boundaries; "earlier" spans the whole text
  for (size_t n = 1; n <= 4; ++n) {
    std::map<Ngram, long long> seen;
    long long dups = 0, total = 0;
    for (const auto& sent : sentences) {
      for (const auto& g : ngrams(sent, n)) {
        ++total;
        if (seen[g]++ > 0) ++dups;
      }
    }
    if (total > 0) {
      report.dup_ngram[n - 1] = static_cast<double>(dups) / static_cast<double>(total);
    }
  }
  if (!sentences.empty()) {
    std::map<std::vector<std::string>, long long> seen;
    long long dups = 0;
    for (const auto& s : sentences) {
      if (seen[s]++ > 0) ++dups;
    }
    report.dup_sentence = static_cast<double>(dups) / static_cast<double>(sentences.size());
  }
  return report;
}

NoveltyReport novelty_stats(const std::vector<std::vector<std::string>>& candidate_sentences,
                            const std::vector<std::string>& article_tokens) {
  NoveltyReport report;
  for (size_t n = 1; n <= 4; ++n) {
    std::map<Ngram, bool> in_article;  // memoized containment per distinct n-gram
    long long novel = 0, total = 0;
    for (const auto& sent : candidate_sentences) {
      for (const auto& g : ngrams(sent, n)) {
        ++total;
        auto [it, inserted] = in_article.try_emplace(g, false);
        if (inserted) it->second = contains_contiguous(article_tokens, g);
        if (!it->second) ++novel;
      }
    }
    if (total > 0) {
      report.novel_ngram[n - 1] = static_cast<double>(novel) / static_cast<double>(total);
    }
  }
  if (!candidate_sentences.empty()) {
    long long copied = 0;
    for (const auto& s : candidate_sentences) {
      if (contains_contiguous(article_tokens, s)) ++copied;
    }
    report.copied_sentence =
        static_cast<double>(copied) / static_cast<double>(candidate_sentences.size());
  }
  return report;
}

PgenStats pgen_stats(const std::vector<DecodedSteps>& dumps) {
  PgenStats stats;
  stats.min = std::numeric_limits<double>::infinity();
  stats.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0, sum_initial = 0.0, sum_other = 0.0;
  size_t n_other = 0;
  for (const auto& dump : dumps) {
    if (dump.p_gens.empty()) continue;
    if (dump.p_gens.size() != dump.tokens.size()) {
      throw std::invalid_argument("pgen_stats: token/p_gen length mismatch");
    }
    for (size_t i = 0; i < dump.p_gens.size(); ++i) {
      const double p = dump.p_gens[i];
      sum += p;
      stats.min = std::min(stats.min, p);
      stats.max = std::max(stats.max, p);
      ++stats.steps;
      const bool sentence_initial = i > 0 && dump.tokens[i - 1] == ".";
      if (sentence_initial) {
        sum_initial += p;
        ++stats.sentence_initial_steps;
      } else {
        sum_other += p;
        ++n_other;
      }
    }
  }
  if (stats.steps == 0) throw std::runtime_error("no p_gen recorded");
  stats.mean = sum / static_cast<double>(stats.steps);
  stats.sentence_initial_mean =
      stats.sentence_initial_steps ? sum_initial / static_cast<double>(stats.sentence_initial_steps)
                                   : 0.0;
  stats.other_mean = n_other ? sum_other / static_cast<double>(n_other) : 0.0;
  return stats;
}

}  // namespace covgen
