#include "covgen/evaluate.hpp"

#include <sstream>

#include "covgen/util.hpp"

namespace covgen {

using nlohmann::json;

CorpusEval evaluate_corpus(const std::vector<EvalItem>& items) {
  CorpusEval eval;
  eval.examples.resize(items.size());
  parallel_for(items.size(), [&](size_t i) {
    const EvalItem& item = items[i];
    ExampleEval& e = eval.examples[i];
    const auto ref_tokens = [&] {
      std::vector<std::string> out;
      for (const auto& s : item.reference_sentences) out.insert(out.end(), s.begin(), s.end());
      return out;
    }();
    const auto decoded_sents = split_sentences(item.decoded_tokens);
    const auto article_sents = split_sentences(item.article_tokens);

    e.r1 = rouge_n(item.decoded_tokens, ref_tokens, 1);
    e.r2 = rouge_n(item.decoded_tokens, ref_tokens, 2);
    e.rl = rouge_l(decoded_sents, item.reference_sentences);

    const auto lead = lead3(article_sents);
    e.lead3_r1 = rouge_n(lead, ref_tokens, 1);
    e.lead3_r2 = rouge_n(lead, ref_tokens, 2);
    e.lead3_rl = rouge_l(split_sentences(lead), item.reference_sentences);

    e.rep_decoded = repetition_stats(decoded_sents);
    e.rep_reference = repetition_stats(item.reference_sentences);
    e.nov_decoded = novelty_stats(decoded_sents, item.article_tokens);
    e.nov_reference = novelty_stats(item.reference_sentences, item.article_tokens);
  });

  const double n = items.empty() ? 1.0 : static_cast<double>(items.size());
  for (const auto& e : eval.examples) {
    eval.r1_f1 += e.r1.f1 / n;
    eval.r2_f1 += e.r2.f1 / n;
    eval.rl_f1 += e.rl.f1 / n;
    eval.lead3_r1_f1 += e.lead3_r1.f1 / n;
    eval.lead3_r2_f1 += e.lead3_r2.f1 / n;
    eval.lead3_rl_f1 += e.lead3_rl.f1 / n;
    for (size_t k = 0; k < 4; ++k) {
      eval.dup_model[k] += e.rep_decoded.dup_ngram[k] / n;
      eval.dup_ref[k] += e.rep_reference.dup_ngram[k] / n;
      eval.novel_model[k] += e.nov_decoded.novel_ngram[k] / n;
      eval.novel_ref[k] += e.nov_reference.novel_ngram[k] / n;
    }
    eval.dup_sent_model += e.rep_decoded.dup_sentence / n;
    eval.dup_sent_ref += e.rep_reference.dup_sentence / n;
    eval.copy_sent_model += e.nov_decoded.copied_sentence / n;
    eval.copy_sent_ref += e.nov_reference.copied_sentence / n;
  }
  return eval;
}

namespace {
json rouge_json(const RougeScore& s) {
  return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
}
}  // namespace

json corpus_eval_json(const CorpusEval& eval) {
  json j;
  j["corpus"] = json{{"rouge_1_f1", eval.r1_f1},
                     {"rouge_2_f1", eval.r2_f1},
                     {"rouge_l_f1", eval.rl_f1},
                     {"lead3_rouge_1_f1", eval.lead3_r1_f1},
                     {"lead3_rouge_2_f1", eval.lead3_r2_f1},
                     {"lead3_rouge_l_f1", eval.lead3_rl_f1},
                     {"dup_ngram_model", eval.dup_model},
                     {"dup_ngram_reference", eval.dup_ref},
                     {"novel_ngram_model", eval.novel_model},
                     {"novel_ngram_reference", eval.novel_ref},
                     {"dup_sentence_model", eval.dup_sent_model},
                     {"dup_sentence_reference", eval.dup_sent_ref},
                     {"copied_sentence_model", eval.copy_sent_model},
                     {"copied_sentence_reference", eval.copy_sent_ref}};
  json per = json::array();
  for (const auto& e : eval.examples) {
    per.push_back(json{{"rouge_1", rouge_json(e.r1)},
                       {"rouge_2", rouge_json(e.r2)},
                       {"rouge_l", rouge_json(e.rl)},
                       {"dup_ngram", e.rep_decoded.dup_ngram},
                       {"novel_ngram", e.nov_decoded.novel_ngram},
                       {"copied_sentence", e.nov_decoded.copied_sentence}});
  }
  j["examples"] = std::move(per);
  return j;
}

std::string fig_csv(const CorpusEval& eval) {
  std::ostringstream out;
  out << "unit,dup_model_pct,dup_reference_pct,novel_model_pct,novel_reference_pct\n";
  for (size_t k = 0; k < 4; ++k) {
    out << (k + 1) << "-gram," << 100.0 * eval.dup_model[k] << "," << 100.0 * eval.dup_ref[k]
        << "," << 100.0 * eval.novel_model[k] << "," << 100.0 * eval.novel_ref[k] << "\n";
  }
  out << "sentence," << 100.0 * eval.dup_sent_model << "," << 100.0 * eval.dup_sent_ref << ","
      << 100.0 * eval.copy_sent_model << "," << 100.0 * eval.copy_sent_ref << "\n";
  return out.str();
}

}  // namespace covgen
