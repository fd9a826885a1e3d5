#include "covgen/beam.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "covgen/util.hpp"

namespace covgen {

using nlohmann::json;

namespace {

std::string ext_id_to_word(int id, const Vocabulary& vocab, const Example& ex) {
  if (id < vocab.size()) return vocab.word(id);
  const size_t k = static_cast<size_t>(id) - static_cast<size_t>(vocab.size());
  if (k >= ex.article_oovs.size()) throw std::out_of_range("extended id outside example OOVs");
  return ex.article_oovs[k];
}

struct Expansion {
  StateNodes state;
  int context = -1;
  int coverage = -1;
  int attn = -1;
  int p_gen = -1;
  int final_dist = -1;
};

struct Candidate {
  double logp;
  size_t parent;
  int token;
};

}  // namespace

DecodeResult beam_search(const ModelParams& params, const Vocabulary& vocab, const Example& ex,
                         const DecodeConfig& cfg) {
  const ModelConfig& c = params.config;
  if (cfg.beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (cfg.min_steps > cfg.max_steps) throw std::invalid_argument("min_steps > max_steps");

  const size_t src_len = ex.article_ids.size();
  const std::vector<uint8_t> enc_mask(src_len, 1);
  const size_t max_oov = c.use_pointer ? ex.article_oovs.size() : 0;

  // One-time encoder pass; values re-enter the per-step tapes as inputs.
  Tensor enc_h_value, wh_h_value, init_cell, init_hidden;
  {
    Tape tape;
    const BoundParams bp = bind_params(tape, params);
    const EncoderOutput enc = encode(tape, bp, ex.article_ids, enc_mask);
    enc_h_value = tape.value(enc.h);
    wh_h_value = tape.value(tape.matmul(enc.h, bp.attn_wh));
    init_cell = tape.value(enc.init_state.cell);
    init_hidden = tape.value(enc.init_state.hidden);
  }

  Hypothesis seed;
  seed.tokens = {Vocabulary::kStart};
  seed.cell = init_cell;
  seed.hidden = init_hidden;
  seed.context = Tensor({c.attn_dim()});
  if (c.use_coverage) seed.coverage = Tensor({src_len});

  std::vector<Hypothesis> live = {std::move(seed)};
  std::vector<Hypothesis> finished;
  const size_t beam = static_cast<size_t>(cfg.beam_size);

  for (int step_i = 0; step_i < cfg.max_steps && finished.size() < beam && !live.empty();
       ++step_i) {
    Tape tape;
    const BoundParams bp = bind_params(tape, params);
    const int enc_h = tape.input(enc_h_value);
    const int wh_h = tape.input(wh_h_value);

    // all beams are identical before the first expansion
    const size_t expand_n = step_i == 0 ? 1 : live.size();
    std::vector<Expansion> exp(expand_n);
    std::vector<Candidate> candidates;
    for (size_t hi = 0; hi < expand_n; ++hi) {
      const Hypothesis& h = live[hi];
      int prev = h.tokens.back();
      if (prev >= vocab.size()) prev = Vocabulary::kUnk;
      StateNodes st{tape.input(h.cell), tape.input(h.hidden)};
      const int ctx = tape.input(h.context);
      const int cov = c.use_coverage ? tape.input(h.coverage) : -1;
      const StepNodes step = decoder_step(tape, bp, prev, ctx, st, enc_h, wh_h, enc_mask,
                                          ex.article_ext_ids, max_oov, cov);
      exp[hi] = {step.state, step.context, step.coverage, step.attn, step.p_gen, step.final_dist};

      const Tensor& dist = tape.value(step.final_dist);
      std::vector<int> order(dist.size());
      for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
      const size_t take = std::min<size_t>(2 * beam, order.size());
      std::partial_sort(order.begin(), order.begin() + take, order.end(),
                        [&](int a, int b) { return dist[a] != dist[b] ? dist[a] > dist[b] : a < b; });
      for (size_t k = 0; k < take; ++k) {
        const int tok = order[k];
        candidates.push_back(
            {h.logp + std::log(std::max(dist[tok], kProbFloor)), hi, tok});
      }
    }

    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.logp != b.logp) return a.logp > b.logp;
      if (a.parent != b.parent) return a.parent < b.parent;
      return a.token < b.token;
    });

    std::vector<Hypothesis> next;
    for (const Candidate& cand : candidates) {
      if (next.size() >= beam || finished.size() >= beam) break;
      const Expansion& e = exp[cand.parent];
      Hypothesis h = live[cand.parent];
      h.tokens.push_back(cand.token);
      h.logp = cand.logp;
      h.cell = tape.value(e.state.cell);
      h.hidden = tape.value(e.state.hidden);
      h.context = tape.value(e.context);
      if (e.coverage >= 0) h.coverage = tape.value(e.coverage);
      StepRecord rec;
      rec.attn = tape.value(e.attn).values();
      if (e.p_gen >= 0) rec.p_gen = tape.value(e.p_gen)[0];
      h.records.push_back(std::move(rec));

      if (cand.token == Vocabulary::kStop) {
        if (step_i >= cfg.min_steps) finished.push_back(std::move(h));
        // below the floor: dropped
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }

  const std::vector<Hypothesis>& pool = finished.empty() ? live : finished;
  if (pool.empty()) throw std::runtime_error("beam_search: no hypotheses survived");
  size_t best_i = 0;
  auto score = [&](const Hypothesis& h) {
    const double n = static_cast<double>(std::max<size_t>(1, h.emitted()));
    return cfg.length_normalize ? h.logp / n : h.logp;
  };
  for (size_t i = 1; i < pool.size(); ++i) {
    if (score(pool[i]) > score(pool[best_i])) best_i = i;
  }

  DecodeResult out;
  out.best = pool[best_i];
  out.finished = !finished.empty();
  for (size_t i = 1; i < out.best.tokens.size(); ++i) {
    const int id = out.best.tokens[i];
    if (id == Vocabulary::kStop) break;
    out.token_ids.push_back(id);
    out.words.push_back(ext_id_to_word(id, vocab, ex));
  }
  return out;
}

json decode_record_json(const Document& doc, const DecodeResult& result) {
  json j;
  j["article"] = join(doc.article);
  json ref = json::array();
  for (const auto& s : doc.abstract_sentences) ref.push_back(join(s));
  j["reference"] = std::move(ref);
  j["decoded"] = join(result.words);
  return j;
}

json inspection_record_json(const Document& doc, const DecodeResult& result,
                            const ModelParams& params, const Vocabulary& vocab,
                            const Example& ex) {
  json j = decode_record_json(doc, result);
  json steps = json::array();
  const Hypothesis& best = result.best;
  for (size_t i = 0; i < best.records.size(); ++i) {
    json s;
    s["token"] = ext_id_to_word(best.tokens[i + 1], vocab, ex);
    s["attn"] = best.records[i].attn;
    if (params.config.use_pointer) s["p_gen"] = best.records[i].p_gen;
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  if (params.config.use_coverage) j["coverage"] = best.coverage.values();
  return j;
}

}  // namespace covgen
