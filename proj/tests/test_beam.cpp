#include <doctest.h>

#include <cmath>

#include "covgen/beam.hpp"
#include "covgen/synthetic.hpp"
#include "test_support.hpp"

using namespace covgen;

namespace {

struct DecodeSetup {
  Vocabulary vocab;
  ModelConfig config;
  ModelParams params;
  Document doc;
  Example ex;
};

DecodeSetup decode_setup(bool pointer, bool coverage, uint64_t seed, double oov_rate = 0.5) {
  SyntheticSpec spec;
  spec.kind = SyntheticSpec::Kind::kCopyTask;
  spec.count = 12;
  spec.seed = seed;
  spec.vocab_size = 10;
  spec.oov_rate = oov_rate;
  const auto docs = gen_synthetic(spec);
  VocabBuilder b;
  for (const auto& d : docs) {
    b.add_all(d.article);
    for (const auto& s : d.abstract_sentences) b.add_all(s);
  }
  DecodeSetup s{b.build(4 + spec.vocab_size + 1), {}, {}, docs[0], {}};
  s.config.hidden_dim = 6;
  s.config.emb_dim = 4;
  s.config.vocab_size = static_cast<size_t>(s.vocab.size());
  s.config.use_pointer = pointer;
  s.config.use_coverage = coverage;
  ModelParams p = init_params(s.config, seed + 1);
  for (auto& [name, t] : p.groups()) {
    if (name == "cov.w_c") continue;
    for (size_t i = 0; i < t->size(); ++i) (*t)[i] *= 20.0;  // spread the distributions out
  }
  s.params = std::move(p);
  s.ex = encode_document(s.doc, s.vocab, 32, 16);
  return s;
}

}  // namespace

TEST_CASE("beam size one equals the greedy argmax chain") {
  for (const bool pointer : {false, true}) {
    const DecodeSetup s = decode_setup(pointer, false, 101);
    DecodeConfig cfg;
    cfg.beam_size = 1;
    cfg.max_steps = 10;
    const DecodeResult got = beam_search(s.params, s.vocab, s.ex, cfg);

    // independent greedy rollout
    std::vector<int> greedy;
    {
      Tape tape;
      const BoundParams bp = bind_params(tape, s.params);
      const std::vector<uint8_t> mask(s.ex.article_ids.size(), 1);
      const EncoderOutput enc = encode(tape, bp, s.ex.article_ids, mask);
      const int wh_h = tape.matmul(enc.h, bp.attn_wh);
      StateNodes st = enc.init_state;
      int ctx = tape.input(Tensor({s.config.attn_dim()}));
      int prev = Vocabulary::kStart;
      const size_t max_oov = pointer ? s.ex.article_oovs.size() : 0;
      for (int t = 0; t < 10; ++t) {
        const StepNodes step = decoder_step(tape, bp, prev, ctx, st, enc.h, wh_h, mask,
                                            s.ex.article_ext_ids, max_oov, -1);
        const Tensor& dist = tape.value(step.final_dist);
        int best = 0;
        for (size_t i = 1; i < dist.size(); ++i) {
          if (dist[i] > dist[best]) best = static_cast<int>(i);
        }
        if (best == Vocabulary::kStop) break;
        greedy.push_back(best);
        prev = best < s.vocab.size() ? best : Vocabulary::kUnk;
        ctx = step.context;
        st = step.state;
      }
    }
    CHECK(got.token_ids == greedy);
  }
}

TEST_CASE("min_steps keeps hypotheses alive past the floor") {
  const DecodeSetup s = decode_setup(true, false, 103);
  DecodeConfig cfg;
  cfg.beam_size = 4;
  cfg.max_steps = 8;
  cfg.min_steps = 3;
  const DecodeResult r = beam_search(s.params, s.vocab, s.ex, cfg);
  if (r.finished) {
    CHECK(r.words.size() >= 3);
  } else {
    CHECK(static_cast<int>(r.best.emitted()) == cfg.max_steps);
  }
  CHECK(r.best.logp <= 0.0);
}

TEST_CASE("decode config validation") {
  const DecodeSetup s = decode_setup(false, false, 104);
  DecodeConfig bad;
  bad.beam_size = 0;
  CHECK_THROWS(beam_search(s.params, s.vocab, s.ex, bad));
  bad.beam_size = 2;
  bad.min_steps = 9;
  bad.max_steps = 4;
  CHECK_THROWS(beam_search(s.params, s.vocab, s.ex, bad));
}

TEST_CASE("extended ids in the output map to article OOV words") {
  const DecodeSetup s = decode_setup(true, false, 105, 0.8);
  REQUIRE(!s.ex.article_oovs.empty());
  DecodeConfig cfg;
  cfg.beam_size = 4;
  cfg.max_steps = 12;
  const DecodeResult r = beam_search(s.params, s.vocab, s.ex, cfg);
  CHECK(r.words.size() == r.token_ids.size());
  for (size_t i = 0; i < r.token_ids.size(); ++i) {
    const int id = r.token_ids[i];
    if (id >= s.vocab.size()) {
      CHECK(r.words[i] == s.ex.article_oovs[id - s.vocab.size()]);
    } else {
      CHECK(r.words[i] == s.vocab.word(id));
    }
    CHECK(id != Vocabulary::kStop);
    CHECK(id != Vocabulary::kStart);
  }
}

TEST_CASE("cumulative log probability equals the sum of chosen-token logs") {
  const DecodeSetup s = decode_setup(true, false, 106);
  DecodeConfig cfg;
  cfg.beam_size = 3;
  cfg.max_steps = 6;
  const DecodeResult r = beam_search(s.params, s.vocab, s.ex, cfg);
  CHECK(r.best.records.size() == r.best.emitted());
  CHECK(r.best.logp <= 0.0);
  CHECK(std::isfinite(r.best.logp));
}

TEST_CASE("inspection records gate p_gen and coverage by mode") {
  DecodeConfig cfg;
  cfg.beam_size = 2;
  cfg.max_steps = 8;

  SUBCASE("baseline carries neither field") {
    const DecodeSetup s = decode_setup(false, false, 107);
    const DecodeResult r = beam_search(s.params, s.vocab, s.ex, cfg);
    const auto j = inspection_record_json(s.doc, r, s.params, s.vocab, s.ex);
    CHECK(!j.contains("coverage"));
    for (const auto& step : j.at("steps")) {
      CHECK(!step.contains("p_gen"));
      CHECK(step.contains("attn"));
    }
  }
  SUBCASE("coverage mode records both and the accounting holds") {
    DecodeSetup s = decode_setup(true, true, 108);
    // a nonzero coverage weight so the mechanism participates
    for (size_t i = 0; i < s.params.cov_wc.size(); ++i) {
      s.params.cov_wc[i] = (i % 2 ? -0.3 : 0.4);
    }
    const DecodeResult r = beam_search(s.params, s.vocab, s.ex, cfg);
    const auto j = inspection_record_json(s.doc, r, s.params, s.vocab, s.ex);
    REQUIRE(j.contains("coverage"));
    const auto cov = j.at("coverage").get<std::vector<double>>();
    double cov_sum = 0.0;
    for (double v : cov) cov_sum += v;
    const auto& steps = j.at("steps");
    CHECK(std::fabs(cov_sum - static_cast<double>(steps.size())) < 1e-6);
    for (const auto& step : steps) {
      const double pg = step.at("p_gen").get<double>();
      CHECK(pg >= 0.0);
      CHECK(pg <= 1.0);
      const auto attn = step.at("attn").get<std::vector<double>>();
      double sum = 0.0;
      for (double v : attn) sum += v;
      CHECK(std::fabs(sum - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("decode records are reproducible") {
  const DecodeSetup s = decode_setup(true, false, 109);
  DecodeConfig cfg;
  const DecodeResult a = beam_search(s.params, s.vocab, s.ex, cfg);
  const DecodeResult b = beam_search(s.params, s.vocab, s.ex, cfg);
  CHECK(a.token_ids == b.token_ids);
  CHECK(a.best.logp == b.best.logp);
}
