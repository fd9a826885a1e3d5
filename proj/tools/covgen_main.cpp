#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "run_config.hpp"

#include "covgen/beam.hpp"
#include "covgen/checkpoint.hpp"
#include "covgen/corpus.hpp"
#include "covgen/evaluate.hpp"
#include "covgen/grad.hpp"
#include "covgen/metrics.hpp"
#include "covgen/model.hpp"
#include "covgen/synthetic.hpp"
#include "covgen/trainer.hpp"
#include "covgen/util.hpp"
#include "covgen/vocab.hpp"

namespace covgen {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string with_commas(size_t n) {
  std::string raw = std::to_string(n);
  std::string out;
  for (size_t i = 0; i < raw.size(); ++i) {
    if (i > 0 && (raw.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(raw[i]);
  }
  return out;
}

void write_sidecar_meta(const std::string& artifact_path, const RunConfig& rc) {
  json j;
  j["config"] = run_config_json(rc);
  write_text_file(artifact_path + ".meta.json", j.dump(2) + "\n");
}

std::vector<Document> load_corpus_or_die(const std::string& path, const std::string& what) {
  if (path.empty()) throw std::runtime_error("missing required corpus path: " + what);
  auto docs = read_corpus_jsonl(path);
  if (docs.empty()) throw std::runtime_error("empty corpus: " + path);
  return docs;
}

Vocabulary load_vocab_or_die(const RunConfig& rc) {
  if (rc.paths_vocab.empty()) throw std::runtime_error("missing required path: paths.vocab");
  return Vocabulary::load(rc.paths_vocab, rc.model_vocab_size);
}

int run_count_params(const RunConfig& rc) {
  const ModelConfig mc = rc.model_config();
  const ParamCountReport report = count_params(mc);
  for (const auto& spec : param_specs(mc)) {
    std::printf("%-14s %-12s %s\n", spec.name.c_str(), shape_str(spec.shape).c_str(),
                std::to_string(shape_size(spec.shape)).c_str());
  }
  std::printf("mode %s\n", rc.mode.c_str());
  std::printf("total %s (%zu)\n", with_commas(report.total).c_str(), report.total);
  return 0;
}

int run_gradcheck(const RunConfig& rc) {
  Example ex;
  ex.article_ids = {4, 5, 6, 4, Vocabulary::kUnk};
  ex.article_ext_ids = {4, 5, 6, 4, 9};
  ex.article_oovs = {"oov0"};
  ex.dec_input_ids = {Vocabulary::kStart, 5};
  ex.target_ids = {5, 9};
  Batch batch;
  batch.enc_ids = {ex.article_ids};
  batch.enc_ext_ids = {ex.article_ext_ids};
  batch.enc_mask = {std::vector<uint8_t>(5, 1)};
  batch.dec_input = {ex.dec_input_ids};
  batch.target = {ex.target_ids};
  batch.dec_mask = {std::vector<uint8_t>(2, 1)};
  batch.max_oov = 1;

  const double tolerance = 1e-4;
  bool all_pass = true;
  const std::vector<std::string> modes =
      rc.mode == "all" ? std::vector<std::string>{"baseline", "pointer", "coverage"}
                       : std::vector<std::string>{rc.mode};
  for (const auto& mode : modes) {
    ModelConfig mc;
    mc.hidden_dim = 4;
    mc.emb_dim = 3;
    mc.vocab_size = 9;
    mc.use_pointer = mode != "baseline";
    mc.use_coverage = mode == "coverage";

    ModelParams p = init_params(mc, 97);
    // a generic-scale point keeps relu kinks away from the probe width
    for (auto& [name, t] : p.groups()) {
      for (size_t i = 0; i < t->size(); ++i) (*t)[i] *= 25.0;
    }
    if (mc.use_coverage) {
      Rng rng(98);
      for (size_t i = 0; i < p.cov_wc.size(); ++i) p.cov_wc[i] = rng.uniform(-0.5, 0.5);
    }
    std::vector<Tensor> point;
    for (const auto& [name, t] : p.groups()) point.push_back(*t);
    TapeBuilder f = [&](Tape& tape, const std::vector<Tensor>& vals) {
      const ModelParams pp = params_from_values(mc, vals);
      const BoundParams bp = bind_params(tape, pp);
      return sequence_loss_graph(tape, bp, batch, 1.0, nullptr);
    };
    const double err = grad_check(f, point, 1e-5);
    const bool pass = err < tolerance;
    all_pass = all_pass && pass;
    std::printf("mode %-9s max_rel_error %.3e %s (tolerance %.0e)\n", mode.c_str(), err,
                pass ? "PASS" : "FAIL", tolerance);
  }
  return all_pass ? 0 : 2;
}

int run_gen_synthetic(const RunConfig& rc, const std::string& out) {
  const auto docs = gen_synthetic(rc.synth_spec());
  write_corpus_jsonl(out, docs);
  write_sidecar_meta(out, rc);
  std::printf("wrote %zu %s examples to %s\n", docs.size(), rc.synth_kind.c_str(), out.c_str());
  return 0;
}

int run_build_vocab(const RunConfig& rc, const std::vector<std::string>& corpora,
                    const std::string& out, size_t cap) {
  std::vector<std::string> inputs = corpora;
  if (inputs.empty() && !rc.paths_train.empty()) inputs.push_back(rc.paths_train);
  if (inputs.empty()) throw std::runtime_error("build-vocab needs --corpus or paths.train");
  VocabBuilder builder;
  for (const auto& path : inputs) {
    for (const auto& doc : load_corpus_or_die(path, "corpus")) {
      builder.add_all(doc.article);
      for (const auto& s : doc.abstract_sentences) builder.add_all(s);
    }
  }
  const Vocabulary v = builder.build(cap);
  v.save(out);
  write_sidecar_meta(out, rc);
  std::printf("vocabulary of %d ids (cap %zu) written to %s\n", v.size(), cap, out.c_str());
  return 0;
}

int run_train(RunConfig rc, const std::string& init_from, bool coverage_from_scratch) {
  const auto train_docs = load_corpus_or_die(rc.paths_train, "paths.train");
  const auto valid_docs = load_corpus_or_die(rc.paths_valid, "paths.valid");
  const Vocabulary vocab = load_vocab_or_die(rc);
  rc.model_vocab_size = static_cast<size_t>(vocab.size());

  ModelConfig mc = rc.model_config();
  ModelParams params;
  AdagradState acc;
  CheckpointMeta meta;
  if (!init_from.empty()) {
    LoadedCheckpoint ckpt = load_checkpoint(init_from);
    if (mc.use_coverage && ckpt.params.config.use_pointer && !ckpt.params.config.use_coverage) {
      ckpt = enable_coverage(ckpt, rc.train_init_accumulator);
    }
    const ModelConfig& cc = ckpt.params.config;
    if (cc.hidden_dim != mc.hidden_dim || cc.emb_dim != mc.emb_dim ||
        cc.vocab_size != mc.vocab_size || cc.use_pointer != mc.use_pointer ||
        cc.use_coverage != mc.use_coverage) {
      throw std::runtime_error("checkpoint " + init_from + " does not match the requested mode");
    }
    params = std::move(ckpt.params);
    params.config.max_enc = mc.max_enc;
    params.config.max_dec = mc.max_dec;
    acc = std::move(ckpt.acc);
    meta = std::move(ckpt.meta);
  } else {
    if (mc.use_coverage && !coverage_from_scratch) {
      throw std::runtime_error(
          "coverage mode trains from a pointer checkpoint; pass --init-from or "
          "--coverage-from-scratch");
    }
    params = init_params(mc, rc.train_seed);
    acc = init_adagrad(params, rc.train_init_accumulator);
  }
  meta.config_echo = run_config_json(rc);

  fs::create_directories(rc.paths_checkpoint_dir);
  TrainPaths paths;
  paths.log_csv = rc.paths_checkpoint_dir + "/train_log.csv";
  paths.best_checkpoint = rc.paths_checkpoint_dir + "/best.ckpt";
  paths.final_checkpoint = rc.paths_checkpoint_dir + "/final.ckpt";

  const TrainResult result =
      train(params, acc, vocab, train_docs, valid_docs, rc.train_config(), paths, meta);
  write_sidecar_meta(paths.log_csv, rc);

  std::printf("trained %lld step(s)%s; best validation loss %s\n", result.steps,
              result.early_stopped ? " (early stopped)" : "",
              result.best_valid_loss < 0 ? "n/a" : std::to_string(result.best_valid_loss).c_str());
  std::printf("checkpoints: %s, %s\n", paths.best_checkpoint.c_str(),
              paths.final_checkpoint.c_str());
  return 0;
}

struct DecodeInputs {
  LoadedCheckpoint ckpt;
  Vocabulary vocab;
  std::vector<Document> docs;
  std::vector<Example> examples;
};

DecodeInputs prepare_decode(RunConfig& rc, const std::string& ckpt_path) {
  DecodeInputs in;
  in.ckpt = load_checkpoint(ckpt_path);
  rc.model_vocab_size = in.ckpt.params.config.vocab_size;
  in.vocab = load_vocab_or_die(rc);
  if (static_cast<size_t>(in.vocab.size()) != in.ckpt.params.config.vocab_size) {
    throw std::runtime_error("vocabulary size does not match the checkpoint");
  }
  in.docs = load_corpus_or_die(rc.paths_test, "paths.test");
  in.examples.reserve(in.docs.size());
  for (const auto& d : in.docs) {
    in.examples.push_back(
        encode_document(d, in.vocab, in.ckpt.params.config.max_enc, rc.model_max_dec));
  }
  return in;
}

int run_decode(RunConfig rc, const std::string& ckpt_path, bool inspect) {
  DecodeInputs in = prepare_decode(rc, ckpt_path);
  const DecodeConfig dc = rc.decode_config();
  std::vector<json> records(in.docs.size());
  parallel_for(in.docs.size(), [&](size_t i) {
    const DecodeResult r = beam_search(in.ckpt.params, in.vocab, in.examples[i], dc);
    records[i] = inspect ? inspection_record_json(in.docs[i], r, in.ckpt.params, in.vocab,
                                                  in.examples[i])
                         : decode_record_json(in.docs[i], r);
  });

  fs::create_directories(rc.paths_report_dir);
  const std::string out = rc.paths_report_dir + (inspect ? "/dumps.jsonl" : "/decodes.jsonl");
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  for (const auto& r : records) f << r.dump() << "\n";
  f.close();
  write_sidecar_meta(out, rc);
  std::printf("decoded %zu example(s) to %s\n", records.size(), out.c_str());

  if (inspect && in.ckpt.params.config.use_pointer) {
    std::vector<DecodedSteps> dumps;
    for (const auto& r : records) {
      DecodedSteps d;
      for (const auto& step : r.at("steps")) {
        d.tokens.push_back(step.at("token").get<std::string>());
        d.p_gens.push_back(step.at("p_gen").get<double>());
      }
      dumps.push_back(std::move(d));
    }
    const PgenStats stats = pgen_stats(dumps);
    json j{{"mean", stats.mean},
           {"min", stats.min},
           {"max", stats.max},
           {"sentence_initial_mean", stats.sentence_initial_mean},
           {"other_mean", stats.other_mean},
           {"steps", stats.steps},
           {"sentence_initial_steps", stats.sentence_initial_steps}};
    j["config"] = run_config_json(rc);
    const std::string stats_path = rc.paths_report_dir + "/pgen_stats.json";
    write_text_file(stats_path, j.dump(2) + "\n");
    std::printf("p_gen mean %.4f (min %.4f, max %.4f) over %zu steps -> %s\n", stats.mean,
                stats.min, stats.max, stats.steps, stats_path.c_str());
  }
  return 0;
}

std::vector<DecodedSteps> read_dumps(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dumps: " + path);
  std::vector<DecodedSteps> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    DecodedSteps d;
    for (const auto& step : j.at("steps")) {
      d.tokens.push_back(step.at("token").get<std::string>());
      if (step.contains("p_gen")) d.p_gens.push_back(step.at("p_gen").get<double>());
    }
    if (!d.p_gens.empty() && d.p_gens.size() != d.tokens.size()) {
      throw std::runtime_error("malformed dump line: partial p_gen records");
    }
    out.push_back(std::move(d));
  }
  return out;
}

int run_evaluate(const RunConfig& rc, const std::string& decodes_path,
                 const std::string& dumps_path) {
  const std::string path =
      decodes_path.empty() ? rc.paths_report_dir + "/decodes.jsonl" : decodes_path;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open decodes: " + path);
  std::vector<EvalItem> items;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    EvalItem item;
    item.article_tokens = split_whitespace(j.at("article").get<std::string>());
    for (const auto& s : j.at("reference")) {
      item.reference_sentences.push_back(split_whitespace(s.get<std::string>()));
    }
    item.decoded_tokens = split_whitespace(j.at("decoded").get<std::string>());
    items.push_back(std::move(item));
  }
  if (items.empty()) throw std::runtime_error("no decode records in " + path);

  const CorpusEval eval = evaluate_corpus(items);
  json report = corpus_eval_json(eval);
  report["config"] = run_config_json(rc);
  if (!dumps_path.empty()) {
    const PgenStats stats = pgen_stats(read_dumps(dumps_path));
    report["pgen_stats"] = json{{"mean", stats.mean},
                                {"min", stats.min},
                                {"max", stats.max},
                                {"sentence_initial_mean", stats.sentence_initial_mean},
                                {"other_mean", stats.other_mean},
                                {"steps", stats.steps},
                                {"sentence_initial_steps", stats.sentence_initial_steps}};
  }

  fs::create_directories(rc.paths_report_dir);
  const std::string report_path = rc.paths_report_dir + "/report.json";
  write_text_file(report_path, report.dump(2) + "\n");
  const std::string csv_path = rc.paths_report_dir + "/fig.csv";
  write_text_file(csv_path, fig_csv(eval));
  write_sidecar_meta(csv_path, rc);
  std::printf("rouge-1/2/L f1: %.4f / %.4f / %.4f over %zu example(s)\n", eval.r1_f1, eval.r2_f1,
              eval.rl_f1, items.size());
  std::printf("report: %s, figure data: %s\n", report_path.c_str(), csv_path.c_str());
  return 0;
}

int dispatch(int argc, char** argv) {
  RunConfig rc;
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::string(argv[i]) == "--config") apply_config_file(rc, argv[i + 1]);
  }

  CLI::App app{"pointer-generator summarizer with coverage"};
  app.require_subcommand(1);
  std::string config_path, init_from, out, ckpt_path, decodes_path, dumps_path;
  std::vector<std::string> corpora;
  bool coverage_from_scratch = false;
  size_t vocab_cap = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file with flat dotted keys");
    add_config_options(cmd, rc);
  };

  auto* c_train = app.add_subcommand("train", "train a model");
  add_common(c_train);
  c_train->add_option("--init-from", init_from, "checkpoint to resume from or extend");
  c_train->add_flag("--coverage-from-scratch", coverage_from_scratch,
                    "allow coverage mode without a pointer checkpoint");

  auto* c_decode = app.add_subcommand("decode", "beam-decode a corpus");
  add_common(c_decode);
  c_decode->add_option("--ckpt", ckpt_path, "checkpoint to decode with")->required();

  auto* c_inspect = app.add_subcommand("inspect", "decode with per-step dumps");
  add_common(c_inspect);
  c_inspect->add_option("--ckpt", ckpt_path, "checkpoint to decode with")->required();

  auto* c_eval = app.add_subcommand("evaluate", "score decode output");
  add_common(c_eval);
  c_eval->add_option("--decodes", decodes_path, "decode JSONL (default report_dir/decodes.jsonl)");
  c_eval->add_option("--dumps", dumps_path, "inspection JSONL for p_gen statistics");

  auto* c_count = app.add_subcommand("count-params", "print the parameter budget");
  add_common(c_count);

  auto* c_grad = app.add_subcommand("gradcheck", "finite-difference check at tiny dims");
  add_common(c_grad);
  c_grad->get_option("--mode")->default_val("all");

  auto* c_gen = app.add_subcommand("gen-synthetic", "generate a synthetic corpus");
  add_common(c_gen);
  c_gen->add_option("--out", out, "output corpus path")->required();

  auto* c_vocab = app.add_subcommand("build-vocab", "count words and write a vocabulary");
  add_common(c_vocab);
  c_vocab->add_option("--corpus", corpora, "corpus JSONL (repeatable)");
  c_vocab->add_option("--out", out, "output vocabulary path")->required();
  c_vocab->add_option("--cap", vocab_cap, "vocabulary cap (default model.vocab_size)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (c_train->parsed()) return run_train(rc, init_from, coverage_from_scratch);
  if (c_decode->parsed()) return run_decode(rc, ckpt_path, false);
  if (c_inspect->parsed()) return run_decode(rc, ckpt_path, true);
  if (c_eval->parsed()) return run_evaluate(rc, decodes_path, dumps_path);
  if (c_count->parsed()) return run_count_params(rc);
  if (c_grad->parsed()) return run_gradcheck(rc);
  if (c_gen->parsed()) return run_gen_synthetic(rc, out);
  if (c_vocab->parsed()) {
    return run_build_vocab(rc, corpora, out, vocab_cap ? vocab_cap : rc.model_vocab_size);
  }
  return 1;
}

}  // namespace
}  // namespace covgen

int main(int argc, char** argv) {
  try {
    return covgen::dispatch(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
