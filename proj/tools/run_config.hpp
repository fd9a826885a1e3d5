#pragma once

#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "covgen/beam.hpp"
#include "covgen/model.hpp"
#include "covgen/synthetic.hpp"
#include "covgen/trainer.hpp"
#include "covgen/util.hpp"

namespace covgen {

// Resolved run configuration. Config files are JSON objects with flat dotted
// keys ("model.hidden_dim": 64); command-line flags carry the same names and
// win over the file.
struct RunConfig {
  std::string mode = "pointer";  // baseline | pointer | coverage

  size_t model_hidden_dim = 256;
  size_t model_emb_dim = 128;
  size_t model_vocab_size = 50000;
  size_t model_max_enc = 400;
  size_t model_max_dec = 100;

  double train_learning_rate = 0.15;
  double train_init_accumulator = 0.1;
  double train_max_grad_norm = 2.0;
  double train_lambda = 1.0;
  size_t train_batch_size = 16;
  long long train_eval_every = 100;
  int train_patience = 5;
  uint64_t train_seed = 1;
  long long train_max_steps = 2000;
  std::string train_curriculum;  // "step:max_enc:max_dec,..." (optional)

  int decode_beam_size = 4;
  int decode_max_steps = 120;
  int decode_min_steps = 0;
  bool decode_length_normalize = true;

  std::string paths_train, paths_valid, paths_test, paths_vocab;
  std::string paths_checkpoint_dir = ".";
  std::string paths_report_dir = ".";

  std::string synth_kind = "copy-task";
  size_t synth_count = 200;
  uint64_t synth_seed = 1;
  size_t synth_vocab_size = 50;
  double synth_oov_rate = 0.3;

  ModelConfig model_config() const {
    ModelConfig c;
    c.hidden_dim = model_hidden_dim;
    c.emb_dim = model_emb_dim;
    c.vocab_size = model_vocab_size;
    c.max_enc = model_max_enc;
    c.max_dec = model_max_dec;
    c.use_pointer = mode != "baseline";
    c.use_coverage = mode == "coverage";
    return c;
  }

  TrainConfig train_config() const {
    TrainConfig c;
    c.learning_rate = train_learning_rate;
    c.init_accumulator = train_init_accumulator;
    c.max_grad_norm = train_max_grad_norm;
    c.lambda = train_lambda;
    c.batch_size = train_batch_size;
    c.eval_every = train_eval_every;
    c.patience = train_patience;
    c.seed = train_seed;
    c.max_steps = train_max_steps;
    c.curriculum = parse_curriculum(train_curriculum);
    return c;
  }

  DecodeConfig decode_config() const {
    DecodeConfig c;
    c.beam_size = decode_beam_size;
    c.max_steps = decode_max_steps;
    c.min_steps = decode_min_steps;
    c.length_normalize = decode_length_normalize;
    return c;
  }

  SyntheticSpec synth_spec() const {
    SyntheticSpec s;
    s.kind = synthetic_kind_from_name(synth_kind);
    s.count = synth_count;
    s.seed = synth_seed;
    s.vocab_size = synth_vocab_size;
    s.oov_rate = synth_oov_rate;
    return s;
  }

  static std::vector<CurriculumRung> parse_curriculum(const std::string& text) {
    std::vector<CurriculumRung> rungs;
    if (text.empty()) return rungs;
    for (const auto& item : split_list(text, ',')) {
      const auto parts = split_list(item, ':');
      if (parts.size() != 3) {
        throw std::invalid_argument("curriculum rung must be step:max_enc:max_dec, got " + item);
      }
      rungs.push_back({std::stoll(parts[0]), static_cast<size_t>(std::stoull(parts[1])),
                       static_cast<size_t>(std::stoull(parts[2]))});
    }
    return rungs;
  }

 private:
  static std::vector<std::string> split_list(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == sep) {
        out.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(ch);
      }
    }
    out.push_back(cur);
    return out;
  }
};

nlohmann::json run_config_json(const RunConfig& rc);
void apply_config_file(RunConfig& rc, const std::string& path);
void add_config_options(CLI::App* cmd, RunConfig& rc);

}  // namespace covgen
