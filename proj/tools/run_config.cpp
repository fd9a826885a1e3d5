#include "run_config.hpp"

#include <fstream>

namespace covgen {

using nlohmann::json;

namespace {

struct Field {
  const char* key;
  enum Kind { kString, kSize, kDouble, kLongLong, kInt, kUint64, kBool } kind;
  void* ptr;
};

std::vector<Field> fields(RunConfig& rc) {
  return {
      {"mode", Field::kString, &rc.mode},
      {"model.hidden_dim", Field::kSize, &rc.model_hidden_dim},
      {"model.emb_dim", Field::kSize, &rc.model_emb_dim},
      {"model.vocab_size", Field::kSize, &rc.model_vocab_size},
      {"model.max_enc", Field::kSize, &rc.model_max_enc},
      {"model.max_dec", Field::kSize, &rc.model_max_dec},
      {"train.learning_rate", Field::kDouble, &rc.train_learning_rate},
      {"train.init_accumulator", Field::kDouble, &rc.train_init_accumulator},
      {"train.max_grad_norm", Field::kDouble, &rc.train_max_grad_norm},
      {"train.lambda", Field::kDouble, &rc.train_lambda},
      {"train.batch_size", Field::kSize, &rc.train_batch_size},
      {"train.eval_every", Field::kLongLong, &rc.train_eval_every},
      {"train.patience", Field::kInt, &rc.train_patience},
      {"train.seed", Field::kUint64, &rc.train_seed},
      {"train.max_steps", Field::kLongLong, &rc.train_max_steps},
      {"train.curriculum", Field::kString, &rc.train_curriculum},
      {"decode.beam_size", Field::kInt, &rc.decode_beam_size},
      {"decode.max_steps", Field::kInt, &rc.decode_max_steps},
      {"decode.min_steps", Field::kInt, &rc.decode_min_steps},
      {"decode.length_normalize", Field::kBool, &rc.decode_length_normalize},
      {"paths.train", Field::kString, &rc.paths_train},
      {"paths.valid", Field::kString, &rc.paths_valid},
      {"paths.test", Field::kString, &rc.paths_test},
      {"paths.vocab", Field::kString, &rc.paths_vocab},
      {"paths.checkpoint_dir", Field::kString, &rc.paths_checkpoint_dir},
      {"paths.report_dir", Field::kString, &rc.paths_report_dir},
      {"synth.kind", Field::kString, &rc.synth_kind},
      {"synth.count", Field::kSize, &rc.synth_count},
      {"synth.seed", Field::kUint64, &rc.synth_seed},
      {"synth.vocab_size", Field::kSize, &rc.synth_vocab_size},
      {"synth.oov_rate", Field::kDouble, &rc.synth_oov_rate},
  };
}

}  // namespace

json run_config_json(const RunConfig& rc) {
  json j;
  for (const auto& f : fields(const_cast<RunConfig&>(rc))) {
    switch (f.kind) {
      case Field::kString: j[f.key] = *static_cast<std::string*>(f.ptr); break;
      case Field::kSize: j[f.key] = *static_cast<size_t*>(f.ptr); break;
      case Field::kDouble: j[f.key] = *static_cast<double*>(f.ptr); break;
      case Field::kLongLong: j[f.key] = *static_cast<long long*>(f.ptr); break;
      case Field::kInt: j[f.key] = *static_cast<int*>(f.ptr); break;
      case Field::kUint64: j[f.key] = *static_cast<uint64_t*>(f.ptr); break;
      case Field::kBool: j[f.key] = *static_cast<bool*>(f.ptr); break;
    }
  }
  return j;
}

void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j;
  in >> j;
  if (!j.is_object()) throw std::runtime_error("config must be a JSON object: " + path);
  auto fs = fields(rc);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& f : fs) {
      if (key != f.key) continue;
      known = true;
      switch (f.kind) {
        case Field::kString: *static_cast<std::string*>(f.ptr) = value.get<std::string>(); break;
        case Field::kSize: *static_cast<size_t*>(f.ptr) = value.get<size_t>(); break;
        case Field::kDouble: *static_cast<double*>(f.ptr) = value.get<double>(); break;
        case Field::kLongLong: *static_cast<long long*>(f.ptr) = value.get<long long>(); break;
        case Field::kInt: *static_cast<int*>(f.ptr) = value.get<int>(); break;
        case Field::kUint64: *static_cast<uint64_t*>(f.ptr) = value.get<uint64_t>(); break;
        case Field::kBool: *static_cast<bool*>(f.ptr) = value.get<bool>(); break;
      }
      break;
    }
    if (!known) throw std::runtime_error("unknown config key: " + key);
  }
}

void add_config_options(CLI::App* cmd, RunConfig& rc) {
  for (const auto& f : fields(rc)) {
    const std::string flag = std::string("--") + f.key;
    switch (f.kind) {
      case Field::kString: cmd->add_option(flag, *static_cast<std::string*>(f.ptr)); break;
      case Field::kSize: cmd->add_option(flag, *static_cast<size_t*>(f.ptr)); break;
      case Field::kDouble: cmd->add_option(flag, *static_cast<double*>(f.ptr)); break;
      case Field::kLongLong: cmd->add_option(flag, *static_cast<long long*>(f.ptr)); break;
      case Field::kInt: cmd->add_option(flag, *static_cast<int*>(f.ptr)); break;
      case Field::kUint64: cmd->add_option(flag, *static_cast<uint64_t*>(f.ptr)); break;
      case Field::kBool: cmd->add_flag(flag + ",!--no-" + f.key, *static_cast<bool*>(f.ptr)); break;
    }
  }
}

}  // namespace covgen
