#include "covgen/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace covgen {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'P', 'G', 'C', 'O', 'V', 'C', 'K', '1'};

void put_u64_le(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint64_t get_u64_le(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

void put_f64_le(std::string& out, double d) {
  put_u64_le(out, std::bit_cast<uint64_t>(d));
}

double get_f64_le(const unsigned char* p) { return std::bit_cast<double>(get_u64_le(p)); }

json shape_to_json(const Shape& s) {
  json j = json::array();
  for (size_t d : s) j.push_back(d);
  return j;
}

json model_config_to_json(const ModelConfig& c) {
  return json{{"hidden_dim", c.hidden_dim}, {"emb_dim", c.emb_dim},
              {"vocab_size", c.vocab_size}, {"use_pointer", c.use_pointer},
              {"use_coverage", c.use_coverage}, {"max_enc", c.max_enc},
              {"max_dec", c.max_dec}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.hidden_dim = j.at("hidden_dim").get<size_t>();
  c.emb_dim = j.at("emb_dim").get<size_t>();
  c.vocab_size = j.at("vocab_size").get<size_t>();
  c.use_pointer = j.at("use_pointer").get<bool>();
  c.use_coverage = j.at("use_coverage").get<bool>();
  c.max_enc = j.at("max_enc").get<size_t>();
  c.max_dec = j.at("max_dec").get<size_t>();
  return c;
}

}  // namespace

AdagradState init_adagrad(const ModelParams& params, double init_accumulator) {
  AdagradState state;
  for (const auto& [name, t] : params.groups()) {
    state.acc.push_back(Tensor::full(t->shape(), init_accumulator));
  }
  return state;
}

void save_checkpoint(const std::string& path, const ModelParams& params, const AdagradState& acc,
                     const CheckpointMeta& meta) {
  const auto groups = params.groups();
  if (acc.acc.size() != groups.size()) {
    throw std::invalid_argument("save_checkpoint: accumulator/parameter layout mismatch");
  }

  json manifest;
  manifest["groups"] = json::array();
  uint64_t offset = 0;
  auto add_group = [&](const std::string& name, const Tensor& t) {
    manifest["groups"].push_back(
        json{{"name", name}, {"shape", shape_to_json(t.shape())}, {"offset", offset}});
    offset += static_cast<uint64_t>(t.size()) * 8;
  };
  for (const auto& [name, t] : groups) add_group(name, *t);
  for (size_t i = 0; i < groups.size(); ++i) add_group("adagrad/" + groups[i].first, acc.acc[i]);

  manifest["meta"] = json{{"step", meta.step},
                          {"best_valid_loss", meta.best_valid_loss},
                          {"bad_evals", meta.bad_evals},
                          {"model_config", model_config_to_json(params.config)},
                          {"config_echo", meta.config_echo}};

  std::string out;
  out.append(kMagic, sizeof(kMagic));
  const std::string mbytes = manifest.dump();
  put_u64_le(out, mbytes.size());
  out += mbytes;
  auto dump_tensor = [&](const Tensor& t) {
    for (size_t i = 0; i < t.size(); ++i) put_f64_le(out, t[i]);
  };
  for (const auto& [name, t] : groups) dump_tensor(*t);
  for (const auto& a : acc.acc) dump_tensor(a);

  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write checkpoint: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const uint64_t mlen = get_u64_le(p + 8);
  if (16 + mlen > bytes.size()) throw std::runtime_error("truncated checkpoint manifest");
  const json manifest = json::parse(bytes.substr(16, mlen));
  const json& meta = manifest.at("meta");

  LoadedCheckpoint out;
  out.meta.step = meta.at("step").get<long long>();
  out.meta.best_valid_loss = meta.at("best_valid_loss").get<double>();
  out.meta.bad_evals = meta.at("bad_evals").get<int>();
  out.meta.config_echo = meta.value("config_echo", json());
  const ModelConfig config = model_config_from_json(meta.at("model_config"));

  const auto specs = param_specs(config);
  const json& jgroups = manifest.at("groups");
  if (jgroups.size() != 2 * specs.size()) {
    throw std::runtime_error("checkpoint group count does not match config layout");
  }
  const size_t payload_start = 16 + mlen;
  auto read_group = [&](const json& jg, const std::string& want_name, const Shape& want_shape) {
    if (jg.at("name").get<std::string>() != want_name) {
      throw std::runtime_error("checkpoint group name mismatch: expected " + want_name);
    }
    Shape shape;
    for (const auto& d : jg.at("shape")) shape.push_back(d.get<size_t>());
    if (shape != want_shape) {
      throw std::runtime_error("checkpoint shape mismatch for " + want_name + ": stored " +
                               shape_str(shape) + ", config requires " + shape_str(want_shape));
    }
    const uint64_t offset = jg.at("offset").get<uint64_t>();
    const size_t count = shape_size(shape);
    if (payload_start + offset + count * 8 > bytes.size()) {
      throw std::runtime_error("truncated checkpoint payload at " + want_name);
    }
    Tensor t(shape);
    const auto* src = reinterpret_cast<const unsigned char*>(bytes.data()) + payload_start + offset;
    for (size_t i = 0; i < count; ++i) t[i] = get_f64_le(src + i * 8);
    return t;
  };

  std::vector<Tensor> values;
  for (size_t i = 0; i < specs.size(); ++i) {
    values.push_back(read_group(jgroups[i], specs[i].name, specs[i].shape));
  }
  out.params = params_from_values(config, values);
  for (size_t i = 0; i < specs.size(); ++i) {
    out.acc.acc.push_back(
        read_group(jgroups[specs.size() + i], "adagrad/" + specs[i].name, specs[i].shape));
  }
  return out;
}

LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig& expected) {
  LoadedCheckpoint ckpt = load_checkpoint(path);
  const ModelConfig& c = ckpt.params.config;
  if (c.hidden_dim != expected.hidden_dim || c.emb_dim != expected.emb_dim ||
      c.vocab_size != expected.vocab_size || c.use_pointer != expected.use_pointer ||
      c.use_coverage != expected.use_coverage) {
    throw std::runtime_error("checkpoint config does not match the active config");
  }
  return ckpt;
}

}  // namespace covgen
