#pragma once

#include <string>

#include <json.hpp>

#include "covgen/model.hpp"

namespace covgen {

// Per-parameter squared-gradient accumulators, aligned with the model's
// canonical parameter order.
struct AdagradState {
  std::vector<Tensor> acc;
};

AdagradState init_adagrad(const ModelParams& params, double init_accumulator);

struct CheckpointMeta {
  long long step = 0;
  double best_valid_loss = -1.0;  // -1 means no evaluation has happened yet
  int bad_evals = 0;
  nlohmann::json config_echo;  // resolved run config, free-form
};

// File layout: 8-byte magic "PGCOVCK1", little-endian u64 manifest byte
// length, UTF-8 JSON manifest, then the raw payload: every group as
// little-endian IEEE-754 binary64, concatenated in manifest order
// (parameters first, then "adagrad/<name>" accumulators).
void save_checkpoint(const std::string& path, const ModelParams& params, const AdagradState& acc,
                     const CheckpointMeta& meta);

struct LoadedCheckpoint {
  ModelParams params;
  AdagradState acc;
  CheckpointMeta meta;
};

// Rebuilds the model config from the manifest and rejects manifests whose
// group names or shapes disagree with that config's parameter layout.
LoadedCheckpoint load_checkpoint(const std::string& path);

// Same, but additionally requires the stored model config to equal
// `expected`.
LoadedCheckpoint load_checkpoint(const std::string& path, const ModelConfig& expected);

}  // namespace covgen
