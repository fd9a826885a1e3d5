#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "covgen/checkpoint.hpp"
#include "covgen/corpus.hpp"
#include "covgen/model.hpp"
#include "covgen/vocab.hpp"

namespace covgen {

// acc += g^2; theta -= lr * g / sqrt(acc). The caller clips beforehand.
void adagrad_step(ModelParams& params, const GradientSet& grads, AdagradState& state, double lr);

struct CurriculumRung {
  long long from_step = 0;
  size_t max_enc = 0;
  size_t max_dec = 0;
};

struct TrainConfig {
  double learning_rate = 0.15;
  double init_accumulator = 0.1;
  double max_grad_norm = 2.0;
  double lambda = 1.0;  // active only when the model runs with coverage
  size_t batch_size = 16;
  long long eval_every = 100;
  int patience = 5;
  uint64_t seed = 1;
  long long max_steps = 2000;
  // Optional length schedule; each rung applies from its step onward.
  // Empty means the model config's max_enc/max_dec throughout.
  std::vector<CurriculumRung> curriculum;
};

struct TrainPaths {
  std::string log_csv;          // empty disables logging
  std::string best_checkpoint;  // empty disables best-checkpoint saving
  std::string final_checkpoint; // empty disables final-state saving
};

struct TrainResult {
  long long steps = 0;
  double best_valid_loss = -1.0;  // -1 when never evaluated
  bool early_stopped = false;
  std::vector<double> losses;     // one entry per training step
  std::vector<double> covlosses;  // per step; only filled in coverage mode
};

// Training loop: forward -> backprop -> global-norm clip -> adagrad update,
// evaluating validation loss every eval_every steps and stopping after
// `patience` non-improving evaluations. Batch order is a pure function of
// (seed, step), so resuming from a saved state replays the same trajectory.
// Validation always encodes at the model config's max_enc/max_dec; the
// curriculum applies to training batches only. Validation loss is the same
// composite objective the phase optimizes.
TrainResult train(ModelParams& params, AdagradState& acc, const Vocabulary& vocab,
                  const std::vector<Document>& train_docs, const std::vector<Document>& valid_docs,
                  const TrainConfig& cfg, const TrainPaths& paths,
                  const CheckpointMeta& resume = {});

double validation_loss(const ModelParams& params, const std::vector<Example>& examples,
                       size_t batch_size, double lambda);

// Pointer-mode state -> coverage-mode state: appends a zero coverage weight
// (first forward pass reproduces pre-coverage attention exactly) and a fresh
// accumulator for it; everything else is carried over. Step/patience counters
// reset: the coverage phase is a fresh run over the carried state.
LoadedCheckpoint enable_coverage(const LoadedCheckpoint& src, double init_accumulator);

}  // namespace covgen
