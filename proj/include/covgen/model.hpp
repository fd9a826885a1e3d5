#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covgen/corpus.hpp"
#include "covgen/tape.hpp"
#include "covgen/tensor.hpp"

namespace covgen {

struct ModelConfig {
  size_t hidden_dim = 256;
  size_t emb_dim = 128;
  size_t vocab_size = 50000;
  bool use_pointer = false;
  bool use_coverage = false;
  size_t max_enc = 400;
  size_t max_dec = 100;

  size_t attn_dim() const { return 2 * hidden_dim; }
};

struct ParamSpec {
  std::string name;
  Shape shape;
  bool zero_init = false;
};

// Canonical parameter order; fixes checkpoint layout, gradient ids and the
// accumulator layout. Pointer and coverage groups come last so enabling
// coverage appends rather than reshuffles.
std::vector<ParamSpec> param_specs(const ModelConfig& config);

struct ParamCountReport {
  size_t total = 0;
  std::vector<std::pair<std::string, size_t>> groups;
};

ParamCountReport count_params(const ModelConfig& config);

struct LstmWeights {
  Tensor wx;  // [in, 4h], gate order i,f,g,o
  Tensor wh;  // [h, 4h]
  Tensor b;   // [4h]
};

struct ModelParams {
  ModelConfig config;
  Tensor embedding;  // [V, e], shared by encoder and decoder inputs
  LstmWeights enc_fw, enc_bw, dec;
  Tensor reduce_c_w, reduce_c_b;  // [2h, h], [h]
  Tensor reduce_h_w, reduce_h_b;
  Tensor input_feed_w, input_feed_b;  // [e+2h, e], [e]
  Tensor attn_wh, attn_ws;            // [2h, 2h] each; attn_wh has no bias
  Tensor attn_b, attn_v;              // [2h] each
  Tensor out1_w, out1_b;              // [3h, h], [h]
  Tensor out2_w, out2_b;              // [h, V], [V]
  Tensor ptr_wh, ptr_ws, ptr_wx, ptr_b;  // [2h], [2h], [e], [1]; iff use_pointer
  Tensor cov_wc;                         // [2h]; iff use_coverage

  std::vector<std::pair<std::string, Tensor*>> groups();
  std::vector<std::pair<std::string, const Tensor*>> groups() const;
  std::vector<Shape> shapes() const;
  size_t total_params() const;
};

// Weights uniform in [-0.02, 0.02]; biases and the coverage weight zero.
// Bit-identical for equal (config, seed).
ModelParams init_params(const ModelConfig& config, uint64_t seed);

// Rebuilds a ModelParams from tensors listed in canonical order.
ModelParams params_from_values(const ModelConfig& config, const std::vector<Tensor>& values);

// Node ids of every parameter bound onto a tape.
struct BoundLstm {
  int wx = -1, wh = -1, b = -1;
};

struct BoundParams {
  const ModelParams* p = nullptr;
  int embedding = -1;
  BoundLstm enc_fw, enc_bw, dec;
  int reduce_c_w = -1, reduce_c_b = -1, reduce_h_w = -1, reduce_h_b = -1;
  int input_feed_w = -1, input_feed_b = -1;
  int attn_wh = -1, attn_ws = -1, attn_b = -1, attn_v = -1;
  int out1_w = -1, out1_b = -1, out2_w = -1, out2_b = -1;
  int ptr_wh = -1, ptr_ws = -1, ptr_wx = -1, ptr_b = -1;
  int cov_wc = -1;
};

BoundParams bind_params(Tape& tape, const ModelParams& params);

struct StateNodes {
  int cell = -1;
  int hidden = -1;
};

// x - min(x, 0)
int relu(Tape& tape, int x);
// max(x, lo) as a min composition; lo > 0 keeps log well-defined downstream
int clamp_min(Tape& tape, int x, double lo);

StateNodes lstm_step(Tape& tape, const BoundLstm& w, int x, StateNodes prev, size_t hidden_dim);

struct EncoderOutput {
  int h = -1;  // [len, 2h]; rows past the real length are zero and masked
  StateNodes init_state;
  size_t len = 0;       // rows in h (padded length)
  size_t real_len = 0;  // unmasked prefix
};

// Bidirectional encoder over the unmasked prefix; the reduction to the
// initial decoder state applies a ReLU affine to the concatenated final
// cells and hiddens of both directions.
EncoderOutput encode(Tape& tape, const BoundParams& bp, const std::vector<int>& ids,
                     const std::vector<uint8_t>& mask);

struct AttentionNodes {
  int attn = -1;     // a_t over source positions
  int scores = -1;   // e_t
  int context = -1;  // [2h]
  int state_vec = -1;  // [cell; hidden], reused by the pointer switch
};

// scores_i = v . tanh(W_h h_i + W_s [cell;hidden] + w_c c_i + b); the w_c
// term is present iff a coverage node is given. wh_h may carry the
// precomputed W_h h product ([len, 2h]); pass -1 to compute it here.
AttentionNodes attention(Tape& tape, const BoundParams& bp, StateNodes state, int enc_h, int wh_h,
                         const std::vector<uint8_t>& enc_mask, int coverage_node);

// Mixture over the extended vocabulary: p_gen * vocab_dist padded with
// max_oov zero slots, plus (1 - p_gen) * attn scatter-added at ext_ids.
// Duplicate source tokens accumulate their attention mass.
int mix_final_dist(Tape& tape, int p_gen, int vocab_dist, int attn,
                   const std::vector<int>& ext_ids, size_t vocab_size, size_t max_oov);

struct StepNodes {
  int attn = -1;
  int scores = -1;
  int context = -1;
  int p_gen = -1;      // present iff pointer mode
  int vocab_dist = -1;
  int final_dist = -1;
  int covloss = -1;    // present iff coverage node was given
  int coverage = -1;   // updated coverage (c + a_t)
  StateNodes state;
};

// One decoder timestep: input-feed, LSTM advance, attention on the updated
// state, output projection, pointer mixture and coverage bookkeeping.
// prev_word_id must be an in-vocabulary id.
StepNodes decoder_step(Tape& tape, const BoundParams& bp, int prev_word_id, int prev_context,
                       StateNodes state, int enc_h, int wh_h, const std::vector<uint8_t>& enc_mask,
                       const std::vector<int>& ext_ids, size_t max_oov, int coverage_node);

struct LossDiagnostics {
  double loss = 0.0;
  double nll = 0.0;
  double covloss = 0.0;
  double pgen_mean = 0.0;
  size_t steps = 0;
};

// Teacher-forced loss over a batch: per step -log P(target) (+ lambda *
// covloss in coverage mode), averaged over each example's real steps, then
// over examples. Probabilities are floored at 1e-12 before the log.
int sequence_loss_graph(Tape& tape, const BoundParams& bp, const Batch& batch, double lambda,
                        LossDiagnostics* diag);

struct LossResult {
  Tape tape;
  int loss_node = -1;
  LossDiagnostics diag;
};

LossResult sequence_loss(const ModelParams& params, const Batch& batch, double lambda);

constexpr double kProbFloor = 1e-12;

}  // namespace covgen
