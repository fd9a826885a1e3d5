#include "covgen/model.hpp"

#include <algorithm>
#include <stdexcept>

#include "covgen/util.hpp"

namespace covgen {

std::vector<ParamSpec> param_specs(const ModelConfig& c) {
  const size_t h = c.hidden_dim, e = c.emb_dim, v = c.vocab_size;
  const size_t h2 = 2 * h, h4 = 4 * h;
  std::vector<ParamSpec> specs = {
      {"embedding", {v, e}, false},
      {"enc_fw.wx", {e, h4}, false},
      {"enc_fw.wh", {h, h4}, false},
      {"enc_fw.b", {h4}, true},
      {"enc_bw.wx", {e, h4}, false},
      {"enc_bw.wh", {h, h4}, false},
      {"enc_bw.b", {h4}, true},
      {"reduce_c.w", {h2, h}, false},
      {"reduce_c.b", {h}, true},
      {"reduce_h.w", {h2, h}, false},
      {"reduce_h.b", {h}, true},
      {"input_feed.w", {e + h2, e}, false},
      {"input_feed.b", {e}, true},
      {"dec.wx", {e, h4}, false},
      {"dec.wh", {h, h4}, false},
      {"dec.b", {h4}, true},
      {"attn.w_h", {h2, h2}, false},
      {"attn.w_s", {h2, h2}, false},
      {"attn.b", {h2}, true},
      {"attn.v", {h2}, false},
      {"out.w1", {3 * h, h}, false},
      {"out.b1", {h}, true},
      {"out.w2", {h, v}, false},
      {"out.b2", {v}, true},
  };
  if (c.use_pointer) {
    specs.push_back({"ptr.w_hstar", {h2}, false});
    specs.push_back({"ptr.w_s", {h2}, false});
    specs.push_back({"ptr.w_x", {e}, false});
    specs.push_back({"ptr.b", {1}, true});
  }
  if (c.use_coverage) {
    specs.push_back({"cov.w_c", {h2}, true});
  }
  return specs;
}

ParamCountReport count_params(const ModelConfig& config) {
  ParamCountReport report;
  for (const auto& spec : param_specs(config)) {
    const size_t n = shape_size(spec.shape);
    report.groups.emplace_back(spec.name, n);
    report.total += n;
  }
  return report;
}

std::vector<std::pair<std::string, Tensor*>> ModelParams::groups() {
  std::vector<std::pair<std::string, Tensor*>> g = {
      {"embedding", &embedding},
      {"enc_fw.wx", &enc_fw.wx},
      {"enc_fw.wh", &enc_fw.wh},
      {"enc_fw.b", &enc_fw.b},
      {"enc_bw.wx", &enc_bw.wx},
      {"enc_bw.wh", &enc_bw.wh},
      {"enc_bw.b", &enc_bw.b},
      {"reduce_c.w", &reduce_c_w},
      {"reduce_c.b", &reduce_c_b},
      {"reduce_h.w", &reduce_h_w},
      {"reduce_h.b", &reduce_h_b},
      {"input_feed.w", &input_feed_w},
      {"input_feed.b", &input_feed_b},
      {"dec.wx", &dec.wx},
      {"dec.wh", &dec.wh},
      {"dec.b", &dec.b},
      {"attn.w_h", &attn_wh},
      {"attn.w_s", &attn_ws},
      {"attn.b", &attn_b},
      {"attn.v", &attn_v},
      {"out.w1", &out1_w},
      {"out.b1", &out1_b},
      {"out.w2", &out2_w},
      {"out.b2", &out2_b},
  };
  if (config.use_pointer) {
    g.emplace_back("ptr.w_hstar", &ptr_wh);
    g.emplace_back("ptr.w_s", &ptr_ws);
    g.emplace_back("ptr.w_x", &ptr_wx);
    g.emplace_back("ptr.b", &ptr_b);
  }
  if (config.use_coverage) {
    g.emplace_back("cov.w_c", &cov_wc);
  }
  return g;
}

std::vector<std::pair<std::string, const Tensor*>> ModelParams::groups() const {
  auto mutable_groups = const_cast<ModelParams*>(this)->groups();
  std::vector<std::pair<std::string, const Tensor*>> g;
  g.reserve(mutable_groups.size());
  for (auto& [name, t] : mutable_groups) g.emplace_back(name, t);
  return g;
}

std::vector<Shape> ModelParams::shapes() const {
  std::vector<Shape> out;
  for (const auto& [name, t] : groups()) out.push_back(t->shape());
  return out;
}

size_t ModelParams::total_params() const {
  size_t n = 0;
  for (const auto& [name, t] : groups()) n += t->size();
  return n;
}

ModelParams init_params(const ModelConfig& config, uint64_t seed) {
  ModelParams p;
  p.config = config;
  const auto specs = param_specs(config);
  auto g = p.groups();
  if (g.size() != specs.size()) throw std::logic_error("param group/spec mismatch");
  Rng rng(seed);
  for (size_t i = 0; i < specs.size(); ++i) {
    if (g[i].first != specs[i].name) throw std::logic_error("param order mismatch");
    Tensor t(specs[i].shape);
    if (!specs[i].zero_init) {
      for (size_t k = 0; k < t.size(); ++k) t[k] = rng.uniform(-0.02, 0.02);
    }
    *g[i].second = std::move(t);
  }
  return p;
}

ModelParams params_from_values(const ModelConfig& config, const std::vector<Tensor>& values) {
  ModelParams p;
  p.config = config;
  auto g = p.groups();
  if (g.size() != values.size()) throw std::invalid_argument("params_from_values: size mismatch");
  const auto specs = param_specs(config);
  for (size_t i = 0; i < g.size(); ++i) {
    if (values[i].shape() != specs[i].shape) {
      throw std::invalid_argument("params_from_values: shape mismatch for " + specs[i].name);
    }
    *g[i].second = values[i];
  }
  return p;
}

BoundParams bind_params(Tape& tape, const ModelParams& params) {
  BoundParams bp;
  bp.p = &params;
  auto g = params.groups();
  std::vector<int> nodes(g.size());
  for (size_t i = 0; i < g.size(); ++i) {
    nodes[i] = tape.param(static_cast<int>(i), *g[i].second);
  }
  size_t i = 0;
  bp.embedding = nodes[i++];
  bp.enc_fw = {nodes[i], nodes[i + 1], nodes[i + 2]};
  i += 3;
  bp.enc_bw = {nodes[i], nodes[i + 1], nodes[i + 2]};
  i += 3;
  bp.reduce_c_w = nodes[i++];
  bp.reduce_c_b = nodes[i++];
  bp.reduce_h_w = nodes[i++];
  bp.reduce_h_b = nodes[i++];
  bp.input_feed_w = nodes[i++];
  bp.input_feed_b = nodes[i++];
  bp.dec = {nodes[i], nodes[i + 1], nodes[i + 2]};
  i += 3;
  bp.attn_wh = nodes[i++];
  bp.attn_ws = nodes[i++];
  bp.attn_b = nodes[i++];
  bp.attn_v = nodes[i++];
  bp.out1_w = nodes[i++];
  bp.out1_b = nodes[i++];
  bp.out2_w = nodes[i++];
  bp.out2_b = nodes[i++];
  if (params.config.use_pointer) {
    bp.ptr_wh = nodes[i++];
    bp.ptr_ws = nodes[i++];
    bp.ptr_wx = nodes[i++];
    bp.ptr_b = nodes[i++];
  }
  if (params.config.use_coverage) {
    bp.cov_wc = nodes[i++];
  }
  return bp;
}

int relu(Tape& tape, int x) {
  const int zeros = tape.input(Tensor(tape.value(x).shape()));
  const int neg_part = tape.min(x, zeros);
  const int minus_one = tape.input(Tensor::scalar(-1.0));
  return tape.add(x, tape.mul(minus_one, neg_part));
}

int clamp_min(Tape& tape, int x, double lo) {
  // max(x, lo) = -min(-x, -lo)
  const int minus_one = tape.input(Tensor::scalar(-1.0));
  const int neg_x = tape.mul(minus_one, x);
  const int neg_lo = tape.input(Tensor::full(tape.value(x).shape(), -lo));
  return tape.mul(minus_one, tape.min(neg_x, neg_lo));
}

StateNodes lstm_step(Tape& tape, const BoundLstm& w, int x, StateNodes prev, size_t hidden_dim) {
  const int z = tape.add(tape.add(tape.matmul(x, w.wx), tape.matmul(prev.hidden, w.wh)), w.b);
  auto slice = [&](size_t k) {
    std::vector<int> ids(hidden_dim);
    for (size_t j = 0; j < hidden_dim; ++j) ids[j] = static_cast<int>(k * hidden_dim + j);
    return tape.gather(z, std::move(ids));
  };
  const int gi = tape.sigmoid(slice(0));
  const int gf = tape.sigmoid(slice(1));
  const int gg = tape.tanh(slice(2));
  const int go = tape.sigmoid(slice(3));
  StateNodes next;
  next.cell = tape.add(tape.mul(gf, prev.cell), tape.mul(gi, gg));
  next.hidden = tape.mul(go, tape.tanh(next.cell));
  return next;
}

namespace {

int embed_row(Tape& tape, const BoundParams& bp, int word_id) {
  const size_t e = bp.p->config.emb_dim;
  return tape.reshape(tape.gather(bp.embedding, {word_id}), {e});
}

int matrix_row(Tape& tape, int matrix, size_t row, size_t cols) {
  return tape.reshape(tape.gather(matrix, {static_cast<int>(row)}), {cols});
}

}  // namespace

EncoderOutput encode(Tape& tape, const BoundParams& bp, const std::vector<int>& ids,
                     const std::vector<uint8_t>& mask) {
  const ModelConfig& c = bp.p->config;
  if (ids.size() != mask.size()) throw std::invalid_argument("encode: ids/mask length mismatch");
  size_t real = 0;
  while (real < mask.size() && mask[real]) ++real;
  for (size_t i = real; i < mask.size(); ++i) {
    if (mask[i]) throw std::invalid_argument("encode: mask must be a prefix of ones");
  }
  if (real == 0) throw std::invalid_argument("encode: all positions masked");

  std::vector<int> real_ids(ids.begin(), ids.begin() + real);
  const int emb = tape.gather(bp.embedding, real_ids);  // [real, e]

  const size_t h = c.hidden_dim;
  const int zero_state = tape.input(Tensor({h}));
  std::vector<int> fw_hidden(real), bw_hidden(real);
  StateNodes fw{zero_state, zero_state};
  for (size_t t = 0; t < real; ++t) {
    fw = lstm_step(tape, bp.enc_fw, matrix_row(tape, emb, t, c.emb_dim), fw, h);
    fw_hidden[t] = fw.hidden;
  }
  StateNodes bw{zero_state, zero_state};
  for (size_t t = real; t-- > 0;) {
    bw = lstm_step(tape, bp.enc_bw, matrix_row(tape, emb, t, c.emb_dim), bw, h);
    bw_hidden[t] = bw.hidden;
  }

  std::vector<int> rows;
  rows.reserve(ids.size());
  for (size_t t = 0; t < real; ++t) {
    rows.push_back(tape.concat({fw_hidden[t], bw_hidden[t]}, {c.attn_dim()}));
  }
  int zero_row = -1;
  for (size_t t = real; t < ids.size(); ++t) {
    if (zero_row < 0) zero_row = tape.input(Tensor({c.attn_dim()}));
    rows.push_back(zero_row);
  }

  EncoderOutput out;
  out.h = tape.concat(rows, {ids.size(), c.attn_dim()});
  out.len = ids.size();
  out.real_len = real;
  const int cells = tape.concat({fw.cell, bw.cell}, {c.attn_dim()});
  const int hiddens = tape.concat({fw.hidden, bw.hidden}, {c.attn_dim()});
  out.init_state.cell = relu(tape, tape.add(tape.matmul(cells, bp.reduce_c_w), bp.reduce_c_b));
  out.init_state.hidden = relu(tape, tape.add(tape.matmul(hiddens, bp.reduce_h_w), bp.reduce_h_b));
  return out;
}

AttentionNodes attention(Tape& tape, const BoundParams& bp, StateNodes state, int enc_h, int wh_h,
                         const std::vector<uint8_t>& enc_mask, int coverage_node) {
  const ModelConfig& c = bp.p->config;
  const size_t len = tape.value(enc_h).rows();
  if (wh_h < 0) wh_h = tape.matmul(enc_h, bp.attn_wh);

  AttentionNodes out;
  out.state_vec = tape.concat({state.cell, state.hidden}, {c.attn_dim()});
  const int dec_feat = tape.add(tape.matmul(out.state_vec, bp.attn_ws), bp.attn_b);
  int pre = tape.add(wh_h, dec_feat);  // row broadcast over source positions
  if (coverage_node >= 0) {
    if (bp.cov_wc < 0) throw std::logic_error("attention: coverage input without coverage weight");
    const int cov_col = tape.reshape(coverage_node, {len, 1});
    const int wc_row = tape.reshape(bp.cov_wc, {1, c.attn_dim()});
    pre = tape.add(pre, tape.matmul(cov_col, wc_row));
  }
  out.scores = tape.matmul(tape.tanh(pre), bp.attn_v);
  out.attn = tape.masked_softmax(out.scores, enc_mask);
  out.context = tape.matmul(out.attn, enc_h);
  return out;
}

int mix_final_dist(Tape& tape, int p_gen, int vocab_dist, int attn,
                   const std::vector<int>& ext_ids, size_t vocab_size, size_t max_oov) {
  if (ext_ids.size() != tape.value(attn).size()) {
    throw std::invalid_argument("mix_final_dist: ext_ids/attention length mismatch");
  }
  const size_t ext_size = vocab_size + max_oov;
  int gen = tape.mul(p_gen, vocab_dist);
  if (max_oov > 0) {
    const int zeros = tape.input(Tensor({max_oov}));
    gen = tape.concat({gen, zeros}, {ext_size});
  }
  const int one = tape.input(Tensor::scalar(1.0));
  const int minus_one = tape.input(Tensor::scalar(-1.0));
  const int one_minus_pgen = tape.add(one, tape.mul(minus_one, p_gen));
  const int copy = tape.scatter_add(tape.mul(one_minus_pgen, attn), ext_ids, ext_size);
  return tape.add(gen, copy);
}

StepNodes decoder_step(Tape& tape, const BoundParams& bp, int prev_word_id, int prev_context,
                       StateNodes state, int enc_h, int wh_h, const std::vector<uint8_t>& enc_mask,
                       const std::vector<int>& ext_ids, size_t max_oov, int coverage_node) {
  const ModelConfig& c = bp.p->config;
  if (prev_word_id < 0 || static_cast<size_t>(prev_word_id) >= c.vocab_size) {
    throw std::invalid_argument("decoder input must be in-vocabulary");
  }
  StepNodes out;

  const int prev_emb = embed_row(tape, bp, prev_word_id);
  const int fed = tape.concat({prev_emb, prev_context}, {c.emb_dim + c.attn_dim()});
  const int x = tape.add(tape.matmul(fed, bp.input_feed_w), bp.input_feed_b);

  out.state = lstm_step(tape, bp.dec, x, state, c.hidden_dim);
  const AttentionNodes att = attention(tape, bp, out.state, enc_h, wh_h, enc_mask, coverage_node);
  out.attn = att.attn;
  out.scores = att.scores;
  out.context = att.context;

  const int fused = tape.concat({out.state.hidden, out.context}, {3 * c.hidden_dim});
  const int out1 = tape.add(tape.matmul(fused, bp.out1_w), bp.out1_b);
  const int logits = tape.add(tape.matmul(out1, bp.out2_w), bp.out2_b);
  out.vocab_dist = tape.masked_softmax(logits, {});

  if (c.use_pointer) {
    int acc = tape.matmul(bp.ptr_wh, out.context);
    acc = tape.add(acc, tape.matmul(bp.ptr_ws, att.state_vec));
    acc = tape.add(acc, tape.matmul(bp.ptr_wx, x));
    out.p_gen = tape.sigmoid(tape.add(acc, bp.ptr_b));
    out.final_dist = mix_final_dist(tape, out.p_gen, out.vocab_dist, out.attn, ext_ids,
                                    c.vocab_size, max_oov);
  } else {
    out.final_dist = out.vocab_dist;
  }

  if (coverage_node >= 0) {
    out.covloss = tape.reduce_sum(tape.min(out.attn, coverage_node));
    out.coverage = tape.add(coverage_node, out.attn);
  }
  return out;
}

int sequence_loss_graph(Tape& tape, const BoundParams& bp, const Batch& batch, double lambda,
                        LossDiagnostics* diag) {
  const ModelConfig& c = bp.p->config;
  if (lambda < 0) throw std::invalid_argument("sequence_loss: lambda must be >= 0");
  const size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("sequence_loss: empty batch");
  const size_t max_oov = c.use_pointer ? batch.max_oov : 0;

  LossDiagnostics d;
  double pgen_sum = 0.0;
  std::vector<int> example_losses;
  const int lambda_node = tape.input(Tensor::scalar(lambda));
  const int minus_one = tape.input(Tensor::scalar(-1.0));

  for (size_t b = 0; b < n; ++b) {
    const EncoderOutput enc = encode(tape, bp, batch.enc_ids[b], batch.enc_mask[b]);
    const int wh_h = tape.matmul(enc.h, bp.attn_wh);
    std::vector<int> ext_ids(batch.enc_ext_ids[b].begin(), batch.enc_ext_ids[b].end());
    if (!c.use_pointer) ext_ids.assign(ext_ids.size(), 0);  // ignored without the mixture

    size_t steps = 0;
    while (steps < batch.dec_mask[b].size() && batch.dec_mask[b][steps]) ++steps;
    if (steps == 0) throw std::invalid_argument("sequence_loss: example with no decoder steps");

    int coverage = c.use_coverage ? tape.input(Tensor({enc.len})) : -1;
    int prev_context = tape.input(Tensor({c.attn_dim()}));
    StateNodes state = enc.init_state;
    std::vector<int> step_losses;
    step_losses.reserve(steps);

    for (size_t t = 0; t < steps; ++t) {
      const StepNodes step = decoder_step(tape, bp, batch.dec_input[b][t], prev_context, state,
                                          enc.h, wh_h, batch.enc_mask[b], ext_ids, max_oov,
                                          coverage);
      int target = batch.target[b][t];
      if (!c.use_pointer && target >= static_cast<int>(c.vocab_size)) {
        target = Vocabulary::kUnk;
      }
      const int picked = tape.gather(step.final_dist, {target});
      const int nll = tape.mul(minus_one, tape.log(clamp_min(tape, picked, kProbFloor)));
      d.nll += tape.value(nll)[0];
      int step_loss = nll;
      if (step.covloss >= 0) {
        d.covloss += tape.value(step.covloss)[0];
        step_loss = tape.add(nll, tape.mul(lambda_node, step.covloss));
      }
      if (step.p_gen >= 0) pgen_sum += tape.value(step.p_gen)[0];
      step_losses.push_back(step_loss);

      state = step.state;
      prev_context = step.context;
      if (step.coverage >= 0) coverage = step.coverage;
      ++d.steps;
    }
    const int stacked = tape.concat(step_losses, {steps});
    const int inv_steps = tape.input(Tensor::scalar(1.0 / static_cast<double>(steps)));
    example_losses.push_back(tape.mul(inv_steps, tape.reduce_sum(stacked)));
  }

  const int all = tape.concat(example_losses, {n});
  const int inv_n = tape.input(Tensor::scalar(1.0 / static_cast<double>(n)));
  const int loss = tape.mul(inv_n, tape.reduce_sum(all));

  if (diag) {
    d.loss = tape.value(loss)[0];
    d.nll /= static_cast<double>(d.steps);
    d.covloss = c.use_coverage ? d.covloss / static_cast<double>(d.steps) : 0.0;
    d.pgen_mean = c.use_pointer ? pgen_sum / static_cast<double>(d.steps) : 0.0;
    *diag = d;
  }
  return loss;
}

LossResult sequence_loss(const ModelParams& params, const Batch& batch, double lambda) {
  LossResult r;
  const BoundParams bp = bind_params(r.tape, params);
  r.loss_node = sequence_loss_graph(r.tape, bp, batch, lambda, &r.diag);
  return r;
}

}  // namespace covgen
