#include "covgen/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "covgen/grad.hpp"

namespace covgen {

void adagrad_step(ModelParams& params, const GradientSet& grads, AdagradState& state, double lr) {
  auto groups = params.groups();
  if (grads.size() != groups.size() || state.acc.size() != groups.size()) {
    throw std::invalid_argument("adagrad_step: layout mismatch");
  }
  for (size_t i = 0; i < groups.size(); ++i) {
    Tensor& theta = *groups[i].second;
    const Tensor& g = grads[i];
    Tensor& acc = state.acc[i];
    if (!theta.same_shape(g) || !theta.same_shape(acc)) {
      throw std::invalid_argument("adagrad_step: shape mismatch at " + groups[i].first);
    }
    for (size_t k = 0; k < theta.size(); ++k) {
      const double gv = g[k];
      acc[k] += gv * gv;
      theta[k] -= lr * gv / std::sqrt(acc[k]);
    }
  }
}

double validation_loss(const ModelParams& params, const std::vector<Example>& examples,
                       size_t batch_size, double lambda) {
  if (examples.empty()) throw std::invalid_argument("validation_loss: empty corpus");
  double weighted = 0.0;
  for (const Batch& b : make_batches(examples, batch_size, /*shuffle_seed=*/0)) {
    LossResult r = sequence_loss(params, b, lambda);
    weighted += r.diag.loss * static_cast<double>(b.size());
  }
  return weighted / static_cast<double>(examples.size());
}

namespace {

struct Csv {
  std::ofstream out;
  explicit Csv(const std::string& path) {
    if (path.empty()) return;
    out.open(path);
    if (!out) throw std::runtime_error("cannot write training log: " + path);
    out << "step,loss,nll,covloss,grad_norm,pgen_mean\n";
  }
  void row(long long step, const LossDiagnostics& d, double grad_norm, bool coverage,
           bool pointer) {
    if (!out.is_open()) return;
    out << step << "," << d.loss << "," << d.nll << ",";
    if (coverage) out << d.covloss;
    out << "," << grad_norm << ",";
    if (pointer) out << d.pgen_mean;
    out << "\n";
  }
};

std::vector<Example> encode_corpus(const std::vector<Document>& docs, const Vocabulary& vocab,
                                   size_t max_enc, size_t max_dec) {
  std::vector<Example> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(encode_document(d, vocab, max_enc, max_dec));
  return out;
}

}  // namespace

TrainResult train(ModelParams& params, AdagradState& acc, const Vocabulary& vocab,
                  const std::vector<Document>& train_docs, const std::vector<Document>& valid_docs,
                  const TrainConfig& cfg, const TrainPaths& paths, const CheckpointMeta& resume) {
  if (train_docs.empty() || valid_docs.empty()) {
    throw std::invalid_argument("train: corpora must be non-empty");
  }
  if (cfg.patience < 1) throw std::invalid_argument("train: patience must be >= 1");
  const ModelConfig& mc = params.config;

  auto rung_at = [&](long long step) {
    CurriculumRung r{0, mc.max_enc, mc.max_dec};
    for (const auto& rung : cfg.curriculum) {
      if (rung.from_step <= step) r = rung;
    }
    return r;
  };

  const std::vector<Example> valid_examples =
      encode_corpus(valid_docs, vocab, mc.max_enc, mc.max_dec);

  TrainResult result;
  result.best_valid_loss = resume.best_valid_loss;
  int bad_evals = resume.bad_evals;
  Csv log(paths.log_csv);

  CurriculumRung active{-1, 0, 0};
  std::vector<Example> train_examples;
  std::vector<Batch> epoch_batches;
  long long cached_epoch = -1;
  long long batches_per_epoch = 0;

  const double lambda = mc.use_coverage ? cfg.lambda : 0.0;
  const std::vector<Shape> shapes = params.shapes();
  long long step = resume.step;

  for (; step < resume.step + cfg.max_steps; ) {
    ++step;
    const CurriculumRung rung = rung_at(step);
    if (rung.max_enc != active.max_enc || rung.max_dec != active.max_dec) {
      active = rung;
      train_examples = encode_corpus(train_docs, vocab, active.max_enc, active.max_dec);
      batches_per_epoch =
          static_cast<long long>((train_examples.size() + cfg.batch_size - 1) / cfg.batch_size);
      cached_epoch = -1;
    }
    const long long epoch = (step - 1) / batches_per_epoch;
    const long long offset = (step - 1) % batches_per_epoch;
    if (epoch != cached_epoch) {
      epoch_batches = make_batches(train_examples, cfg.batch_size,
                                   cfg.seed + static_cast<uint64_t>(epoch));
      cached_epoch = epoch;
    }
    const Batch& batch = epoch_batches[offset];

    std::ostringstream where;
    where << "step " << step << " (batch " << offset << " of epoch " << epoch << ")";
    LossResult fw;
    try {
      fw = sequence_loss(params, batch, lambda);
    } catch (const std::exception& e) {
      throw std::runtime_error("forward pass failed at " + where.str() + ": " + e.what());
    }
    if (!std::isfinite(fw.diag.loss)) {
      throw std::runtime_error("non-finite loss at " + where.str());
    }
    GradientSet grads = fw.tape.backprop(fw.loss_node, shapes);
    const double grad_norm = global_grad_norm(grads);
    grads = clip_by_global_norm(std::move(grads), cfg.max_grad_norm);
    adagrad_step(params, grads, acc, cfg.learning_rate);

    result.losses.push_back(fw.diag.loss);
    if (mc.use_coverage) result.covlosses.push_back(fw.diag.covloss);
    log.row(step, fw.diag, grad_norm, mc.use_coverage, mc.use_pointer);

    if (cfg.eval_every > 0 && step % cfg.eval_every == 0) {
      const double vloss = validation_loss(params, valid_examples, cfg.batch_size, lambda);
      const bool improved = result.best_valid_loss < 0.0 || vloss < result.best_valid_loss;
      if (improved) {
        result.best_valid_loss = vloss;
        bad_evals = 0;
        if (!paths.best_checkpoint.empty()) {
          CheckpointMeta meta = resume;
          meta.step = step;
          meta.best_valid_loss = vloss;
          meta.bad_evals = 0;
          save_checkpoint(paths.best_checkpoint, params, acc, meta);
        }
      } else {
        ++bad_evals;
        if (bad_evals >= cfg.patience) {
          result.early_stopped = true;
          break;
        }
      }
    }
  }

  result.steps = step - resume.step;
  if (!paths.final_checkpoint.empty()) {
    CheckpointMeta meta = resume;
    meta.step = step;
    meta.best_valid_loss = result.best_valid_loss;
    meta.bad_evals = bad_evals;
    save_checkpoint(paths.final_checkpoint, params, acc, meta);
  }
  return result;
}

LoadedCheckpoint enable_coverage(const LoadedCheckpoint& src, double init_accumulator) {
  if (src.params.config.use_coverage) {
    throw std::invalid_argument("checkpoint already in coverage mode");
  }
  if (!src.params.config.use_pointer) {
    throw std::invalid_argument("enable_coverage requires a pointer-mode checkpoint");
  }
  LoadedCheckpoint out;
  ModelConfig config = src.params.config;
  config.use_coverage = true;

  std::vector<Tensor> values;
  for (const auto& [name, t] : src.params.groups()) values.push_back(*t);
  values.push_back(Tensor({config.attn_dim()}));  // w_c = 0: attention is unchanged
  out.params = params_from_values(config, values);

  out.acc = src.acc;
  out.acc.acc.push_back(Tensor::full({config.attn_dim()}, init_accumulator));

  out.meta = src.meta;
  out.meta.step = 0;
  out.meta.best_valid_loss = -1.0;
  out.meta.bad_evals = 0;
  return out;
}

}  // namespace covgen
