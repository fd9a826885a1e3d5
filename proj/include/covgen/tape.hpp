#pragma once

#include <cstdint>
#include <vector>

#include "covgen/tensor.hpp"

namespace covgen {

// Gradients keyed by parameter id (position in the model's canonical
// parameter order). Entries for parameters the tape never touched are zero
// tensors of the registered shape.
using GradientSet = std::vector<Tensor>;

// Stabilized softmax over the entries where mask is nonzero; masked-out
// entries are exactly 0. An empty mask means "all positions live".
// Throws "empty attention support" when every entry is masked out.
Tensor masked_softmax(const Tensor& logits, const std::vector<uint8_t>& mask);

enum class Op : uint8_t {
  kInput,
  kParam,
  kMatmul,
  kAdd,
  kMul,
  kTanh,
  kSigmoid,
  kLog,
  kConcat,
  kGather,
  kScatterAdd,
  kReduceSum,
  kMin,
  kMaskedSoftmax,
};

struct TapeNode {
  Op op;
  Tensor value;
  Tensor grad;  // allocated lazily during backward
  std::vector<int> inputs;
  std::vector<int> ids;       // gather / scatter indices
  std::vector<uint8_t> mask;  // masked_softmax support
  int param_id = -1;
};

// Eagerly-evaluated computation record. Nodes refer to earlier nodes only,
// so one reverse sweep from the loss visits each node exactly once and the
// evaluation order is fixed (replays are bit-identical).
//
// The differentiable primitive set is: matmul, add, mul, tanh, sigmoid,
// concat, gather, scatter_add, reduce_sum, min, masked_softmax, log.
// Everything the model computes is composed from these (relu and clamp-from-
// below are min compositions; reshape is a single-part concat).
class Tape {
 public:
  // Leaf that never receives gradients (constants, activations carried in
  // from another tape).
  int input(Tensor value);

  // Leaf registered under a parameter id; backprop accumulates into it.
  int param(int param_id, const Tensor& value);

  // matmul supports [m,k]x[k,n], [k]x[k,n] (row vector), [m,k]x[k] (column
  // vector) and [k]x[k] (dot product, scalar result).
  int matmul(int a, int b);

  // Same-shape elementwise add, or matrix + row-vector broadcast (either
  // argument order).
  int add(int a, int b);

  // Same-shape elementwise multiply, or scalar * tensor broadcast (either
  // argument order).
  int mul(int a, int b);

  int tanh(int a);
  int sigmoid(int a);
  int log(int a);  // input must be strictly positive

  // Concatenates the parts' data in order; out_shape fixes the result shape
  // (total size must match). With a single part this is a reshape.
  int concat(const std::vector<int>& parts, Shape out_shape);
  int reshape(int a, Shape out_shape) { return concat({a}, std::move(out_shape)); }

  // rank-2 input: gathers rows; rank-1 input: gathers elements.
  int gather(int a, std::vector<int> ids);

  // out[ids[i]] += a[i]; a rank-1, result rank-1 of length out_size.
  int scatter_add(int a, std::vector<int> ids, size_t out_size);

  int reduce_sum(int a);  // sum of all elements, scalar result
  int min(int a, int b);  // elementwise; ties split the gradient 50/50
  int masked_softmax(int a, std::vector<uint8_t> mask);

  const Tensor& value(int node) const { return nodes_[node].value; }
  size_t size() const { return nodes_.size(); }

  // Gradients of the scalar loss node with respect to every registered
  // parameter. param_shapes spans the full parameter set so untouched
  // parameters come back as zero tensors.
  GradientSet backprop(int loss, const std::vector<Shape>& param_shapes);

 private:
  int push(TapeNode node);
  const Tensor& in_value(const TapeNode& n, size_t i) const { return nodes_[n.inputs[i]].value; }
  Tensor& grad_buffer(int node);
  void backward_node(int index);

  std::vector<TapeNode> nodes_;
};

}  // namespace covgen
