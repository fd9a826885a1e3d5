#pragma once

#include <functional>
#include <vector>

#include "covgen/tape.hpp"
#include "covgen/tensor.hpp"

namespace covgen {

double global_grad_norm(const GradientSet& grads);

// Scales every tensor by max_norm / norm when the global L2 norm exceeds
// max_norm; otherwise returns the input unchanged (bit-identical).
GradientSet clip_by_global_norm(GradientSet grads, double max_norm);

// Builds the computation over the given parameter tensors and returns the
// scalar loss node. The builder must register tensors[i] via
// tape.param(i, tensors[i]) for every parameter it uses.
using TapeBuilder = std::function<int(Tape&, const std::vector<Tensor>&)>;

// max over coordinates of |analytic - central difference| /
// max(1, |analytic|, |central difference|). The analytic gradients are
// supplied, so a deliberately wrong gradient is visible to the caller.
double max_rel_error_vs_fd(const std::function<double(const std::vector<Tensor>&)>& value_fn,
                           const GradientSet& analytic, const std::vector<Tensor>& point,
                           double epsilon);

// Backprops the builder's loss at `point` and compares against central
// finite differences coordinate by coordinate. epsilon must be in (0, 1e-2].
double grad_check(const TapeBuilder& f, const std::vector<Tensor>& point, double epsilon);

}  // namespace covgen
