#include "covgen/grad.hpp"

#include <cmath>
#include <stdexcept>

namespace covgen {

double global_grad_norm(const GradientSet& grads) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    if (!g.empty()) sq += l2_norm_squared(g);
  }
  return std::sqrt(sq);
}

GradientSet clip_by_global_norm(GradientSet grads, double max_norm) {
  if (!(max_norm > 0.0)) throw std::invalid_argument("clip_by_global_norm: max_norm must be > 0");
  const double norm = global_grad_norm(grads);
  if (norm <= max_norm) return grads;
  const double scale = max_norm / norm;
  for (Tensor& g : grads) {
    for (size_t i = 0; i < g.size(); ++i) g[i] *= scale;
  }
  return grads;
}

double max_rel_error_vs_fd(const std::function<double(const std::vector<Tensor>&)>& value_fn,
                           const GradientSet& analytic, const std::vector<Tensor>& point,
                           double epsilon) {
  if (analytic.size() != point.size()) {
    throw std::invalid_argument("max_rel_error_vs_fd: gradient/point size mismatch");
  }
  std::vector<Tensor> work = point;
  double max_err = 0.0;
  for (size_t t = 0; t < work.size(); ++t) {
    for (size_t i = 0; i < work[t].size(); ++i) {
      const double orig = work[t][i];
      work[t][i] = orig + epsilon;
      const double fp = value_fn(work);
      work[t][i] = orig - epsilon;
      const double fm = value_fn(work);
      work[t][i] = orig;
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw std::runtime_error("grad_check: non-finite value at perturbed point");
      }
      const double fd = (fp - fm) / (2.0 * epsilon);
      const double an = analytic[t][i];
      const double err = std::fabs(an - fd) / std::max({1.0, std::fabs(an), std::fabs(fd)});
      max_err = std::max(max_err, err);
    }
  }
  return max_err;
}

double grad_check(const TapeBuilder& f, const std::vector<Tensor>& point, double epsilon) {
  if (!(epsilon > 0.0) || epsilon > 1e-2) {
    throw std::invalid_argument("grad_check: epsilon must be in (0, 1e-2]");
  }
  Tape tape;
  const int loss = f(tape, point);
  std::vector<Shape> shapes;
  shapes.reserve(point.size());
  for (const Tensor& t : point) shapes.push_back(t.shape());
  const GradientSet analytic = tape.backprop(loss, shapes);

  auto value_fn = [&](const std::vector<Tensor>& p) {
    Tape fwd;
    const int node = f(fwd, p);
    return fwd.value(node)[0];
  };
  return max_rel_error_vs_fd(value_fn, analytic, point, epsilon);
}

}  // namespace covgen
