#include "covgen/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace covgen {

Tensor masked_softmax(const Tensor& logits, const std::vector<uint8_t>& mask) {
  if (logits.rank() != 1) throw std::invalid_argument("masked_softmax: rank-1 input required");
  const size_t n = logits.size();
  if (!mask.empty() && mask.size() != n) {
    throw std::invalid_argument("masked_softmax: mask length mismatch");
  }
  auto live = [&](size_t i) { return mask.empty() || mask[i] != 0; };

  double mx = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) {
    if (!live(i)) continue;
    if (!std::isfinite(logits[i])) throw std::invalid_argument("masked_softmax: non-finite logit");
    mx = std::max(mx, logits[i]);
  }
  if (!std::isfinite(mx)) throw std::invalid_argument("empty attention support");

  Tensor out(logits.shape());
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (live(i)) {
      out[i] = std::exp(logits[i] - mx);
      sum += out[i];
    }
  }
  for (size_t i = 0; i < n; ++i) {
    if (live(i)) out[i] /= sum;
  }
  return out;
}

namespace {

Tensor matmul_value(const Tensor& a, const Tensor& b) {
  if (a.rank() == 2 && b.rank() == 2) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dims differ");
    const size_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor c({m, n});
    for (size_t i = 0; i < m; ++i) {
      for (size_t p = 0; p < k; ++p) {
        const double av = a.at(i, p);
        if (av == 0.0) continue;
        const double* brow = b.data() + p * n;
        double* crow = c.data() + i * n;
        for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
    return c;
  }
  if (a.rank() == 1 && b.rank() == 2) {
    if (a.size() != b.rows()) throw std::invalid_argument("matmul: inner dims differ");
    const size_t k = a.size(), n = b.cols();
    Tensor c({n});
    for (size_t p = 0; p < k; ++p) {
      const double av = a[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + p * n;
      for (size_t j = 0; j < n; ++j) c[j] += av * brow[j];
    }
    return c;
  }
  if (a.rank() == 2 && b.rank() == 1) {
    if (a.cols() != b.size()) throw std::invalid_argument("matmul: inner dims differ");
    const size_t m = a.rows(), k = a.cols();
    Tensor c({m});
    for (size_t i = 0; i < m; ++i) {
      double s = 0.0;
      const double* arow = a.data() + i * k;
      for (size_t p = 0; p < k; ++p) s += arow[p] * b[p];
      c[i] = s;
    }
    return c;
  }
  if (a.rank() == 1 && b.rank() == 1) {
    if (a.size() != b.size()) throw std::invalid_argument("matmul: inner dims differ");
    return Tensor::scalar(dot(a, b));
  }
  throw std::invalid_argument("matmul: unsupported ranks");
}

bool row_broadcast(const Tensor& mat, const Tensor& vec) {
  return mat.rank() == 2 && vec.rank() == 1 && mat.cols() == vec.size();
}

bool scalar_broadcast(const Tensor& s) { return s.size() == 1; }

}  // namespace

int Tape::push(TapeNode node) {
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Tensor value) {
  TapeNode n;
  n.op = Op::kInput;
  n.value = std::move(value);
  return push(std::move(n));
}

int Tape::param(int param_id, const Tensor& value) {
  if (param_id < 0) throw std::invalid_argument("param: negative id");
  TapeNode n;
  n.op = Op::kParam;
  n.value = value;
  n.param_id = param_id;
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  TapeNode n;
  n.op = Op::kMatmul;
  n.inputs = {a, b};
  n.value = matmul_value(nodes_[a].value, nodes_[b].value);
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  TapeNode n;
  n.op = Op::kAdd;
  n.inputs = {a, b};
  if (ta.same_shape(tb)) {
    Tensor out = ta;
    for (size_t i = 0; i < out.size(); ++i) out[i] += tb[i];
    n.value = std::move(out);
  } else if (row_broadcast(ta, tb)) {
    Tensor out = ta;
    const size_t cols = ta.cols();
    for (size_t r = 0; r < ta.rows(); ++r) {
      for (size_t c = 0; c < cols; ++c) out.at(r, c) += tb[c];
    }
    n.value = std::move(out);
  } else if (row_broadcast(tb, ta)) {
    Tensor out = tb;
    const size_t cols = tb.cols();
    for (size_t r = 0; r < tb.rows(); ++r) {
      for (size_t c = 0; c < cols; ++c) out.at(r, c) += ta[c];
    }
    n.value = std::move(out);
  } else {
    throw std::invalid_argument("add: incompatible shapes " + shape_str(ta.shape()) + " vs " +
                                shape_str(tb.shape()));
  }
  return push(std::move(n));
}

int Tape::mul(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  TapeNode n;
  n.op = Op::kMul;
  n.inputs = {a, b};
  if (ta.same_shape(tb)) {
    Tensor out = ta;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= tb[i];
    n.value = std::move(out);
  } else if (scalar_broadcast(ta)) {
    Tensor out = tb;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= ta[0];
    n.value = std::move(out);
  } else if (scalar_broadcast(tb)) {
    Tensor out = ta;
    for (size_t i = 0; i < out.size(); ++i) out[i] *= tb[0];
    n.value = std::move(out);
  } else {
    throw std::invalid_argument("mul: incompatible shapes " + shape_str(ta.shape()) + " vs " +
                                shape_str(tb.shape()));
  }
  return push(std::move(n));
}

int Tape::tanh(int a) {
  TapeNode n;
  n.op = Op::kTanh;
  n.inputs = {a};
  Tensor out = nodes_[a].value;
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
  n.value = std::move(out);
  return push(std::move(n));
}

int Tape::sigmoid(int a) {
  TapeNode n;
  n.op = Op::kSigmoid;
  n.inputs = {a};
  Tensor out = nodes_[a].value;
  for (size_t i = 0; i < out.size(); ++i) {
    const double x = out[i];
    if (x >= 0.0) {
      out[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      out[i] = e / (1.0 + e);
    }
  }
  n.value = std::move(out);
  return push(std::move(n));
}

int Tape::log(int a) {
  TapeNode n;
  n.op = Op::kLog;
  n.inputs = {a};
  Tensor out = nodes_[a].value;
  for (size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0)) throw std::domain_error("log: non-positive input");
    out[i] = std::log(out[i]);
  }
  n.value = std::move(out);
  return push(std::move(n));
}

int Tape::concat(const std::vector<int>& parts, Shape out_shape) {
  if (parts.empty()) throw std::invalid_argument("concat: no parts");
  TapeNode n;
  n.op = Op::kConcat;
  n.inputs = parts;
  std::vector<double> data;
  size_t total = 0;
  for (int p : parts) total += nodes_[p].value.size();
  data.reserve(total);
  for (int p : parts) {
    const Tensor& t = nodes_[p].value;
    data.insert(data.end(), t.values().begin(), t.values().end());
  }
  if (total != shape_size(out_shape)) {
    throw std::invalid_argument("concat: parts do not fill shape " + shape_str(out_shape));
  }
  n.value = Tensor(std::move(out_shape), std::move(data));
  return push(std::move(n));
}

int Tape::gather(int a, std::vector<int> ids) {
  const Tensor& t = nodes_[a].value;
  TapeNode n;
  n.op = Op::kGather;
  n.inputs = {a};
  if (t.rank() == 2) {
    const size_t cols = t.cols();
    Tensor out({ids.size(), cols});
    for (size_t r = 0; r < ids.size(); ++r) {
      const int id = ids[r];
      if (id < 0 || static_cast<size_t>(id) >= t.rows()) {
        throw std::out_of_range("gather: row index out of range");
      }
      std::copy_n(t.data() + static_cast<size_t>(id) * cols, cols, out.data() + r * cols);
    }
    n.value = std::move(out);
  } else if (t.rank() == 1) {
    Tensor out({ids.size()});
    for (size_t r = 0; r < ids.size(); ++r) {
      const int id = ids[r];
      if (id < 0 || static_cast<size_t>(id) >= t.size()) {
        throw std::out_of_range("gather: index out of range");
      }
      out[r] = t[id];
    }
    n.value = std::move(out);
  } else {
    throw std::invalid_argument("gather: rank-1 or rank-2 input required");
  }
  n.ids = std::move(ids);
  return push(std::move(n));
}

int Tape::scatter_add(int a, std::vector<int> ids, size_t out_size) {
  const Tensor& t = nodes_[a].value;
  if (t.rank() != 1) throw std::invalid_argument("scatter_add: rank-1 input required");
  if (ids.size() != t.size()) throw std::invalid_argument("scatter_add: ids length mismatch");
  TapeNode n;
  n.op = Op::kScatterAdd;
  n.inputs = {a};
  Tensor out({out_size});
  for (size_t i = 0; i < ids.size(); ++i) {
    const int id = ids[i];
    if (id < 0 || static_cast<size_t>(id) >= out_size) {
      throw std::out_of_range("scatter_add: index out of range");
    }
    out[id] += t[i];
  }
  n.value = std::move(out);
  n.ids = std::move(ids);
  return push(std::move(n));
}

int Tape::reduce_sum(int a) {
  TapeNode n;
  n.op = Op::kReduceSum;
  n.inputs = {a};
  const Tensor& t = nodes_[a].value;
  double s = 0.0;
  for (size_t i = 0; i < t.size(); ++i) s += t[i];
  n.value = Tensor::scalar(s);
  return push(std::move(n));
}

int Tape::min(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (!ta.same_shape(tb)) throw std::invalid_argument("min: shape mismatch");
  TapeNode n;
  n.op = Op::kMin;
  n.inputs = {a, b};
  Tensor out = ta;
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::min(ta[i], tb[i]);
  n.value = std::move(out);
  return push(std::move(n));
}

int Tape::masked_softmax(int a, std::vector<uint8_t> mask) {
  TapeNode n;
  n.op = Op::kMaskedSoftmax;
  n.inputs = {a};
  n.value = covgen::masked_softmax(nodes_[a].value, mask);
  n.mask = std::move(mask);
  return push(std::move(n));
}

Tensor& Tape::grad_buffer(int node) {
  TapeNode& n = nodes_[node];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Tape::backward_node(int index) {
  TapeNode& n = nodes_[index];
  const Tensor& g = n.grad;
  switch (n.op) {
    case Op::kInput:
    case Op::kParam:
      return;
    case Op::kMatmul: {
      const Tensor& a = in_value(n, 0);
      const Tensor& b = in_value(n, 1);
      Tensor& da = grad_buffer(n.inputs[0]);
      Tensor& db = grad_buffer(n.inputs[1]);
      if (a.rank() == 2 && b.rank() == 2) {
        const size_t m = a.rows(), k = a.cols(), cols = b.cols();
        for (size_t i = 0; i < m; ++i) {
          for (size_t p = 0; p < k; ++p) {
            double s = 0.0;
            const double* grow = g.data() + i * cols;
            const double* brow = b.data() + p * cols;
            for (size_t j = 0; j < cols; ++j) s += grow[j] * brow[j];
            da.at(i, p) += s;
          }
        }
        for (size_t p = 0; p < k; ++p) {
          for (size_t i = 0; i < m; ++i) {
            const double av = a.at(i, p);
            if (av == 0.0) continue;
            const double* grow = g.data() + i * cols;
            double* dbrow = db.data() + p * cols;
            for (size_t j = 0; j < cols; ++j) dbrow[j] += av * grow[j];
          }
        }
      } else if (a.rank() == 1 && b.rank() == 2) {
        const size_t k = a.size(), cols = b.cols();
        for (size_t p = 0; p < k; ++p) {
          double s = 0.0;
          const double* brow = b.data() + p * cols;
          for (size_t j = 0; j < cols; ++j) s += brow[j] * g[j];
          da[p] += s;
          double* dbrow = db.data() + p * cols;
          const double av = a[p];
          for (size_t j = 0; j < cols; ++j) dbrow[j] += av * g[j];
        }
      } else if (a.rank() == 2 && b.rank() == 1) {
        const size_t m = a.rows(), k = a.cols();
        for (size_t i = 0; i < m; ++i) {
          const double gv = g[i];
          if (gv == 0.0) continue;
          double* darow = da.data() + i * k;
          const double* arow = a.data() + i * k;
          for (size_t p = 0; p < k; ++p) {
            darow[p] += gv * b[p];
            db[p] += gv * arow[p];
          }
        }
      } else {  // dot product
        const double gv = g[0];
        for (size_t p = 0; p < a.size(); ++p) {
          da[p] += gv * b[p];
          db[p] += gv * a[p];
        }
      }
      return;
    }
    case Op::kAdd: {
      const Tensor& a = in_value(n, 0);
      const Tensor& b = in_value(n, 1);
      Tensor& da = grad_buffer(n.inputs[0]);
      Tensor& db = grad_buffer(n.inputs[1]);
      if (a.same_shape(b)) {
        for (size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i];
          db[i] += g[i];
        }
      } else if (row_broadcast(a, b)) {
        const size_t cols = a.cols();
        for (size_t r = 0; r < a.rows(); ++r) {
          const double* grow = g.data() + r * cols;
          double* darow = da.data() + r * cols;
          for (size_t c = 0; c < cols; ++c) {
            darow[c] += grow[c];
            db[c] += grow[c];
          }
        }
      } else {  // row_broadcast(b, a)
        const size_t cols = b.cols();
        for (size_t r = 0; r < b.rows(); ++r) {
          const double* grow = g.data() + r * cols;
          double* dbrow = db.data() + r * cols;
          for (size_t c = 0; c < cols; ++c) {
            dbrow[c] += grow[c];
            da[c] += grow[c];
          }
        }
      }
      return;
    }
    case Op::kMul: {
      const Tensor& a = in_value(n, 0);
      const Tensor& b = in_value(n, 1);
      Tensor& da = grad_buffer(n.inputs[0]);
      Tensor& db = grad_buffer(n.inputs[1]);
      if (a.same_shape(b)) {
        for (size_t i = 0; i < g.size(); ++i) {
          da[i] += g[i] * b[i];
          db[i] += g[i] * a[i];
        }
      } else if (scalar_broadcast(a)) {
        for (size_t i = 0; i < g.size(); ++i) {
          da[0] += g[i] * b[i];
          db[i] += g[i] * a[0];
        }
      } else {  // scalar_broadcast(b)
        for (size_t i = 0; i < g.size(); ++i) {
          db[0] += g[i] * a[i];
          da[i] += g[i] * b[0];
        }
      }
      return;
    }
    case Op::kTanh: {
      Tensor& da = grad_buffer(n.inputs[0]);
      const Tensor& y = n.value;
      for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (1.0 - y[i] * y[i]);
      return;
    }
    case Op::kSigmoid: {
      Tensor& da = grad_buffer(n.inputs[0]);
      const Tensor& y = n.value;
      for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] * y[i] * (1.0 - y[i]);
      return;
    }
    case Op::kLog: {
      Tensor& da = grad_buffer(n.inputs[0]);
      const Tensor& x = in_value(n, 0);
      for (size_t i = 0; i < g.size(); ++i) da[i] += g[i] / x[i];
      return;
    }
    case Op::kConcat: {
      size_t offset = 0;
      for (int p : n.inputs) {
        Tensor& dp = grad_buffer(p);
        for (size_t i = 0; i < dp.size(); ++i) dp[i] += g[offset + i];
        offset += dp.size();
      }
      return;
    }
    case Op::kGather: {
      Tensor& da = grad_buffer(n.inputs[0]);
      if (da.rank() == 2) {
        const size_t cols = da.cols();
        for (size_t r = 0; r < n.ids.size(); ++r) {
          double* dst = da.data() + static_cast<size_t>(n.ids[r]) * cols;
          const double* src = g.data() + r * cols;
          for (size_t c = 0; c < cols; ++c) dst[c] += src[c];
        }
      } else {
        for (size_t r = 0; r < n.ids.size(); ++r) da[n.ids[r]] += g[r];
      }
      return;
    }
    case Op::kScatterAdd: {
      Tensor& da = grad_buffer(n.inputs[0]);
      for (size_t i = 0; i < n.ids.size(); ++i) da[i] += g[n.ids[i]];
      return;
    }
    case Op::kReduceSum: {
      Tensor& da = grad_buffer(n.inputs[0]);
      const double gv = g[0];
      for (size_t i = 0; i < da.size(); ++i) da[i] += gv;
      return;
    }
    case Op::kMin: {
      const Tensor& a = in_value(n, 0);
      const Tensor& b = in_value(n, 1);
      Tensor& da = grad_buffer(n.inputs[0]);
      Tensor& db = grad_buffer(n.inputs[1]);
      for (size_t i = 0; i < g.size(); ++i) {
        if (a[i] < b[i]) {
          da[i] += g[i];
        } else if (b[i] < a[i]) {
          db[i] += g[i];
        } else {
          da[i] += 0.5 * g[i];
          db[i] += 0.5 * g[i];
        }
      }
      return;
    }
    case Op::kMaskedSoftmax: {
      Tensor& da = grad_buffer(n.inputs[0]);
      const Tensor& y = n.value;
      auto live = [&](size_t i) { return n.mask.empty() || n.mask[i] != 0; };
      double inner = 0.0;
      for (size_t i = 0; i < g.size(); ++i) {
        if (live(i)) inner += y[i] * g[i];
      }
      for (size_t i = 0; i < g.size(); ++i) {
        if (live(i)) da[i] += y[i] * (g[i] - inner);
      }
      return;
    }
  }
}

GradientSet Tape::backprop(int loss, const std::vector<Shape>& param_shapes) {
  if (loss < 0 || static_cast<size_t>(loss) >= nodes_.size()) {
    throw std::invalid_argument("backprop: bad loss node");
  }
  if (nodes_[loss].value.size() != 1) {
    throw std::invalid_argument("backprop: loss node must be scalar");
  }
  for (auto& n : nodes_) n.grad = Tensor();
  nodes_[loss].grad = Tensor::scalar(1.0);
  for (int i = loss; i >= 0; --i) {
    if (nodes_[i].grad.empty()) continue;
    backward_node(i);
  }
  GradientSet out;
  out.reserve(param_shapes.size());
  for (const Shape& s : param_shapes) out.emplace_back(s);
  for (const auto& n : nodes_) {
    if (n.op != Op::kParam || n.grad.empty()) continue;
    if (n.param_id >= static_cast<int>(out.size())) {
      throw std::invalid_argument("backprop: param id outside registered set");
    }
    Tensor& dst = out[n.param_id];
    if (!dst.same_shape(n.grad)) throw std::invalid_argument("backprop: gradient shape mismatch");
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += n.grad[i];
  }
  return out;
}

}  // namespace covgen
