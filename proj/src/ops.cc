#include "survey/ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "survey/errors.h"

namespace survey::nn {
namespace {

using detail::Node;
using Backward = std::function<void(Node&)>;

void check_finite(const char* op, const std::vector<double>& values) {
  if (!finite_checks_enabled()) return;
  for (const double v : values) {
    if (!std::isfinite(v)) {
      throw NumericError(std::string("non-finite value produced by ") + op);
    }
  }
}

Tensor make_op(const char* op, Shape shape, std::vector<double> values,
               std::initializer_list<Tensor> inputs, Backward backward) {
  check_finite(op, values);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  node->op = op;
  if (grad_mode_enabled()) {
    for (const Tensor& in : inputs) node->requires_grad |= in.requires_grad();
  }
  if (node->requires_grad) {
    for (const Tensor& in : inputs) node->inputs.push_back(in.node());
    node->backward = std::move(backward);
  }
  return Tensor::from_node(std::move(node));
}

// Input i's grad buffer, or nullptr when it does not need one.
std::vector<double>* grad_of(Node& self, std::size_t i) {
  Node& in = *self.inputs[i];
  return in.requires_grad ? &in.grad_buffer() : nullptr;
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " +
                       shape_string(a.shape()) + " and " + shape_string(b.shape()));
}

void require_rank2(const char* op, const Tensor& a) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         shape_string(a.shape()));
  }
}

// b broadcasts over a when b's shape equals a trailing segment of a's shape.
bool broadcastable(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sb.size() > sa.size()) return false;
  return std::equal(sb.begin(), sb.end(), sa.end() - static_cast<std::ptrdiff_t>(sb.size()));
}

// Splits `shape` around `axis` into (outer, length, inner) extents.
struct AxisView {
  std::size_t outer = 1;
  std::size_t length = 1;
  std::size_t inner = 1;
};

AxisView axis_view(const char* op, const Shape& shape, std::size_t axis) {
  if (axis >= shape.size()) {
    throw DimensionError(std::string(op) + ": axis " + std::to_string(axis) +
                         " out of range for " + shape_string(shape));
  }
  AxisView v;
  for (std::size_t i = 0; i < axis; ++i) v.outer *= shape[i];
  v.length = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) v.inner *= shape[i];
  return v;
}

// c[m x n] += a[m x k] * b[k x n]
void gemm_nn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// c[m x k] += a[m x n] * b[k x n]^T, via an explicit transpose of b so the
// inner loop runs over contiguous memory.
void gemm_nt(const double* a, const double* b, double* c, std::size_t m,
             std::size_t n, std::size_t k) {
  std::vector<double> bt(n * k);
  for (std::size_t p = 0; p < k; ++p) {
    for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
  }
  gemm_nn(a, bt.data(), c, m, n, k);
}

// c[k x n] += a[m x k]^T * b[m x n]
void gemm_tn(const double* a, const double* b, double* c, std::size_t m,
             std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2("matmul", a);
  require_rank2("matmul", b);
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) mismatch("matmul", a, b);
  std::vector<double> out(m * n, 0.0);
  gemm_nn(a.values().data(), b.values().data(), out.data(), m, k, n);
  return make_op("matmul", {m, n}, std::move(out), {a, b}, [m, k, n](Node& self) {
    const Node& na = *self.inputs[0];
    const Node& nb = *self.inputs[1];
    if (auto* ga = grad_of(self, 0)) {
      gemm_nt(self.grad.data(), nb.values.data(), ga->data(), m, n, k);
    }
    if (auto* gb = grad_of(self, 1)) {
      gemm_tn(na.values.data(), self.grad.data(), gb->data(), m, k, n);
    }
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (!broadcastable(a, b)) mismatch("add", a, b);
  const std::size_t nb = b.size();
  std::vector<double> out(a.values().begin(), a.values().end());
  const auto bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i % nb];
  return make_op("add", a.shape(), std::move(out), {a, b}, [nb](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
    }
    if (auto* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*gb)[i % nb] += self.grad[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) { return add(a, scale(b, -1.0)); }

Tensor mul(const Tensor& a, const Tensor& b) {
  if (!broadcastable(a, b)) mismatch("mul", a, b);
  const std::size_t nb = b.size();
  const auto av = a.values();
  const auto bv = b.values();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i % nb];
  return make_op("mul", a.shape(), std::move(out), {a, b}, [nb](Node& self) {
    const auto& av = self.inputs[0]->values;
    const auto& bv = self.inputs[1]->values;
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        (*ga)[i] += self.grad[i] * bv[i % nb];
      }
    }
    if (auto* gb = grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) {
        (*gb)[i % nb] += self.grad[i] * av[i];
      }
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  std::vector<double> out(a.values().begin(), a.values().end());
  for (double& v : out) v *= factor;
  return make_op("scale", a.shape(), std::move(out), {a}, [factor](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += factor * self.grad[i];
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2("transpose", a);
  const std::size_t m = a.dim(0), n = a.dim(1);
  const auto av = a.values();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = av[i * n + j];
  }
  return make_op("transpose", {n, m}, std::move(out), {a}, [m, n](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) (*ga)[i * n + j] += self.grad[j * m + i];
      }
    }
  });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                         shape_string(shape));
  }
  std::vector<double> out(a.values().begin(), a.values().end());
  return make_op("reshape", std::move(shape), std::move(out), {a}, [](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i];
    }
  });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const AxisView v = axis_view("slice", a.shape(), axis);
  if (begin > end || end > v.length) {
    throw DimensionError("slice: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for axis " +
                         std::to_string(axis) + " of " + shape_string(a.shape()));
  }
  const std::size_t len = end - begin;
  Shape shape = a.shape();
  shape[axis] = len;
  const auto av = a.values();
  std::vector<double> out;
  out.reserve(v.outer * len * v.inner);
  for (std::size_t o = 0; o < v.outer; ++o) {
    const double* src = av.data() + (o * v.length + begin) * v.inner;
    out.insert(out.end(), src, src + len * v.inner);
  }
  return make_op("slice", std::move(shape), std::move(out), {a},
                 [v, begin, len](Node& self) {
                   if (auto* ga = grad_of(self, 0)) {
                     const std::size_t block = len * v.inner;
                     for (std::size_t o = 0; o < v.outer; ++o) {
                       double* dst = ga->data() + (o * v.length + begin) * v.inner;
                       const double* src = self.grad.data() + o * block;
                       for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
                     }
                   }
                 });
}

Tensor concat(std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts[0].shape();
  const AxisView v0 = axis_view("concat", first, axis);
  std::vector<std::size_t> lengths;
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    const Shape& s = p.shape();
    bool ok = s.size() == first.size();
    for (std::size_t i = 0; ok && i < s.size(); ++i) {
      if (i != axis && s[i] != first[i]) ok = false;
    }
    if (!ok) mismatch("concat", parts[0], p);
    lengths.push_back(s[axis]);
    total += s[axis];
  }
  Shape shape = first;
  shape[axis] = total;
  std::vector<double> out;
  out.reserve(v0.outer * total * v0.inner);
  for (std::size_t o = 0; o < v0.outer; ++o) {
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const std::size_t block = lengths[k] * v0.inner;
      const double* src = parts[k].values().data() + o * block;
      out.insert(out.end(), src, src + block);
    }
  }
  check_finite("concat", out);
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->values = std::move(out);
  node->op = "concat";
  if (grad_mode_enabled()) {
    for (const Tensor& p : parts) node->requires_grad |= p.requires_grad();
  }
  if (node->requires_grad) {
    for (const Tensor& p : parts) node->inputs.push_back(p.node());
    const std::size_t inner = v0.inner, outer = v0.outer;
    node->backward = [lengths, inner, outer, total](Node& self) {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < lengths.size(); ++k) {
        const std::size_t block = lengths[k] * inner;
        if (auto* g = grad_of(self, k)) {
          for (std::size_t o = 0; o < outer; ++o) {
            const double* src = self.grad.data() + o * total * inner + offset;
            double* dst = g->data() + o * block;
            for (std::size_t i = 0; i < block; ++i) dst[i] += src[i];
          }
        }
        offset += block;
      }
    };
  }
  return Tensor::from_node(std::move(node));
}

Tensor sum(const Tensor& a) {
  double total = 0.0;
  for (const double v : a.values()) total += v;
  return make_op("sum", {}, {total}, {a}, [](Node& self) {
    if (auto* ga = grad_of(self, 0)) {
      for (double& g : *ga) g += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw DimensionError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor softmax(const Tensor& x, std::size_t axis) {
  const AxisView v = axis_view("softmax", x.shape(), axis);
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t o = 0; o < v.outer; ++o) {
    for (std::size_t in = 0; in < v.inner; ++in) {
      const std::size_t base = o * v.length * v.inner + in;
      double mx = -INFINITY;
      for (std::size_t k = 0; k < v.length; ++k) mx = std::max(mx, xv[base + k * v.inner]);
      double denom = 0.0;
      for (std::size_t k = 0; k < v.length; ++k) {
        const double e = std::exp(xv[base + k * v.inner] - mx);
        out[base + k * v.inner] = e;
        denom += e;
      }
      for (std::size_t k = 0; k < v.length; ++k) out[base + k * v.inner] /= denom;
    }
  }
  return make_op("softmax", x.shape(), std::move(out), {x}, [v](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& y = self.values;
    const auto& dy = self.grad;
    for (std::size_t o = 0; o < v.outer; ++o) {
      for (std::size_t in = 0; in < v.inner; ++in) {
        const std::size_t base = o * v.length * v.inner + in;
        double dot = 0.0;
        for (std::size_t k = 0; k < v.length; ++k) {
          const std::size_t i = base + k * v.inner;
          dot += dy[i] * y[i];
        }
        for (std::size_t k = 0; k < v.length; ++k) {
          const std::size_t i = base + k * v.inner;
          (*gx)[i] += y[i] * (dy[i] - dot);
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  if (x.rank() == 0) throw DimensionError("layer_norm needs at least one axis");
  const std::size_t d = x.shape().back();
  if (gamma.size() != d || beta.size() != d || gamma.rank() != 1 || beta.rank() != 1) {
    mismatch("layer_norm", x, gamma.size() != d ? gamma : beta);
  }
  const std::size_t rows = x.size() / d;
  const auto xv = x.values();
  const auto gv = gamma.values();
  const auto bv = beta.values();
  std::vector<double> out(xv.size());
  std::vector<double> xhat(xv.size());
  std::vector<double> rstd(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = xv.data() + r * d;
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(d);
    rstd[r] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (row[j] - mu) * rstd[r];
      xhat[r * d + j] = h;
      out[r * d + j] = h * gv[j] + bv[j];
    }
  }
  return make_op(
      "layer_norm", x.shape(), std::move(out), {x, gamma, beta},
      [d, rows, xhat = std::move(xhat), rstd = std::move(rstd)](Node& self) {
        const auto& gv = self.inputs[1]->values;
        const auto& dy = self.grad;
        if (auto* gx = grad_of(self, 0)) {
          for (std::size_t r = 0; r < rows; ++r) {
            double mean_dh = 0.0;
            double mean_dh_h = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              const double dh = dy[r * d + j] * gv[j];
              mean_dh += dh;
              mean_dh_h += dh * xhat[r * d + j];
            }
            mean_dh /= static_cast<double>(d);
            mean_dh_h /= static_cast<double>(d);
            for (std::size_t j = 0; j < d; ++j) {
              const double dh = dy[r * d + j] * gv[j];
              (*gx)[r * d + j] += rstd[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h);
            }
          }
        }
        if (auto* gg = grad_of(self, 1)) {
          for (std::size_t i = 0; i < dy.size(); ++i) (*gg)[i % d] += dy[i] * xhat[i];
        }
        if (auto* gb = grad_of(self, 2)) {
          for (std::size_t i = 0; i < dy.size(); ++i) (*gb)[i % d] += dy[i];
        }
      });
}

Tensor gelu(const Tensor& x) {
  const auto xv = x.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double v = xv[i];
    out[i] = 0.5 * v * (1.0 + std::tanh(kGeluScale * (v + kGeluCubic * v * v * v)));
  }
  return make_op("gelu", x.shape(), std::move(out), {x}, [](Node& self) {
    auto* gx = grad_of(self, 0);
    if (!gx) return;
    const auto& xv = self.inputs[0]->values;
    for (std::size_t i = 0; i < xv.size(); ++i) {
      const double v = xv[i];
      const double t = std::tanh(kGeluScale * (v + kGeluCubic * v * v * v));
      const double dt = (1.0 - t * t) * kGeluScale * (1.0 + 3.0 * kGeluCubic * v * v);
      (*gx)[i] += self.grad[i] * (0.5 * (1.0 + t) + 0.5 * v * dt);
    }
  });
}

Tensor tanh(const Tensor& x) {
  std::vector<double> out(x.values().begin(), x.values().end());
  for (double& v : out) v = std::tanh(v);
  return make_op("tanh", x.shape(), std::move(out), {x}, [](Node& self) {
    if (auto* gx = grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.values.size(); ++i) {
        const double y = self.values[i];
        (*gx)[i] += self.grad[i] * (1.0 - y * y);
      }
    }
  });
}

Tensor cross_entropy(const Tensor& logits, std::span<const int> labels) {
  require_rank2("cross_entropy", logits);
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  if (labels.size() != batch) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) +
                         " labels for logits " + shape_string(logits.shape()));
  }
  for (const int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw IndexError("cross_entropy: label " + std::to_string(label) + " outside [0, " +
                       std::to_string(classes) + ")");
    }
  }
  const auto lv = logits.values();
  std::vector<double> probs(lv.size());
  double loss = 0.0;
  for (std::size_t r = 0; r < batch; ++r) {
    const double* row = lv.data() + r * classes;
    const double mx = *std::max_element(row, row + classes);
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - mx);
    const double log_denom = std::log(denom);
    for (std::size_t c = 0; c < classes; ++c) {
      probs[r * classes + c] = std::exp(row[c] - mx - log_denom);
    }
    loss -= row[labels[r]] - mx - log_denom;
  }
  loss /= static_cast<double>(batch);
  std::vector<int> targets(labels.begin(), labels.end());
  return make_op("cross_entropy", {}, {loss}, {logits},
                 [batch, classes, probs = std::move(probs),
                  targets = std::move(targets)](Node& self) {
                   auto* gl = grad_of(self, 0);
                   if (!gl) return;
                   const double g = self.grad[0] / static_cast<double>(batch);
                   for (std::size_t r = 0; r < batch; ++r) {
                     for (std::size_t c = 0; c < classes; ++c) {
                       const double onehot = static_cast<int>(c) == targets[r] ? 1.0 : 0.0;
                       (*gl)[r * classes + c] += g * (probs[r * classes + c] - onehot);
                     }
                   }
                 });
}

Tensor embedding(const Tensor& table, std::span<const int> ids) {
  require_rank2("embedding", table);
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  const auto tv = table.values();
  std::vector<double> out;
  out.reserve(ids.size() * width);
  for (const int id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
      throw IndexError("embedding: id " + std::to_string(id) + " outside [0, " +
                       std::to_string(vocab) + ")");
    }
    const double* row = tv.data() + static_cast<std::size_t>(id) * width;
    out.insert(out.end(), row, row + width);
  }
  std::vector<int> rows(ids.begin(), ids.end());
  return make_op("embedding", {ids.size(), width}, std::move(out), {table},
                 [width, rows = std::move(rows)](Node& self) {
                   auto* gt = grad_of(self, 0);
                   if (!gt) return;
                   for (std::size_t r = 0; r < rows.size(); ++r) {
                     double* dst = gt->data() + static_cast<std::size_t>(rows[r]) * width;
                     const double* src = self.grad.data() + r * width;
                     for (std::size_t j = 0; j < width; ++j) dst[j] += src[j];
                   }
                 });
}

Tensor dropout(const Tensor& x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ConfigError("dropout rate must be below 1");
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = rng.uniform() < rate ? 0.0 : keep_scale;
  return mul(x, Tensor(x.shape(), std::move(mask)));
}

}  // namespace survey::nn
