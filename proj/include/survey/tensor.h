#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace survey::nn {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;  // empty until first accumulation
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into its inputs' grads.
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

// Dense row-major float64 tensor. A Tensor is a cheap handle: copies share
// the same storage and autograd node. Operations on tensors that require
// gradients record their inputs and a local backward rule, so the graph
// reachable from a result is the computation tape for backward().
class Tensor {
 public:
  Tensor();  // scalar 0, no grad
  Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor filled(Shape shape, double value, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                       bool requires_grad = false);

  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return node_->values.size(); }

  std::span<const double> values() const { return node_->values; }
  // Direct write access, for optimizers and tests. Not recorded on the tape.
  std::span<double> mutable_values() { return node_->values; }
  double item() const;  // DimensionError unless size() == 1
  double at(std::size_t i) const { return node_->values.at(i); }
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }

  bool has_grad() const { return !node_->grad.empty(); }
  // Zeros when no gradient has been accumulated yet.
  std::vector<double> grad() const;
  std::span<double> mutable_grad() { return node_->grad_buffer(); }
  void zero_grad() { node_->grad.clear(); }

  // Copy with fresh storage and no graph history.
  Tensor detach() const;

  bool same_node(const Tensor& other) const { return node_ == other.node_; }
  const char* op() const { return node_->op; }

  // For op implementations.
  static Tensor from_node(std::shared_ptr<detail::Node> node);
  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

// Recorded operations reachable from a root, in an order where every entry
// comes after the producers of its inputs.
class Tape {
 public:
  struct Entry {
    Tensor output;
    std::vector<Tensor> inputs;
  };

  static Tape record(const Tensor& root);
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

// Reverse-mode pass: seeds d(loss)/d(loss) = 1 and accumulates gradients into
// every tensor on the tape that requires them. Gradients add across fan-out
// and across repeated calls. ContractError unless loss has exactly one
// element.
void backward(const Tensor& loss);

// While alive, ops on this thread record nothing on the tape (inference).
class NoGradScope {
 public:
  NoGradScope();
  ~NoGradScope();
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

// When enabled, every op throws NumericError if it produces NaN or Inf.
// Defaults to on in debug builds and off when NDEBUG is defined.
void set_finite_checks(bool enabled);
bool finite_checks_enabled();

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

}  // namespace survey::nn
