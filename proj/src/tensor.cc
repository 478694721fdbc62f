#include "survey/tensor.h"

#include <atomic>
#include <unordered_set>

#include "survey/errors.h"

namespace survey::nn {
namespace {

#ifdef NDEBUG
std::atomic<bool> g_finite_checks{false};
#else
std::atomic<bool> g_finite_checks{true};
#endif

thread_local bool t_grad_mode = true;

// Post-order over nodes that require grad; producers precede consumers.
std::vector<std::shared_ptr<detail::Node>> topological_order(
    const std::shared_ptr<detail::Node>& root) {
  std::vector<std::shared_ptr<detail::Node>> order;
  if (!root->requires_grad) return order;
  std::unordered_set<const detail::Node*> visited{root.get()};
  std::vector<std::pair<std::shared_ptr<detail::Node>, std::size_t>> stack;
  stack.emplace_back(root, 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      const std::shared_ptr<detail::Node>& child = node->inputs[next++];
      if (child->requires_grad && visited.insert(child.get()).second) {
        stack.emplace_back(child, 0);
      }
      continue;
    }
    order.push_back(std::move(node));
    stack.pop_back();
  }
  return order;
}

}  // namespace

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (const std::size_t d : shape) n *= d;
  return n;
}

Tensor::Tensor() : Tensor(Shape{}, {0.0}) {}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad)
    : node_(std::make_shared<detail::Node>()) {
  if (shape_size(shape) != values.size()) {
    throw DimensionError("shape " + shape_string(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  node_->shape = std::move(shape);
  node_->values = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  return filled(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::filled(Shape shape, double value, bool requires_grad) {
  const std::size_t n = shape_size(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor(Shape{}, {value}, requires_grad);
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values,
                      bool requires_grad) {
  return Tensor(Shape{rows, cols}, std::move(values), requires_grad);
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for " +
                         shape_string(shape()));
  }
  return node_->shape[axis];
}

double Tensor::item() const {
  if (size() != 1) {
    throw DimensionError("item() needs a single element, shape is " + shape_string(shape()));
  }
  return node_->values[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  if (rank() != 2 || row >= dim(0) || col >= dim(1)) {
    throw IndexError("index (" + std::to_string(row) + ", " + std::to_string(col) +
                     ") invalid for " + shape_string(shape()));
  }
  return node_->values[row * dim(1) + col];
}

std::vector<double> Tensor::grad() const {
  if (node_->grad.empty()) return std::vector<double>(size(), 0.0);
  return node_->grad;
}

Tensor Tensor::detach() const {
  return Tensor(node_->shape, node_->values, false);
}

Tensor Tensor::from_node(std::shared_ptr<detail::Node> node) {
  Tensor t;
  t.node_ = std::move(node);
  return t;
}

Tape Tape::record(const Tensor& root) {
  Tape tape;
  for (auto& node : topological_order(root.node())) {
    if (!node->backward) continue;
    Entry entry;
    for (const auto& in : node->inputs) entry.inputs.push_back(Tensor::from_node(in));
    entry.output = Tensor::from_node(std::move(node));
    tape.entries_.push_back(std::move(entry));
  }
  return tape;
}

void backward(const Tensor& loss) {
  if (loss.size() != 1) {
    throw ContractError("backward() needs a scalar loss, got shape " +
                        shape_string(loss.shape()));
  }
  if (!loss.requires_grad()) return;
  const auto order = topological_order(loss.node());
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* node = it->get();
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

NoGradScope::NoGradScope() : previous_(t_grad_mode) { t_grad_mode = false; }
NoGradScope::~NoGradScope() { t_grad_mode = previous_; }
bool grad_mode_enabled() { return t_grad_mode; }

void set_finite_checks(bool enabled) { g_finite_checks.store(enabled); }
bool finite_checks_enabled() { return g_finite_checks.load(); }

}  // namespace survey::nn
