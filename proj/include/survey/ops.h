#pragma once

#include <span>
#include <vector>

#include "survey/rng.h"
#include "survey/tensor.h"

namespace survey::nn {

// Every op below throws DimensionError naming both shapes on a mismatch and
// records itself on the tape when any input requires gradients.

Tensor matmul(const Tensor& a, const Tensor& b);  // [m x k] * [k x n]

// Elementwise. `b` may also be broadcast when its shape is a suffix of a's
// shape (e.g. a bias row [n] added to every row of [m x n]).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

Tensor transpose(const Tensor& a);  // rank 2 only
Tensor reshape(const Tensor& a, Shape shape);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);

Tensor sum(const Tensor& a);   // scalar
Tensor mean(const Tensor& a);  // scalar

// exp(x - max) / sum(exp(x - max)) along `axis`.
Tensor softmax(const Tensor& x, std::size_t axis);

// Normalizes over the last axis; gamma and beta have the last axis' length.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-12);

// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Tensor gelu(const Tensor& x);
Tensor tanh(const Tensor& x);

// Mean over rows of -log softmax(logits)[label]. IndexError for a label
// outside [0, C).
Tensor cross_entropy(const Tensor& logits, std::span<const int> labels);

// Rows of `table` [V x n] selected by ids -> [ids.size() x n]. IndexError on
// an id outside [0, V).
Tensor embedding(const Tensor& table, std::span<const int> ids);

// Inverted dropout: zeroes each element with probability `rate` and scales
// survivors by 1 / (1 - rate). Identity when rate == 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng);

}  // namespace survey::nn
