#pragma once

#include "sttraj/autodiff/tape.hpp"
#include "sttraj/autodiff/tensor.hpp"

#include <vector>

namespace sttraj::ad {

// Elementwise arithmetic. Binary operands must have identical shapes.
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator/(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a);
Tensor operator*(double s, const Tensor& a);
Tensor operator*(const Tensor& a, double s);
Tensor operator+(const Tensor& a, double s);
Tensor operator+(double s, const Tensor& a);
Tensor operator-(const Tensor& a, double s);
Tensor operator-(double s, const Tensor& a);

Tensor exp(const Tensor& x);
Tensor log(const Tensor& x);
Tensor tanh(const Tensor& x);
Tensor sqrt(const Tensor& x);
Tensor square(const Tensor& x);
/// Elementwise clamp to [lo, hi]; gradient passes only inside the range.
Tensor clamp(const Tensor& x, double lo, double hi);

/// x where x > 0, slope * x otherwise. `slope` is a single-element tensor.
Tensor prelu(const Tensor& x, const Tensor& slope);

/// Row-wise softmax over the last axis, stabilised by max subtraction.
/// Throws ValidationError on non-finite input.
Tensor softmax_lastdim(const Tensor& x);

/// (m x k) . (k x n)
Tensor matmul(const Tensor& a, const Tensor& b);
/// Batched product: (B x m x k) . (B x k x n) -> (B x m x n).
Tensor bmm(const Tensor& a, const Tensor& b);
/// x . W + b over the last axis, for x of any rank >= 1.
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);
Tensor linear(const Tensor& x, const Tensor& weight);

/// Adds b (shape [n]) to every slice along the last axis of x (shape [..., n]).
Tensor add_bias(const Tensor& x, const Tensor& b);
/// Adds c to the diagonal of every trailing n x n matrix.
Tensor add_diagonal(const Tensor& x, double c);
/// [..., n] -> [..., n, n] with out[..., i, j] = d[..., i] * d[..., j].
Tensor outer_lastdim(const Tensor& d);

Tensor reshape(const Tensor& x, Shape shape);
/// Output axis i is input axis perm[i].
Tensor permute(const Tensor& x, const std::vector<Index>& perm);
/// Swaps the last two axes.
Tensor transpose(const Tensor& x);
/// Half-open range [begin, end) along `axis`.
Tensor slice(const Tensor& x, Index axis, Index begin, Index end);
/// Stacks `reps` copies along a new leading axis.
Tensor tile(const Tensor& x, Index reps);
/// Stacks same-shape tensors along a new trailing axis.
Tensor stack_lastdim(const std::vector<Tensor>& parts);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
/// Reduces one axis (removed from the output shape).
Tensor sum_axis(const Tensor& x, Index axis);

/// Zero-padded convolution along axis 1 of x [Cin x L x N] with kernels
/// [Cout x Cin x k] and bias [Cout]; k must be odd. Output is [Cout x L x N].
Tensor conv_over_time(const Tensor& x, const Tensor& kernels, const Tensor& bias);

/// Squared Euclidean distances between rows: [m x d], [l x d] -> [m x l].
Tensor pairwise_sqdist(const Tensor& x, const Tensor& y);

}  // namespace sttraj::ad
