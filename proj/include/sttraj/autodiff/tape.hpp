#pragma once

#include "sttraj/autodiff/tensor.hpp"

#include <functional>
#include <vector>

namespace sttraj::ad {

/// Ordered record of differentiable operations.
///
/// Operations record onto the tape that is active on the calling thread (see
/// `Tape::Scope`). With no active tape, operations only compute values. A tape
/// and its intermediate tensors belong to one thread; different threads may
/// record onto different tapes concurrently.
class Tape {
 public:
  /// Reads `output.grad` (d loss / d output) and adds input contributions.
  using BackwardFn = std::function<void(const Node& output)>;

  class Scope {
   public:
    explicit Scope(Tape& tape) noexcept;
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    Tape* previous_;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  static Tape* current() noexcept;

  /// Builds the output tensor and, when any input requires a gradient and a
  /// tape is active, appends its gradient rule.
  static Tensor record(Shape shape, Vector value, std::initializer_list<Tensor> inputs,
                       BackwardFn backward);
  static Tensor record(Shape shape, Vector value, const std::vector<Tensor>& inputs,
                       BackwardFn backward);

  /// Reverse sweep from a scalar loss. Leaf gradients accumulate across calls;
  /// intermediate gradients are reset at the start of each sweep.
  void backward(const Tensor& loss);

  std::size_t size() const noexcept { return records_.size(); }
  void clear() noexcept { records_.clear(); }

 private:
  struct Record {
    std::shared_ptr<Node> output;
    BackwardFn backward;
  };

  std::vector<Record> records_;
};

/// Adds `contribution` to the gradient of `t` if it is differentiable.
template <typename Derived>
void accumulate(const Tensor& t, const Eigen::MatrixBase<Derived>& contribution) {
  Node* node = t.node();
  if (!node->requires_grad) return;
  node->grad_buffer() += contribution;
  node->touched = true;
}

}  // namespace sttraj::ad
