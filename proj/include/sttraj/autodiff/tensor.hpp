#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <string>
#include <vector>

namespace sttraj::ad {

using Index = Eigen::Index;
using Shape = std::vector<Index>;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

Index element_count(const Shape& shape);
std::string to_string(const Shape& shape);

/// Storage shared by every handle to one tensor.
struct Node {
  Shape shape;
  Vector value;  // row-major
  Vector grad;   // empty until first accumulation
  bool requires_grad = false;
  bool leaf = true;
  bool touched = false;  // received gradient in the current backward sweep

  Vector& grad_buffer() {
    if (grad.size() != value.size()) grad = Vector::Zero(value.size());
    return grad;
  }
};

/// Dense row-major tensor of doubles with an optional gradient.
///
/// `Tensor` is a reference-semantics handle: copies alias the same storage,
/// which is what lets parameters be shared between a model and the tapes that
/// record computations on them.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(Shape shape);
  static Tensor full(Shape shape, double value);
  static Tensor scalar(double value);
  /// Constant (non-differentiable) tensor; `values` is row-major.
  static Tensor constant(Shape shape, Vector values);
  static Tensor constant(Shape shape, std::initializer_list<double> values);
  /// Trainable leaf.
  static Tensor parameter(Shape shape, Vector values);
  static Tensor from_matrix(const Eigen::Ref<const RowMatrix>& m, bool requires_grad = false);

  bool defined() const noexcept { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  Index rank() const { return static_cast<Index>(node_->shape.size()); }
  Index dim(Index axis) const;
  Index size() const { return node_->value.size(); }

  const Vector& value() const { return node_->value; }
  /// Direct write access for optimizers and finite-difference probes.
  Vector& mutable_value() { return node_->value; }
  double item() const;
  double at(std::initializer_list<Index> index) const;

  /// Gradient, or zeros if none has been accumulated.
  Vector grad() const;
  bool has_grad() const { return node_->grad.size() == node_->value.size(); }
  void zero_grad();

  bool requires_grad() const { return node_->requires_grad; }
  bool is_leaf() const { return node_->leaf; }

  /// View as (size / last_dim) x last_dim; scalars map to 1x1.
  ConstMatrixMap matrix() const;
  MatrixMap mutable_matrix();

  /// Detached deep copy.
  Tensor clone() const;

  Node* node() const noexcept { return node_.get(); }
  const std::shared_ptr<Node>& shared() const noexcept { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

void zero_grads(const std::vector<Tensor>& tensors);

}  // namespace sttraj::ad
