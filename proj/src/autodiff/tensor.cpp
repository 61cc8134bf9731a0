#include "sttraj/autodiff/tensor.hpp"

#include "sttraj/errors.hpp"

#include <numeric>
#include <sstream>

namespace sttraj::ad {

Index element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {

std::shared_ptr<Node> make_node(Shape shape, Vector values, bool requires_grad) {
  for (Index d : shape) {
    if (d < 0) throw DimensionError("negative dimension in shape " + to_string(shape));
  }
  if (element_count(shape) != values.size()) {
    throw DimensionError("shape " + to_string(shape) + " does not match " +
                         std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->requires_grad = requires_grad;
  return node;
}

}  // namespace

Tensor Tensor::zeros(Shape shape) { return full(std::move(shape), 0.0); }

Tensor Tensor::full(Shape shape, double value) {
  const Index n = element_count(shape);
  return Tensor(make_node(std::move(shape), Vector::Constant(n, value), false));
}

Tensor Tensor::scalar(double value) { return full({}, value); }

Tensor Tensor::constant(Shape shape, Vector values) {
  return Tensor(make_node(std::move(shape), std::move(values), false));
}

Tensor Tensor::constant(Shape shape, std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  std::copy(values.begin(), values.end(), v.data());
  return constant(std::move(shape), std::move(v));
}

Tensor Tensor::parameter(Shape shape, Vector values) {
  return Tensor(make_node(std::move(shape), std::move(values), true));
}

Tensor Tensor::from_matrix(const Eigen::Ref<const RowMatrix>& m, bool requires_grad) {
  Vector v(m.size());
  MatrixMap(v.data(), m.rows(), m.cols()) = m;
  return Tensor(make_node({m.rows(), m.cols()}, std::move(v), requires_grad));
}

Index Tensor::dim(Index axis) const {
  const Index r = rank();
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) {
    throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                         to_string(shape()));
  }
  return node_->shape[static_cast<std::size_t>(axis)];
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + to_string(shape()));
  return node_->value[0];
}

double Tensor::at(std::initializer_list<Index> index) const {
  if (static_cast<Index>(index.size()) != rank()) {
    throw DimensionError("index rank does not match shape " + to_string(shape()));
  }
  Index flat = 0;
  std::size_t axis = 0;
  for (Index i : index) {
    const Index extent = node_->shape[axis++];
    if (i < 0 || i >= extent) throw DimensionError("index out of range for " + to_string(shape()));
    flat = flat * extent + i;
  }
  return node_->value[flat];
}

Vector Tensor::grad() const {
  if (has_grad()) return node_->grad;
  return Vector::Zero(size());
}

void Tensor::zero_grad() {
  if (node_->grad.size() != 0) node_->grad.setZero();
}

ConstMatrixMap Tensor::matrix() const {
  const Index cols = rank() == 0 ? 1 : node_->shape.back();
  const Index rows = cols == 0 ? 0 : size() / cols;
  return ConstMatrixMap(node_->value.data(), rows, cols);
}

MatrixMap Tensor::mutable_matrix() {
  const Index cols = rank() == 0 ? 1 : node_->shape.back();
  const Index rows = cols == 0 ? 0 : size() / cols;
  return MatrixMap(node_->value.data(), rows, cols);
}

Tensor Tensor::clone() const {
  return Tensor(make_node(node_->shape, node_->value, node_->requires_grad && node_->leaf));
}

void zero_grads(const std::vector<Tensor>& tensors) {
  for (const auto& t : tensors) {
    Tensor copy = t;
    copy.zero_grad();
  }
}

}  // namespace sttraj::ad
