#include "sttraj/autodiff/tape.hpp"

#include "sttraj/errors.hpp"

#include <algorithm>

namespace sttraj::ad {

namespace {
thread_local Tape* active_tape = nullptr;
}

Tape::Scope::Scope(Tape& tape) noexcept : previous_(active_tape) { active_tape = &tape; }

Tape::Scope::~Scope() { active_tape = previous_; }

Tape* Tape::current() noexcept { return active_tape; }

Tensor Tape::record(Shape shape, Vector value, std::initializer_list<Tensor> inputs,
                    BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->leaf = false;
  Tape* tape = active_tape;
  if (tape != nullptr &&
      std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); })) {
    node->requires_grad = true;
    tape->records_.push_back(Record{node, std::move(backward)});
  }
  return Tensor(std::move(node));
}

Tensor Tape::record(Shape shape, Vector value, const std::vector<Tensor>& inputs,
                    BackwardFn backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  node->leaf = false;
  Tape* tape = active_tape;
  if (tape != nullptr &&
      std::any_of(inputs.begin(), inputs.end(), [](const Tensor& t) { return t.requires_grad(); })) {
    node->requires_grad = true;
    tape->records_.push_back(Record{node, std::move(backward)});
  }
  return Tensor(std::move(node));
}

void Tape::backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward() requires a scalar loss");
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward() on a loss that was not recorded on a tape");
  }
  for (auto& record : records_) {
    record.output->grad_buffer().setZero();
    record.output->touched = false;
  }
  Node* root = loss.node();
  root->grad_buffer()[0] += 1.0;
  root->touched = true;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    if (!it->output->touched) continue;
    it->backward(*it->output);
  }
}

}  // namespace sttraj::ad
