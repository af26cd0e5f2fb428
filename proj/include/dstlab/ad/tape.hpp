#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "dstlab/types.hpp"

namespace dstlab::ad {

/// A trainable (or constant) buffer that outlives any single tape.
/// `grad` always has the same shape as `value` and accumulates across
/// backward() calls until zeroed.
struct Variable {
  Matrix value;
  Matrix grad;
  bool requires_grad = true;

  explicit Variable(Matrix v, bool rg = true)
      : value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())),
        requires_grad(rg) {}

  void zero_grad() { grad.setZero(); }
};

using VariablePtr = std::shared_ptr<Variable>;

inline VariablePtr make_variable(Matrix v, bool requires_grad = true) {
  return std::make_shared<Variable>(std::move(v), requires_grad);
}

class Tape;

/// Lightweight handle to a node on a Tape. Valid only while the tape lives.
class Tensor {
 public:
  Tensor() = default;

  const Matrix& value() const;
  /// Gradient of the last backward() target w.r.t. this node
  /// (accumulated across backward calls). Empty until backward reaches it.
  const Matrix& grad() const;

  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Tensor(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Records one forward pass as a topologically ordered list of nodes
/// (creation order is the topological order: parents always precede
/// children). backward() walks the list once in reverse.
class Tape {
 public:
  using BackwardFn =
      std::function<void(const Matrix& adjoint, Tape& tape,
                         std::vector<Matrix>& adjoints)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Constant input; no gradient tracked.
  Tensor constant(Matrix value) {
    return push(std::move(value), false, {-1, -1}, nullptr, nullptr);
  }

  /// Leaf bound to a Variable: copies the current value in; backward()
  /// accumulates the leaf adjoint into `source->grad`.
  Tensor leaf(const VariablePtr& source) {
    return push(source->value, source->requires_grad, {-1, -1}, nullptr,
                source.get());
  }

  Tensor emit(Matrix value, bool requires_grad, std::array<int, 2> parents,
              BackwardFn backward) {
    return push(std::move(value), requires_grad, parents, std::move(backward),
                nullptr);
  }

  const Matrix& value(int id) const { return nodes_[id].value; }
  const Matrix& grad(int id) const { return nodes_[id].grad; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  int size() const { return static_cast<int>(nodes_.size()); }

  /// Reverse sweep from a scalar node. Every requires_grad node reachable
  /// from `loss` gets its `grad` populated; Variable-backed leaves
  /// additionally accumulate into their Variable's grad buffer. Calling
  /// twice accumulates (doubles) the gradients.
  void backward(const Tensor& loss) {
    if (loss.tape() != this) {
      throw ShapeError("backward: tensor does not belong to this tape");
    }
    const Node& top = nodes_[loss.id()];
    if (top.value.size() != 1) {
      throw ShapeError("backward: loss must be a scalar (1x1) tensor");
    }
    std::vector<Matrix> adjoints(nodes_.size());
    adjoints[loss.id()] = Matrix::Ones(1, 1);
    for (int id = loss.id(); id >= 0; --id) {
      Node& node = nodes_[id];
      if (!node.requires_grad || adjoints[id].size() == 0) continue;
      if (node.backward) node.backward(adjoints[id], *this, adjoints);
      if (node.source) node.source->grad += adjoints[id];
      if (node.grad.size() == 0) {
        node.grad = adjoints[id];
      } else {
        node.grad += adjoints[id];
      }
    }
  }

  /// Adds `delta` into the adjoint slot, allocating on first touch.
  static void accumulate(Matrix& slot, const Matrix& delta) {
    if (slot.size() == 0) {
      slot = delta;
    } else {
      slot += delta;
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // lazily allocated by backward()
    bool requires_grad = false;
    std::array<int, 2> parents{-1, -1};
    BackwardFn backward;
    Variable* source = nullptr;
  };

  Tensor push(Matrix value, bool requires_grad, std::array<int, 2> parents,
              BackwardFn backward, Variable* source) {
    Node node;
    node.value = std::move(value);
    node.requires_grad = requires_grad;
    node.parents = parents;
    node.backward = std::move(backward);
    node.source = source;
    nodes_.push_back(std::move(node));
    return Tensor(this, static_cast<int>(nodes_.size()) - 1);
  }

  std::vector<Node> nodes_;
};

inline const Matrix& Tensor::value() const { return tape_->value(id_); }
inline const Matrix& Tensor::grad() const { return tape_->grad(id_); }
inline bool Tensor::requires_grad() const { return tape_->requires_grad(id_); }

}  // namespace dstlab::ad
