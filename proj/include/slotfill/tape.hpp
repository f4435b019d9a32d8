#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "slotfill/tensor.hpp"

namespace slotfill {

template <typename T>
class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the
/// tape is alive and has not been cleared.
template <typename T>
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape<T>* tape() const { return tape_; }
  int id() const { return id_; }

  const Shape& shape() const;
  std::size_t size() const;
  std::span<const T> value() const;
  /// Value of a single-element Var.
  T item() const;

 private:
  friend class Tape<T>;
  Var(Tape<T>* tape, int id) : tape_(tape), id_(id) {}

  Tape<T>* tape_ = nullptr;
  int id_ = -1;
};

/// Define-by-run record of tensor operations for reverse-mode
/// differentiation. Operations evaluate eagerly; backward() replays the
/// adjoint rules in reverse recording order.
///
/// A tape is built per sequence and confined to one thread. A tape created
/// with grad_enabled = false never writes to the tensors it reads, so
/// several such tapes may share one parameter set across threads.
template <typename T>
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  /// Binds a tensor without copying. If it requires grad (and the tape is
  /// recording gradients), backward() accumulates into tensor.grad().
  Var<T> param(Tensor<T>& tensor);
  /// Read-only binding; no gradient flows back.
  Var<T> param(const Tensor<T>& tensor);
  Var<T> constant(Shape shape, std::vector<T> values);
  Var<T> constant(const Tensor<T>& tensor) { return constant(tensor.shape(), {tensor.data().begin(), tensor.data().end()}); }
  Var<T> scalar(T value) { return constant(Shape{}, {value}); }
  Var<T> zeros(Shape shape);

  // Linear algebra.
  Var<T> matmul(Var<T> a, Var<T> b);
  Var<T> matvec(Var<T> w, Var<T> x);
  Var<T> dot(Var<T> a, Var<T> b);

  // Pointwise; binary ops accept equal shapes or one scalar operand.
  Var<T> add(Var<T> a, Var<T> b);
  Var<T> sub(Var<T> a, Var<T> b);
  Var<T> mul(Var<T> a, Var<T> b);
  Var<T> neg(Var<T> a);
  Var<T> sigmoid(Var<T> a);
  Var<T> tanh(Var<T> a);
  Var<T> exp(Var<T> a);
  Var<T> log(Var<T> a);
  /// max(a, floor) with zero gradient where the floor is active.
  Var<T> clamp_min(Var<T> a, T floor);

  /// Softmax over a vector with max-subtraction. The first `masked_leading`
  /// entries are treated as -inf logits: their probability is exactly 0 and
  /// they receive no gradient.
  Var<T> softmax(Var<T> logits, std::size_t masked_leading = 0);

  // Structure.
  Var<T> concat(Var<T> a, Var<T> b);
  Var<T> concat(std::span<const Var<T>> parts);
  /// Stacks equal-shaped values along a new leading dimension.
  Var<T> stack(std::span<const Var<T>> parts);
  Var<T> reshape(Var<T> a, Shape shape);
  /// Row `index` of a matrix, as a vector.
  Var<T> row(Var<T> matrix, std::size_t index);
  /// Element `index` of a vector, as a scalar.
  Var<T> pick(Var<T> vec, std::size_t index);
  Var<T> sum(Var<T> a);

  /// Populates gradients of every requires-grad tensor reachable from
  /// `loss`. Parameter gradients accumulate across calls; zero them between
  /// updates.
  void backward(Var<T> loss);

 private:
  friend class Var<T>;

  enum class Op : std::uint8_t {
    kLeaf, kMatmul, kMatvec, kDot, kAdd, kSub, kMul, kNeg, kSigmoid, kTanh, kExp, kLog,
    kClampMin, kSoftmax, kConcat, kStack, kReshape, kRow, kPick, kSum,
  };

  struct Node {
    Op op = Op::kLeaf;
    Shape shape;
    int a = -1;
    int b = -1;
    std::vector<int> parts;
    std::size_t aux = 0;
    T aux_value = T(0);
    std::vector<T> value;
    std::vector<T> grad;
    const T* ext_value = nullptr;
    T* ext_grad = nullptr;
    bool needs_grad = false;
  };

  const T* val(int id) const {
    const Node& n = nodes_[id];
    return n.ext_value ? n.ext_value : n.value.data();
  }
  T* grd(int id) {
    Node& n = nodes_[id];
    return n.ext_grad ? n.ext_grad : n.grad.data();
  }
  std::size_t count(int id) const { return shape_size(nodes_[id].shape); }

  void own(Var<T> v) const;
  Var<T> push(Node node);
  Var<T> unary(Op op, Var<T> a, T aux_value = T(0));
  Var<T> binary(Op op, Var<T> a, Var<T> b);
  void adjoint(int id);

  bool grad_enabled_;
  std::vector<Node> nodes_;
};

extern template class Var<float>;
extern template class Var<double>;
extern template class Tape<float>;
extern template class Tape<double>;

// Free-function spellings for model code.
template <typename T> Var<T> matmul(Var<T> a, Var<T> b) { return a.tape()->matmul(a, b); }
template <typename T> Var<T> matvec(Var<T> w, Var<T> x) { return w.tape()->matvec(w, x); }
template <typename T> Var<T> dot(Var<T> a, Var<T> b) { return a.tape()->dot(a, b); }
template <typename T> Var<T> sigmoid(Var<T> a) { return a.tape()->sigmoid(a); }
template <typename T> Var<T> tanh(Var<T> a) { return a.tape()->tanh(a); }
template <typename T> Var<T> exp(Var<T> a) { return a.tape()->exp(a); }
template <typename T> Var<T> log(Var<T> a) { return a.tape()->log(a); }
template <typename T> Var<T> softmax(Var<T> a, std::size_t masked_leading = 0) {
  return a.tape()->softmax(a, masked_leading);
}
template <typename T> Var<T> concat(Var<T> a, Var<T> b) { return a.tape()->concat(a, b); }
template <typename T> Var<T> sum(Var<T> a) { return a.tape()->sum(a); }
template <typename T> Var<T> operator+(Var<T> a, Var<T> b) { return a.tape()->add(a, b); }
template <typename T> Var<T> operator-(Var<T> a, Var<T> b) { return a.tape()->sub(a, b); }
template <typename T> Var<T> operator*(Var<T> a, Var<T> b) { return a.tape()->mul(a, b); }
template <typename T> Var<T> operator-(Var<T> a) { return a.tape()->neg(a); }

}  // namespace slotfill
