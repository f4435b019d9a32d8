#include "slotfill/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace slotfill {

template <typename T>
const Shape& Var<T>::shape() const {
  return tape_->nodes_[id_].shape;
}

template <typename T>
std::size_t Var<T>::size() const {
  return tape_->count(id_);
}

template <typename T>
std::span<const T> Var<T>::value() const {
  return {tape_->val(id_), tape_->count(id_)};
}

template <typename T>
T Var<T>::item() const {
  if (size() != 1) throw DimensionError("item() on non-scalar of shape " + shape_str(shape()));
  return tape_->val(id_)[0];
}

namespace {

template <typename T>
T sigmoid_scalar(T x) {
  // Split on sign so exp never overflows.
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace

template <typename T>
void Tape<T>::own(Var<T> v) const {
  if (v.tape_ != this || v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
    throw ContractError("value does not belong to this tape");
  }
}

template <typename T>
Var<T> Tape<T>::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var<T>(this, static_cast<int>(nodes_.size() - 1));
}

template <typename T>
Var<T> Tape<T>::param(Tensor<T>& tensor) {
  Node n;
  n.shape = tensor.shape();
  n.ext_value = tensor.data().data();
  if (grad_enabled_ && tensor.requires_grad()) {
    n.ext_grad = tensor.grad().data();
    n.needs_grad = true;
  }
  return push(std::move(n));
}

template <typename T>
Var<T> Tape<T>::param(const Tensor<T>& tensor) {
  Node n;
  n.shape = tensor.shape();
  n.ext_value = tensor.data().data();
  return push(std::move(n));
}

template <typename T>
Var<T> Tape<T>::constant(Shape shape, std::vector<T> values) {
  if (values.size() != shape_size(shape)) {
    throw DimensionError("constant of shape " + shape_str(shape) + " given " +
                         std::to_string(values.size()) + " values");
  }
  Node n;
  n.shape = std::move(shape);
  n.value = std::move(values);
  return push(std::move(n));
}

template <typename T>
Var<T> Tape<T>::zeros(Shape shape) {
  std::size_t n = shape_size(shape);
  return constant(std::move(shape), std::vector<T>(n, T(0)));
}

template <typename T>
Var<T> Tape<T>::matmul(Var<T> a, Var<T> b) {
  own(a);
  own(b);
  const Shape& sa = nodes_[a.id_].shape;
  const Shape& sb = nodes_[b.id_].shape;
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0]) {
    throw DimensionError("matmul: incompatible shapes " + shape_str(sa) + " and " + shape_str(sb));
  }
  const std::size_t m = sa[0], k = sa[1], n = sb[1];
  Node node;
  node.op = Op::kMatmul;
  node.shape = {m, n};
  node.a = a.id_;
  node.b = b.id_;
  node.value.assign(m * n, T(0));
  const T* A = val(a.id_);
  const T* B = val(b.id_);
  for (std::size_t i = 0; i < m; ++i) {
    T* out = node.value.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = A[i * k + p];
      const T* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += aip * brow[j];
    }
  }
  node.needs_grad = nodes_[a.id_].needs_grad || nodes_[b.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::matvec(Var<T> w, Var<T> x) {
  own(w);
  own(x);
  const Shape& sw = nodes_[w.id_].shape;
  const Shape& sx = nodes_[x.id_].shape;
  if (sw.size() != 2 || sx.size() != 1 || sw[1] != sx[0]) {
    throw DimensionError("matvec: incompatible shapes " + shape_str(sw) + " and " + shape_str(sx));
  }
  const std::size_t m = sw[0], k = sw[1];
  Node node;
  node.op = Op::kMatvec;
  node.shape = {m};
  node.a = w.id_;
  node.b = x.id_;
  node.value.resize(m);
  const T* W = val(w.id_);
  const T* X = val(x.id_);
  for (std::size_t i = 0; i < m; ++i) {
    const T* r = W + i * k;
    T acc = T(0);
    for (std::size_t j = 0; j < k; ++j) acc += r[j] * X[j];
    node.value[i] = acc;
  }
  node.needs_grad = nodes_[w.id_].needs_grad || nodes_[x.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::dot(Var<T> a, Var<T> b) {
  own(a);
  own(b);
  const Shape& sa = nodes_[a.id_].shape;
  const Shape& sb = nodes_[b.id_].shape;
  if (sa.size() != 1 || sa != sb) {
    throw DimensionError("dot: incompatible shapes " + shape_str(sa) + " and " + shape_str(sb));
  }
  Node node;
  node.op = Op::kDot;
  node.a = a.id_;
  node.b = b.id_;
  const T* A = val(a.id_);
  const T* B = val(b.id_);
  T acc = T(0);
  for (std::size_t i = 0; i < sa[0]; ++i) acc += A[i] * B[i];
  node.value = {acc};
  node.needs_grad = nodes_[a.id_].needs_grad || nodes_[b.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::binary(Op op, Var<T> a, Var<T> b) {
  own(a);
  own(b);
  const Shape& sa = nodes_[a.id_].shape;
  const Shape& sb = nodes_[b.id_].shape;
  const bool a_scalar = sa.empty(), b_scalar = sb.empty();
  if (sa != sb && !a_scalar && !b_scalar) {
    throw DimensionError("elementwise op: incompatible shapes " + shape_str(sa) + " and " +
                         shape_str(sb));
  }
  Node node;
  node.op = op;
  node.shape = a_scalar ? sb : sa;
  node.a = a.id_;
  node.b = b.id_;
  const std::size_t n = shape_size(node.shape);
  const T* A = val(a.id_);
  const T* B = val(b.id_);
  const std::size_t sa_step = a_scalar ? 0 : 1, sb_step = b_scalar ? 0 : 1;
  node.value.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T x = A[i * sa_step], y = B[i * sb_step];
    switch (op) {
      case Op::kAdd: node.value[i] = x + y; break;
      case Op::kSub: node.value[i] = x - y; break;
      case Op::kMul: node.value[i] = x * y; break;
      default: break;
    }
  }
  node.needs_grad = nodes_[a.id_].needs_grad || nodes_[b.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::add(Var<T> a, Var<T> b) { return binary(Op::kAdd, a, b); }
template <typename T>
Var<T> Tape<T>::sub(Var<T> a, Var<T> b) { return binary(Op::kSub, a, b); }
template <typename T>
Var<T> Tape<T>::mul(Var<T> a, Var<T> b) { return binary(Op::kMul, a, b); }

template <typename T>
Var<T> Tape<T>::unary(Op op, Var<T> a, T aux_value) {
  own(a);
  Node node;
  node.op = op;
  node.shape = nodes_[a.id_].shape;
  node.a = a.id_;
  node.aux_value = aux_value;
  const std::size_t n = count(a.id_);
  const T* A = val(a.id_);
  node.value.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T x = A[i];
    T y;
    switch (op) {
      case Op::kNeg: y = -x; break;
      case Op::kSigmoid: y = sigmoid_scalar(x); break;
      case Op::kTanh: y = std::tanh(x); break;
      case Op::kExp: y = std::exp(x); break;
      case Op::kLog: y = std::log(x); break;
      case Op::kClampMin: y = x > aux_value ? x : aux_value; break;
      default: y = x; break;
    }
    node.value[i] = y;
  }
  node.needs_grad = nodes_[a.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::neg(Var<T> a) { return unary(Op::kNeg, a); }
template <typename T>
Var<T> Tape<T>::sigmoid(Var<T> a) { return unary(Op::kSigmoid, a); }
template <typename T>
Var<T> Tape<T>::tanh(Var<T> a) { return unary(Op::kTanh, a); }
template <typename T>
Var<T> Tape<T>::exp(Var<T> a) { return unary(Op::kExp, a); }
template <typename T>
Var<T> Tape<T>::log(Var<T> a) { return unary(Op::kLog, a); }
template <typename T>
Var<T> Tape<T>::clamp_min(Var<T> a, T floor) { return unary(Op::kClampMin, a, floor); }

template <typename T>
Var<T> Tape<T>::softmax(Var<T> logits, std::size_t masked_leading) {
  own(logits);
  const Shape& s = nodes_[logits.id_].shape;
  if (s.size() != 1) throw DimensionError("softmax: expected a vector, got " + shape_str(s));
  const std::size_t n = s[0];
  if (masked_leading >= n) throw ContractError("softmax: every logit is masked");
  const T* x = val(logits.id_);
  for (std::size_t i = masked_leading; i < n; ++i) {
    if (!std::isfinite(x[i])) throw NumericError("softmax: non-finite logit");
  }
  Node node;
  node.op = Op::kSoftmax;
  node.shape = s;
  node.a = logits.id_;
  node.aux = masked_leading;
  node.value.assign(n, T(0));
  T mx = x[masked_leading];
  for (std::size_t i = masked_leading + 1; i < n; ++i) mx = std::max(mx, x[i]);
  T z = T(0);
  for (std::size_t i = masked_leading; i < n; ++i) {
    node.value[i] = std::exp(x[i] - mx);
    z += node.value[i];
  }
  for (std::size_t i = masked_leading; i < n; ++i) node.value[i] /= z;
  node.needs_grad = nodes_[logits.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::concat(Var<T> a, Var<T> b) {
  const Var<T> parts[] = {a, b};
  return concat(std::span<const Var<T>>(parts));
}

template <typename T>
Var<T> Tape<T>::concat(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ContractError("concat: no operands");
  Node node;
  node.op = Op::kConcat;
  std::size_t total = 0;
  for (const Var<T>& p : parts) {
    own(p);
    const Shape& s = nodes_[p.id_].shape;
    if (s.size() != 1) throw DimensionError("concat: expected vectors, got " + shape_str(s));
    total += s[0];
    node.parts.push_back(p.id_);
    node.needs_grad = node.needs_grad || nodes_[p.id_].needs_grad;
  }
  node.shape = {total};
  node.value.reserve(total);
  for (const Var<T>& p : parts) {
    const T* v = val(p.id_);
    node.value.insert(node.value.end(), v, v + count(p.id_));
  }
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::stack(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ContractError("stack: no operands");
  own(parts[0]);
  const Shape inner = nodes_[parts[0].id_].shape;
  Node node;
  node.op = Op::kStack;
  node.shape = {parts.size()};
  node.shape.insert(node.shape.end(), inner.begin(), inner.end());
  node.value.reserve(shape_size(node.shape));
  for (const Var<T>& p : parts) {
    own(p);
    if (nodes_[p.id_].shape != inner) {
      throw DimensionError("stack: mismatched shapes " + shape_str(inner) + " and " +
                           shape_str(nodes_[p.id_].shape));
    }
    const T* v = val(p.id_);
    node.value.insert(node.value.end(), v, v + count(p.id_));
    node.parts.push_back(p.id_);
    node.needs_grad = node.needs_grad || nodes_[p.id_].needs_grad;
  }
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::reshape(Var<T> a, Shape shape) {
  own(a);
  if (shape_size(shape) != count(a.id_)) {
    throw DimensionError("reshape: cannot view " + shape_str(nodes_[a.id_].shape) + " as " +
                         shape_str(shape));
  }
  Node node;
  node.op = Op::kReshape;
  node.shape = std::move(shape);
  node.a = a.id_;
  const T* v = val(a.id_);
  node.value.assign(v, v + count(a.id_));
  node.needs_grad = nodes_[a.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::row(Var<T> matrix, std::size_t index) {
  own(matrix);
  const Shape& s = nodes_[matrix.id_].shape;
  if (s.size() != 2) throw DimensionError("row: expected a matrix, got " + shape_str(s));
  if (index >= s[0]) {
    throw ContractError("row: index " + std::to_string(index) + " out of range for " + shape_str(s));
  }
  Node node;
  node.op = Op::kRow;
  node.shape = {s[1]};
  node.a = matrix.id_;
  node.aux = index;
  const T* v = val(matrix.id_) + index * s[1];
  node.value.assign(v, v + s[1]);
  node.needs_grad = nodes_[matrix.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::pick(Var<T> vec, std::size_t index) {
  own(vec);
  const Shape& s = nodes_[vec.id_].shape;
  if (s.size() != 1) throw DimensionError("pick: expected a vector, got " + shape_str(s));
  if (index >= s[0]) {
    throw ContractError("pick: index " + std::to_string(index) + " out of range for " + shape_str(s));
  }
  Node node;
  node.op = Op::kPick;
  node.a = vec.id_;
  node.aux = index;
  node.value = {val(vec.id_)[index]};
  node.needs_grad = nodes_[vec.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::sum(Var<T> a) {
  own(a);
  Node node;
  node.op = Op::kSum;
  node.a = a.id_;
  const T* v = val(a.id_);
  T acc = T(0);
  for (std::size_t i = 0, n = count(a.id_); i < n; ++i) acc += v[i];
  node.value = {acc};
  node.needs_grad = nodes_[a.id_].needs_grad;
  return push(std::move(node));
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  own(loss);
  if (count(loss.id_) != 1) {
    throw ContractError("backward: loss must be a scalar, got shape " +
                        shape_str(nodes_[loss.id_].shape));
  }
  if (!std::isfinite(val(loss.id_)[0])) throw NumericError("backward: loss is not finite");
  if (!grad_enabled_) throw ContractError("backward: tape was created without gradients");

  for (int id = 0; id <= loss.id_; ++id) {
    Node& n = nodes_[id];
    if (n.needs_grad && !n.ext_grad) n.grad.assign(count(id), T(0));
  }
  if (!nodes_[loss.id_].needs_grad) return;
  grd(loss.id_)[0] += T(1);
  for (int id = loss.id_; id >= 0; --id) {
    if (nodes_[id].needs_grad && nodes_[id].op != Op::kLeaf) adjoint(id);
  }
}

template <typename T>
void Tape<T>::adjoint(int id) {
  Node& n = nodes_[id];
  const T* g = grd(id);
  const T* y = n.value.data();
  const std::size_t len = count(id);
  auto wants = [&](int input) { return input >= 0 && nodes_[input].needs_grad; };

  switch (n.op) {
    case Op::kLeaf:
      break;
    case Op::kMatmul: {
      const Shape& sa = nodes_[n.a].shape;
      const std::size_t m = sa[0], k = sa[1], cols = n.shape[1];
      const T* A = val(n.a);
      const T* B = val(n.b);
      if (wants(n.a)) {  // dA = dC * B^T
        T* gA = grd(n.a);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            T acc = T(0);
            for (std::size_t j = 0; j < cols; ++j) acc += g[i * cols + j] * B[p * cols + j];
            gA[i * k + p] += acc;
          }
      }
      if (wants(n.b)) {  // dB = A^T * dC
        T* gB = grd(n.b);
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t p = 0; p < k; ++p) {
            const T aip = A[i * k + p];
            for (std::size_t j = 0; j < cols; ++j) gB[p * cols + j] += aip * g[i * cols + j];
          }
      }
      break;
    }
    case Op::kMatvec: {
      const Shape& sw = nodes_[n.a].shape;
      const std::size_t m = sw[0], k = sw[1];
      const T* W = val(n.a);
      const T* X = val(n.b);
      if (wants(n.a)) {
        T* gW = grd(n.a);
        for (std::size_t i = 0; i < m; ++i) {
          const T gi = g[i];
          T* r = gW + i * k;
          for (std::size_t j = 0; j < k; ++j) r[j] += gi * X[j];
        }
      }
      if (wants(n.b)) {
        T* gX = grd(n.b);
        for (std::size_t i = 0; i < m; ++i) {
          const T gi = g[i];
          const T* r = W + i * k;
          for (std::size_t j = 0; j < k; ++j) gX[j] += gi * r[j];
        }
      }
      break;
    }
    case Op::kDot: {
      const std::size_t k = count(n.a);
      const T* A = val(n.a);
      const T* B = val(n.b);
      if (wants(n.a)) {
        T* gA = grd(n.a);
        for (std::size_t i = 0; i < k; ++i) gA[i] += g[0] * B[i];
      }
      if (wants(n.b)) {
        T* gB = grd(n.b);
        for (std::size_t i = 0; i < k; ++i) gB[i] += g[0] * A[i];
      }
      break;
    }
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul: {
      const bool a_scalar = nodes_[n.a].shape.empty() && !n.shape.empty();
      const bool b_scalar = nodes_[n.b].shape.empty() && !n.shape.empty();
      const T* A = val(n.a);
      const T* B = val(n.b);
      const std::size_t sa = a_scalar ? 0 : 1, sb = b_scalar ? 0 : 1;
      if (wants(n.a)) {
        T* gA = grd(n.a);
        for (std::size_t i = 0; i < len; ++i)
          gA[i * sa] += n.op == Op::kMul ? g[i] * B[i * sb] : g[i];
      }
      if (wants(n.b)) {
        T* gB = grd(n.b);
        for (std::size_t i = 0; i < len; ++i) {
          T d = g[i];
          if (n.op == Op::kSub) d = -d;
          if (n.op == Op::kMul) d *= A[i * sa];
          gB[i * sb] += d;
        }
      }
      break;
    }
    case Op::kNeg:
    case Op::kSigmoid:
    case Op::kTanh:
    case Op::kExp:
    case Op::kLog:
    case Op::kClampMin: {
      T* gA = grd(n.a);
      const T* X = val(n.a);
      for (std::size_t i = 0; i < len; ++i) {
        T d;
        switch (n.op) {
          case Op::kNeg: d = -g[i]; break;
          case Op::kSigmoid: d = g[i] * y[i] * (T(1) - y[i]); break;
          case Op::kTanh: d = g[i] * (T(1) - y[i] * y[i]); break;
          case Op::kExp: d = g[i] * y[i]; break;
          case Op::kLog: d = g[i] / X[i]; break;
          case Op::kClampMin: d = X[i] > n.aux_value ? g[i] : T(0); break;
          default: d = T(0); break;
        }
        gA[i] += d;
      }
      break;
    }
    case Op::kSoftmax: {
      T* gA = grd(n.a);
      T gy = T(0);
      for (std::size_t i = n.aux; i < len; ++i) gy += g[i] * y[i];
      for (std::size_t i = n.aux; i < len; ++i) gA[i] += y[i] * (g[i] - gy);
      break;
    }
    case Op::kConcat:
    case Op::kStack: {
      std::size_t offset = 0;
      for (int p : n.parts) {
        const std::size_t k = count(p);
        if (nodes_[p].needs_grad) {
          T* gp = grd(p);
          for (std::size_t i = 0; i < k; ++i) gp[i] += g[offset + i];
        }
        offset += k;
      }
      break;
    }
    case Op::kReshape: {
      T* gA = grd(n.a);
      for (std::size_t i = 0; i < len; ++i) gA[i] += g[i];
      break;
    }
    case Op::kRow: {
      T* gA = grd(n.a) + n.aux * len;
      for (std::size_t i = 0; i < len; ++i) gA[i] += g[i];
      break;
    }
    case Op::kPick:
      grd(n.a)[n.aux] += g[0];
      break;
    case Op::kSum: {
      T* gA = grd(n.a);
      for (std::size_t i = 0, k = count(n.a); i < k; ++i) gA[i] += g[0];
      break;
    }
  }
}

template class Var<float>;
template class Var<double>;
template class Tape<float>;
template class Tape<double>;

}  // namespace slotfill
