#include "cdegan/autodiff.hpp"

#include <cmath>
#include <string>

namespace cdegan {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

[[noreturn]] void shape_fail(const char* op, const Matrix& a, const Matrix& b) {
  throw ContractError(std::string(op) + ": shapes " + shape_of(a) + " and " +
                      shape_of(b) + " do not conform");
}

Tape* same_tape(Var a, Var b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape)
    throw ContractError(std::string(op) + ": operands from different tapes");
  return a.tape;
}

}  // namespace

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::leaf(Matrix value, bool track) {
  Node n;
  n.op = Op::leaf;
  n.requires_grad = track;
  n.value = std::move(value);
  return push(std::move(n));
}

const Matrix& Tape::value(Var v) const { return nodes_.at(v.id).value; }

bool Tape::tracked(Var v) const { return nodes_.at(v.id).requires_grad; }

const Matrix& Tape::grad(Var v) {
  if (!ran_backward_) throw ContractError("grad read before backward");
  if (!nodes_.at(v.id).requires_grad)
    throw ContractError("grad requested for an untracked node");
  return grad_buf(v.id);
}

Matrix& Tape::grad_buf(int id) {
  if (grads_[id].size() == 0)
    grads_[id] = Matrix::Zero(nodes_[id].value.rows(), nodes_[id].value.cols());
  return grads_[id];
}

void Tape::backward(Var root) {
  if (root.tape != this) throw ContractError("backward: root from another tape");
  const Matrix& rv = nodes_.at(root.id).value;
  if (rv.rows() != 1 || rv.cols() != 1)
    throw ContractError("backward: root is " + shape_of(rv) + ", expected 1x1");
  if (ran_backward_) throw ContractError("backward may run only once per tape");
  ran_backward_ = true;

  grads_.resize(nodes_.size());
  grad_buf(root.id)(0, 0) = 1.0;
  for (int id = root.id; id >= 0; --id) {
    if (!nodes_[id].requires_grad) continue;
    if (grads_[id].size() == 0) continue;
    propagate(id);
  }
}

void Tape::propagate(int id) {
  const Node& n = nodes_[id];
  const Matrix& g = grads_[id];
  auto want = [&](int in) { return in >= 0 && nodes_[in].requires_grad; };

  switch (n.op) {
    case Op::leaf:
      break;
    case Op::matmul:
      if (want(n.a)) grad_buf(n.a).noalias() += g * nodes_[n.b].value.transpose();
      if (want(n.b)) grad_buf(n.b).noalias() += nodes_[n.a].value.transpose() * g;
      break;
    case Op::matmul_bt:
      if (want(n.a)) grad_buf(n.a).noalias() += g * nodes_[n.b].value;
      if (want(n.b)) grad_buf(n.b).noalias() += g.transpose() * nodes_[n.a].value;
      break;
    case Op::add:
      if (want(n.a)) grad_buf(n.a) += g;
      if (want(n.b)) grad_buf(n.b) += g;
      break;
    case Op::add_rowvec:
      if (want(n.a)) grad_buf(n.a) += g;
      if (want(n.b)) grad_buf(n.b) += g.colwise().sum();
      break;
    case Op::sub:
      if (want(n.a)) grad_buf(n.a) += g;
      if (want(n.b)) grad_buf(n.b) -= g;
      break;
    case Op::neg:
      if (want(n.a)) grad_buf(n.a) -= g;
      break;
    case Op::mul:
      if (want(n.a)) grad_buf(n.a) += g.cwiseProduct(nodes_[n.b].value);
      if (want(n.b)) grad_buf(n.b) += g.cwiseProduct(nodes_[n.a].value);
      break;
    case Op::scalar_mul:
      if (want(n.a)) grad_buf(n.a) += n.scalar * g;
      break;
    case Op::relu:
      if (want(n.a))
        grad_buf(n.a) += g.cwiseProduct(
            (n.value.array() > 0.0).cast<double>().matrix());
      break;
    case Op::leaky_relu:
      if (want(n.a)) {
        // sign of the output matches the sign of the input for slope > 0
        Matrix mask = (n.value.array() > 0.0)
                          .select(Matrix::Ones(g.rows(), g.cols()),
                                  Matrix::Constant(g.rows(), g.cols(), n.scalar));
        grad_buf(n.a) += g.cwiseProduct(mask);
      }
      break;
    case Op::tanh_fn:
      if (want(n.a))
        grad_buf(n.a) +=
            g.cwiseProduct((1.0 - n.value.array().square()).matrix());
      break;
    case Op::sigmoid:
      // derivative from the clamped value keeps log(sigmoid) gradients
      // bounded at saturation
      if (want(n.a))
        grad_buf(n.a) += g.cwiseProduct(
            (n.value.array() * (1.0 - n.value.array())).matrix());
      break;
    case Op::log_fn:
      if (want(n.a))
        grad_buf(n.a) += g.cwiseQuotient(nodes_[n.a].value);
      break;
    case Op::square:
      if (want(n.a)) grad_buf(n.a) += 2.0 * g.cwiseProduct(nodes_[n.a].value);
      break;
    case Op::rows_l2norm:
      if (want(n.a)) {
        const Matrix& x = nodes_[n.a].value;
        Matrix& da = grad_buf(n.a);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
          double norm = std::max(n.value(r, 0), 1e-12);
          da.row(r) += (g(r, 0) / norm) * x.row(r);
        }
      }
      break;
    case Op::mean_all:
      if (want(n.a)) {
        const Matrix& x = nodes_[n.a].value;
        grad_buf(n.a).array() += g(0, 0) / static_cast<double>(x.size());
      }
      break;
    case Op::sum_all:
      if (want(n.a)) grad_buf(n.a).array() += g(0, 0);
      break;
    case Op::concat_scalars:
      for (size_t j = 0; j < n.many.size(); ++j)
        if (want(n.many[j])) grad_buf(n.many[j])(0, 0) += g(j, 0);
      break;
    case Op::softmax_col:
      if (want(n.a)) {
        const Matrix& w = n.value;
        double gw = (g.array() * w.array()).sum();
        grad_buf(n.a) +=
            n.scalar * (g.cwiseProduct(w) - gw * w);
      }
      break;
  }
}

Var matmul(Var a, Var b) {
  Tape* t = same_tape(a, b, "matmul");
  const Matrix& av = t->value(a);
  const Matrix& bv = t->value(b);
  if (av.cols() != bv.rows()) shape_fail("matmul", av, bv);
  Tape::Node n;
  n.op = Op::matmul;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = t->tracked(a) || t->tracked(b);
  n.value.noalias() = av * bv;
  return t->push(std::move(n));
}

Var matmul_bt(Var a, Var b) {
  Tape* t = same_tape(a, b, "matmul_bt");
  const Matrix& av = t->value(a);
  const Matrix& bv = t->value(b);
  if (av.cols() != bv.cols()) shape_fail("matmul_bt", av, bv);
  Tape::Node n;
  n.op = Op::matmul_bt;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = t->tracked(a) || t->tracked(b);
  n.value.noalias() = av * bv.transpose();
  return t->push(std::move(n));
}

namespace {

Tape* checked_same_shape(Var a, Var b, const char* name) {
  Tape* t = same_tape(a, b, name);
  const Matrix& av = t->value(a);
  const Matrix& bv = t->value(b);
  if (av.rows() != bv.rows() || av.cols() != bv.cols())
    shape_fail(name, av, bv);
  return t;
}

}  // namespace

Var add(Var a, Var b) {
  Tape* t = checked_same_shape(a, b, "add");
  Tape::Node n;
  n.op = Op::add;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = t->tracked(a) || t->tracked(b);
  n.value = t->value(a) + t->value(b);
  return t->push(std::move(n));
}

Var add_rowvec(Var m, Var row) {
  Tape* t = same_tape(m, row, "add_rowvec");
  const Matrix& mv = t->value(m);
  const Matrix& rv = t->value(row);
  if (rv.rows() != 1 || rv.cols() != mv.cols()) shape_fail("add_rowvec", mv, rv);
  Tape::Node n;
  n.op = Op::add_rowvec;
  n.a = m.id;
  n.b = row.id;
  n.requires_grad = t->tracked(m) || t->tracked(row);
  n.value = mv.rowwise() + rv.row(0);
  return t->push(std::move(n));
}

Var sub(Var a, Var b) {
  Tape* t = checked_same_shape(a, b, "sub");
  Tape::Node n;
  n.op = Op::sub;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = t->tracked(a) || t->tracked(b);
  n.value = t->value(a) - t->value(b);
  return t->push(std::move(n));
}

Var neg(Var a) {
  Tape* t = a.tape;
  Tape::Node n;
  n.op = Op::neg;
  n.a = a.id;
  n.requires_grad = t->tracked(a);
  n.value = -t->value(a);
  return t->push(std::move(n));
}

Var mul(Var a, Var b) {
  Tape* t = checked_same_shape(a, b, "mul");
  Tape::Node n;
  n.op = Op::mul;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = t->tracked(a) || t->tracked(b);
  n.value = t->value(a).cwiseProduct(t->value(b));
  return t->push(std::move(n));
}

Var scalar_mul(double c, Var a) {
  Tape* t = a.tape;
  Tape::Node n;
  n.op = Op::scalar_mul;
  n.a = a.id;
  n.scalar = c;
  n.requires_grad = t->tracked(a);
  n.value = c * t->value(a);
  return t->push(std::move(n));
}

namespace {

Var unary(Op op, Var a, Matrix value, double scalar = 0.0) {
  if (a.tape == nullptr) throw ContractError("op on a default Var");
  Tape::Node n;
  n.op = op;
  n.a = a.id;
  n.scalar = scalar;
  n.requires_grad = a.tape->tracked(a);
  n.value = std::move(value);
  return a.tape->push(std::move(n));
}

}  // namespace

Var relu(Var a) {
  return unary(Op::relu, a, a.tape->value(a).cwiseMax(0.0));
}

Var leaky_relu(Var a, double slope) {
  const Matrix& x = a.tape->value(a);
  Matrix y = (x.array() > 0.0).select(x, slope * x);
  return unary(Op::leaky_relu, a, std::move(y), slope);
}

Var tanh(Var a) {
  return unary(Op::tanh_fn, a, a.tape->value(a).array().tanh().matrix());
}

Var sigmoid(Var a) {
  Matrix y = (1.0 / (1.0 + (-a.tape->value(a).array()).exp()))
                 .cwiseMax(kSigmoidClampLo)
                 .cwiseMin(kSigmoidClampHi)
                 .matrix();
  return unary(Op::sigmoid, a, std::move(y));
}

Var log(Var a) {
  const Matrix& x = a.tape->value(a);
  if ((x.array() <= 0.0).any())
    throw NumericError("log: non-positive input (domain error)");
  return unary(Op::log_fn, a, x.array().log().matrix());
}

Var square(Var a) {
  return unary(Op::square, a, a.tape->value(a).array().square().matrix());
}

Var rows_l2norm(Var a) {
  return unary(Op::rows_l2norm, a, a.tape->value(a).rowwise().norm());
}

Var mean_all(Var a) {
  Matrix y(1, 1);
  y(0, 0) = a.tape->value(a).mean();
  return unary(Op::mean_all, a, std::move(y));
}

Var sum_all(Var a) {
  Matrix y(1, 1);
  y(0, 0) = a.tape->value(a).sum();
  return unary(Op::sum_all, a, std::move(y));
}

Var concat_scalars(std::span<const Var> parts) {
  if (parts.empty()) throw ContractError("concat_scalars: no inputs");
  Tape* t = parts[0].tape;
  Tape::Node n;
  n.op = Op::concat_scalars;
  n.value.resize(static_cast<Eigen::Index>(parts.size()), 1);
  for (size_t j = 0; j < parts.size(); ++j) {
    if (parts[j].tape != t)
      throw ContractError("concat_scalars: operands from different tapes");
    const Matrix& v = t->value(parts[j]);
    if (v.size() != 1)
      throw ContractError("concat_scalars: input " + std::to_string(j) +
                          " is " + std::to_string(v.rows()) + "x" +
                          std::to_string(v.cols()) + ", expected 1x1");
    n.value(static_cast<Eigen::Index>(j), 0) = v(0, 0);
    n.many.push_back(parts[j].id);
    n.requires_grad = n.requires_grad || t->tracked(parts[j]);
  }
  return t->push(std::move(n));
}

Var softmax_col(Var a, double delta) {
  const Matrix& x = a.tape->value(a);
  if (x.cols() != 1) throw ContractError("softmax_col: input is not a column");
  Eigen::ArrayXd u = delta * x.col(0).array();
  Eigen::ArrayXd e = (u - u.maxCoeff()).exp();
  Matrix w = (e / e.sum()).matrix();
  return unary(Op::softmax_col, a, std::move(w), delta);
}

double l2_norm(std::span<const Matrix> grads) {
  double ss = 0.0;
  for (const Matrix& g : grads) ss += g.squaredNorm();
  return std::sqrt(ss);
}

}  // namespace cdegan
