#pragma once

#include <span>
#include <vector>

#include "cdegan/common.hpp"

// Reverse-mode autodiff over dense matrices, sized for small MLP losses.
// A Tape lives for one loss evaluation: build the expression through the
// free functions below, call backward() once on a 1x1 root, read gradients
// off the tracked leaves, drop the tape.

namespace cdegan {

class Tape;

struct Var {
  Tape* tape = nullptr;
  int id = -1;
};

enum class Op {
  leaf,
  matmul,      // a * b
  matmul_bt,   // a * b^T
  add,
  add_rowvec,  // matrix + broadcast row vector
  sub,
  neg,
  mul,         // elementwise
  scalar_mul,
  relu,
  leaky_relu,
  tanh_fn,
  sigmoid,     // output clamped to [1e-7, 1-1e-7]
  log_fn,
  square,
  rows_l2norm, // per-row euclidean norm, (r x c) -> (r x 1)
  mean_all,
  sum_all,
  concat_scalars, // k scalars -> (k x 1)
  softmax_col,    // softmax of (delta * x) down a column vector
};

class Tape {
 public:
  // Node layout is exposed for the op builders; treat it as internal.
  struct Node {
    Op op = Op::leaf;
    int a = -1;
    int b = -1;
    double scalar = 0.0;
    bool requires_grad = false;
    Matrix value;
    std::vector<int> many;  // concat_scalars only
  };

  // track=true marks a differentiation target (a parameter leaf).
  Var leaf(Matrix value, bool track);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  Var push(Node n);
  const Matrix& value(Var v) const;
  bool tracked(Var v) const;

  // Valid after backward(); zero for tracked leaves the root never reached.
  const Matrix& grad(Var v);

  // Seeds d(root)=1 and accumulates into every tracked leaf. root must be
  // 1x1 and backward may run only once per tape.
  void backward(Var root);

  void reserve(int nodes) { nodes_.reserve(nodes); }
  int size() const { return static_cast<int>(nodes_.size()); }

 private:
  Matrix& grad_buf(int id);
  void propagate(int id);

  std::vector<Node> nodes_;
  std::vector<Matrix> grads_;
  bool ran_backward_ = false;
};

Var matmul(Var a, Var b);
Var matmul_bt(Var a, Var b);
Var add(Var a, Var b);
Var add_rowvec(Var m, Var row);
Var sub(Var a, Var b);
Var neg(Var a);
Var mul(Var a, Var b);
Var scalar_mul(double c, Var a);
Var relu(Var a);
Var leaky_relu(Var a, double slope);
Var tanh(Var a);
Var sigmoid(Var a);
Var log(Var a);
Var square(Var a);
Var rows_l2norm(Var a);
Var mean_all(Var a);
Var sum_all(Var a);
Var concat_scalars(std::span<const Var> parts);
Var softmax_col(Var a, double delta);

// sum_i w_i * l_i for two equal-length column vectors.
inline Var weighted_sum(Var w, Var l) { return sum_all(mul(w, l)); }

constexpr double kSigmoidClampLo = 1e-7;
constexpr double kSigmoidClampHi = 1.0 - 1e-7;

// Flat euclidean norm over a set of gradient matrices.
double l2_norm(std::span<const Matrix> grads);

}  // namespace cdegan
