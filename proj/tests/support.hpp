#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "cdegan/nets.hpp"

namespace testsup {

using cdegan::Matrix;
using cdegan::MlpSpec;
using cdegan::ParamSet;

inline double rel_err(double got, double want) {
  double denom = std::max({std::abs(got), std::abs(want), 1e-6});
  return std::abs(got - want) / denom;
}

// Smallest |pre-activation| across all layers of a plain forward pass.
// Finite-difference probes move pre-activations by far less than 1e-3, so a
// margin above that rules out kink crossings in piecewise-linear nets.
inline double preact_margin(const MlpSpec& spec, const ParamSet& p,
                            const Matrix& x) {
  double margin = std::numeric_limits<double>::infinity();
  Matrix h = x;
  for (size_t l = 0; l < spec.layers.size(); ++l) {
    Matrix pre = h * p.tensors[2 * l];
    pre.rowwise() += p.tensors[2 * l + 1].row(0);
    margin = std::min(margin, pre.array().abs().minCoeff());
    switch (spec.layers[l].act) {
      case cdegan::Activation::relu:
        h = pre.cwiseMax(0.0);
        break;
      case cdegan::Activation::leaky_relu:
        h = pre.unaryExpr([&](double v) {
          return v > 0.0 ? v : spec.leaky_slope * v;
        });
        break;
      case cdegan::Activation::tanh:
        h = pre.array().tanh().matrix();
        break;
      case cdegan::Activation::sigmoid:
        h = pre.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
        break;
      case cdegan::Activation::linear:
        h = pre;
        break;
    }
  }
  return margin;
}

struct FdReport {
  int probes = 0;
  double max_rel = 0.0;
};

// Central finite differences against analytic grads on a random subset of
// entries per tensor. eval() must recompute the loss from p's current
// tensors; grads holds the analytic gradient per tensor.
inline FdReport fd_check(ParamSet& p, const std::vector<Matrix>& grads,
                         const std::function<double()>& eval,
                         uint64_t pick_seed, int per_tensor = 3,
                         double eps = 1e-5) {
  FdReport rep;
  uint64_t state = pick_seed * 0x9E3779B97F4A7C15ULL + 1;
  auto next = [&] {
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return state * 0x2545F4914F6CDD1DULL;
  };
  for (size_t ti = 0; ti < p.tensors.size(); ++ti) {
    Matrix& w = p.tensors[ti];
    for (int probe = 0; probe < per_tensor; ++probe) {
      Eigen::Index r = static_cast<Eigen::Index>(next() % w.rows());
      Eigen::Index c = static_cast<Eigen::Index>(next() % w.cols());
      double orig = w(r, c);
      w(r, c) = orig + eps;
      double up = eval();
      w(r, c) = orig - eps;
      double down = eval();
      w(r, c) = orig;
      double fd = (up - down) / (2.0 * eps);
      rep.max_rel = std::max(rep.max_rel, rel_err(grads[ti](r, c), fd));
      ++rep.probes;
    }
  }
  return rep;
}

}  // namespace testsup
