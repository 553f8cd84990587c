#include "cdegan/fitness.hpp"

#include <cmath>

namespace cdegan {

namespace {

constexpr double kNormFloor = 1e-12;

struct BceProbe {
  double mean_dg = 0.0;       // mean sigmoid score of the fake batch
  double heuristic_loss = 0.0;
  double grad_norm = 0.0;     // d/dphi of the cross-entropy
};

// One tape serves the cross-entropy backward pass and, as side reads, the
// quantities the generator fitness needs about this discriminator.
BceProbe bce_probe(const MlpSpec& d_spec, const ParamSet& disc,
                   const Matrix& real, const Matrix& fake) {
  Tape tape;
  tape.reserve(48);
  std::vector<Var> dp = bind_params(tape, disc, true);
  Var dx = forward_with(tape, d_spec, dp, real, DHead::sigmoid);
  Var dg = forward_with(tape, d_spec, dp, fake, DHead::sigmoid);
  Var log_dg = log(dg);
  Matrix ones = Matrix::Ones(real.rows(), 1);
  Var bce = neg(add(mean_all(log(dx)),
                    mean_all(log(sub(tape.constant(ones), dg)))));

  BceProbe probe;
  probe.mean_dg = tape.value(dg).mean();
  probe.heuristic_loss = -0.5 * tape.value(log_dg).mean();
  tape.backward(bce);
  double ss = 0.0;
  for (Var p : dp) ss += tape.grad(p).squaredNorm();
  probe.grad_norm = std::sqrt(ss);
  return probe;
}

}  // namespace

double diversity_from_norms(const Vector& w, const Vector& norms) {
  if (w.size() != norms.size())
    throw ContractError("diversity_from_norms: length mismatch");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i)
    acc += w(i) * std::log(std::max(norms(i), kNormFloor));
  return -acc;
}

GFitness fitness_generator(const MlpSpec& g_spec, const ParamSet& gen,
                           const MlpSpec& d_spec,
                           std::span<const ParamSet> discs, const Matrix& real,
                           const Matrix& z, double gamma, double delta) {
  if (discs.empty()) throw ContractError("fitness_generator: no discriminators");
  Matrix fake = eval_generator(g_spec, gen, z);

  GFitness f;
  Vector heuristic(discs.size());
  Vector norms(discs.size());
  for (size_t i = 0; i < discs.size(); ++i) {
    BceProbe probe = bce_probe(d_spec, discs[i], real, fake);
    f.disc_means.push_back(probe.mean_dg);
    f.grad_norms.push_back(probe.grad_norm);
    heuristic(static_cast<Eigen::Index>(i)) = probe.heuristic_loss;
    norms(static_cast<Eigen::Index>(i)) = probe.grad_norm;
  }

  f.weights = soft_weights(heuristic, delta).w;
  f.quality = 0.0;
  for (size_t i = 0; i < discs.size(); ++i)
    f.quality += f.weights(static_cast<Eigen::Index>(i)) * f.disc_means[i];
  f.diversity = diversity_from_norms(f.weights, norms);
  f.combined = f.quality + gamma * f.diversity;
  return f;
}

DFitness fitness_discriminator(const MlpSpec& d_spec, const ParamSet& disc,
                               const Matrix& real, const Matrix& fake) {
  BceProbe probe = bce_probe(d_spec, disc, real, fake);
  DFitness f;
  f.grad_norm = probe.grad_norm;
  f.fitness = -std::log(std::max(probe.grad_norm, kNormFloor));
  return f;
}

}  // namespace cdegan
