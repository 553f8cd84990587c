#pragma once

#include <span>
#include <vector>

#include "cdegan/nets.hpp"

namespace cdegan {

// Generator update variants. minimax drives log(1-D) down, heuristic drives
// log(D) up (non-saturating), least_squares pulls the raw score to 1.
enum class GMutation { minimax, heuristic, least_squares };

// Discriminator update variants: the log objective (maximized) and the
// least-squares objective (minimized, raw head).
enum class DMutation { minimax, least_squares };

const char* to_string(GMutation m);
const char* to_string(DMutation m);

// exp(delta*l_i) / sum_t exp(delta*l_t), computed max-shifted. delta=0
// degenerates to uniform weighting.
struct SoftWeights {
  Vector w;
  double delta = 1.0;
};
SoftWeights soft_weights(const Vector& losses, double delta);

// Weighted generator loss against a committee of discriminators. The weights
// are the softmax of the per-discriminator losses and sit inside the graph,
// so gradients flow through them.
struct GLossResult {
  Var loss;                       // scalar, minimize
  std::vector<Var> gen_params;    // tracked generator leaves
  std::vector<double> per_disc;   // l_i values
  Vector weights;                 // softmax values
};
GLossResult g_loss(Tape& tape, GMutation kind, const MlpSpec& g_spec,
                   const ParamSet& gen, const MlpSpec& d_spec,
                   std::span<const ParamSet> discs, const Matrix& z,
                   double delta);

// Single-discriminator objective on a real batch and a detached fake batch.
// objective keeps the textbook orientation (minimax is maximized); train_loss
// is what one optimizer step minimizes.
struct DLossResult {
  Var objective;
  Var train_loss;
  std::vector<Var> disc_params;   // tracked discriminator leaves
};
DLossResult d_loss(Tape& tape, DMutation kind, const MlpSpec& d_spec,
                   const ParamSet& disc, const Matrix& real,
                   const Matrix& fake);

// lambda * mean over rows of (|grad_xh D_raw(xh)| - 1)^2 with xh drawn on the
// segment between paired real and fake rows. Differentiates the raw head;
// requires piecewise-linear hidden activations, whose masks are locally
// constant and enter the graph as constants. disc_params must be the bound
// leaves the caller is training so the penalty accumulates into them.
Var gradient_penalty(Tape& tape, const MlpSpec& d_spec, const ParamSet& disc,
                     std::span<const Var> disc_params, const Matrix& real,
                     const Matrix& fake, RngStream& rng, double lambda);

}  // namespace cdegan
