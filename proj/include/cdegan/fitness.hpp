#pragma once

#include <span>
#include <vector>

#include "cdegan/objectives.hpp"

namespace cdegan {

// Generator score against the discriminator committee. quality is the
// weighted mean sigmoid score of generated points; diversity is the negated
// weighted log gradient norm of each discriminator's cross-entropy counter
// move (big counter moves mean the generator collapsed somewhere easy to
// punish). combined = quality + gamma * diversity, higher is better. One set
// of soft weights, taken from the per-discriminator non-saturating losses,
// feeds both terms.
struct GFitness {
  double quality = 0.0;
  double diversity = 0.0;
  double combined = 0.0;
  Vector weights;
  std::vector<double> disc_means;  // mean D_i(G(z)), sigmoid head
  std::vector<double> grad_norms;  // cross-entropy gradient norms
};

GFitness fitness_generator(const MlpSpec& g_spec, const ParamSet& gen,
                           const MlpSpec& d_spec,
                           std::span<const ParamSet> discs, const Matrix& real,
                           const Matrix& z, double gamma, double delta);

// -sum_i w_i log(max(norm_i, 1e-12)); the seam the full pipeline feeds.
double diversity_from_norms(const Vector& w, const Vector& norms);

// Discriminator score: -log of its cross-entropy gradient norm on the shared
// evaluation batch. Selection order over this is configurable upstream.
struct DFitness {
  double fitness = 0.0;
  double grad_norm = 0.0;
};

DFitness fitness_discriminator(const MlpSpec& d_spec, const ParamSet& disc,
                               const Matrix& real, const Matrix& fake);

}  // namespace cdegan
