#include <doctest.h>

#include <cmath>

#include "cdegan/fitness.hpp"

using namespace cdegan;

namespace {

MlpSpec linear_disc() {
  MlpSpec s;
  s.role = Role::discriminator;
  s.layers = {{2, 1, Activation::linear}};
  return s;
}

ParamSet const_disc(double c) {
  ParamSet p;
  p.tensors.push_back(Matrix::Zero(2, 1));
  Matrix b(1, 1);
  b(0, 0) = c;
  p.tensors.push_back(b);
  return p;
}

MlpSpec tiny_gen() {
  MlpSpec s;
  s.role = Role::generator;
  s.layers = {{3, 4, Activation::leaky_relu}, {4, 2, Activation::linear}};
  return s;
}

}  // namespace

TEST_CASE("diversity seam values") {
  Vector w1(1);
  w1 << 1.0;
  Vector n1(1);
  n1 << 1.0;
  CHECK(diversity_from_norms(w1, n1) == 0.0);

  n1 << 10.0;
  CHECK(diversity_from_norms(w1, n1) ==
        doctest::Approx(-2.302585092994046).epsilon(1e-15));

  n1 << std::exp(1.0);
  CHECK(diversity_from_norms(w1, n1) == doctest::Approx(-1.0).epsilon(1e-14));

  // zero norm hits the floor instead of -inf
  n1 << 0.0;
  CHECK(std::isfinite(diversity_from_norms(w1, n1)));
  CHECK(diversity_from_norms(w1, n1) ==
        doctest::Approx(-std::log(1e-12)).epsilon(1e-12));

  // larger counter-move norms always score worse
  Vector a(1), b(1);
  a << 2.0;
  b << 1.0;
  CHECK(diversity_from_norms(w1, a) < diversity_from_norms(w1, b));
}

TEST_CASE("quality against a coin-flip committee") {
  MlpSpec ds = linear_disc();
  std::vector<ParamSet> discs{const_disc(0.0)};
  MlpSpec gs = tiny_gen();
  RngStream rng(41);
  ParamSet gen = build_mlp(gs, rng);
  GaussianRingSpec ring;
  RngStream br(42);
  Matrix real = sample_real(ring, 16, br);
  Matrix z(16, 3);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 3; ++j) z(i, j) = br.uniform_pm1();

  GFitness f = fitness_generator(gs, gen, ds, discs, real, z, 0.1, 1.0);
  CHECK(f.quality == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(f.weights(0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.combined ==
        doctest::Approx(f.quality + 0.1 * f.diversity).epsilon(1e-12));
  REQUIRE(f.disc_means.size() == 1);
  CHECK(f.disc_means[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("committee weights come from the non-saturating losses") {
  MlpSpec ds = linear_disc();
  std::vector<ParamSet> discs{const_disc(-0.7), const_disc(1.2)};
  MlpSpec gs = tiny_gen();
  RngStream rng(43);
  ParamSet gen = build_mlp(gs, rng);
  GaussianRingSpec ring;
  RngStream br(44);
  Matrix real = sample_real(ring, 12, br);
  Matrix z(12, 3);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 3; ++j) z(i, j) = br.uniform_pm1();
  const double delta = 1.0, gamma = 0.25;

  GFitness f = fitness_generator(gs, gen, ds, discs, real, z, gamma, delta);

  // recompute the weighting by hand from the published pieces
  Matrix fake = eval_generator(gs, gen, z);
  Vector heuristic(2);
  Vector means(2);
  for (int i = 0; i < 2; ++i) {
    Matrix p = eval_discriminator(ds, discs[i], fake, DHead::sigmoid);
    means(i) = p.mean();
    heuristic(i) = -0.5 * p.array().log().mean();
  }
  SoftWeights sw = soft_weights(heuristic, delta);
  CHECK((f.weights - sw.w).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(f.disc_means[0] == doctest::Approx(means(0)).epsilon(1e-12));
  CHECK(f.disc_means[1] == doctest::Approx(means(1)).epsilon(1e-12));
  CHECK(f.quality == doctest::Approx(sw.w.dot(means)).epsilon(1e-12));

  Vector norms(2);
  norms << f.grad_norms[0], f.grad_norms[1];
  CHECK(f.diversity ==
        doctest::Approx(diversity_from_norms(sw.w, norms)).epsilon(1e-12));
  CHECK(f.combined ==
        doctest::Approx(f.quality + gamma * f.diversity).epsilon(1e-12));
}

TEST_CASE("discriminator fitness is the negated log gradient norm") {
  MlpSpec ds = linear_disc();
  ParamSet d = const_disc(0.4);
  GaussianRingSpec ring;
  RngStream br(45);
  Matrix real = sample_real(ring, 16, br);
  Matrix fake = Matrix::Constant(16, 2, 0.1);

  DFitness f = fitness_discriminator(ds, d, real, fake);
  CHECK(f.grad_norm > 0.0);
  CHECK(f.fitness == doctest::Approx(-std::log(f.grad_norm)).epsilon(1e-12));

  // independent recomputation of the cross-entropy gradient
  Tape tape;
  BoundNet on_real = forward_discriminator(tape, ds, d, real, DHead::sigmoid, true);
  Var on_fake = forward_from(tape, ds, on_real.params, tape.constant(fake),
                             DHead::sigmoid);
  Matrix ones = Matrix::Ones(16, 1);
  Var bce = neg(add(mean_all(cdegan::log(on_real.out)),
                    mean_all(cdegan::log(sub(tape.constant(ones), on_fake)))));
  tape.backward(bce);
  std::vector<Matrix> grads;
  for (Var p : on_real.params) grads.push_back(tape.grad(p));
  CHECK(f.grad_norm == doctest::Approx(l2_norm(grads)).epsilon(1e-12));
}

TEST_CASE("single-committee diversity coheres with discriminator fitness") {
  MlpSpec ds = linear_disc();
  ParamSet d = const_disc(-0.3);
  MlpSpec gs = tiny_gen();
  RngStream rng(46);
  ParamSet gen = build_mlp(gs, rng);
  GaussianRingSpec ring;
  RngStream br(47);
  Matrix real = sample_real(ring, 10, br);
  Matrix z(10, 3);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 3; ++j) z(i, j) = br.uniform_pm1();

  std::vector<ParamSet> discs{d};
  GFitness g = fitness_generator(gs, gen, ds, discs, real, z, 1.0, 1.0);
  Matrix fake = eval_generator(gs, gen, z);
  DFitness df = fitness_discriminator(ds, d, real, fake);
  // with one member the weight is 1 and both sides reduce to -log|grad|
  CHECK(g.diversity == doctest::Approx(df.fitness).epsilon(1e-12));
  CHECK(g.grad_norms[0] == doctest::Approx(df.grad_norm).epsilon(1e-12));
}

TEST_CASE("fitness evaluation is bitwise repeatable") {
  MlpSpec ds = linear_disc();
  std::vector<ParamSet> discs{const_disc(0.2), const_disc(-0.8)};
  MlpSpec gs = tiny_gen();
  RngStream rng(48);
  ParamSet gen = build_mlp(gs, rng);
  GaussianRingSpec ring;
  RngStream br(49);
  Matrix real = sample_real(ring, 8, br);
  Matrix z(8, 3);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 3; ++j) z(i, j) = br.uniform_pm1();

  GFitness a = fitness_generator(gs, gen, ds, discs, real, z, 0.1, 1.0);
  GFitness b = fitness_generator(gs, gen, ds, discs, real, z, 0.1, 1.0);
  CHECK(a.combined == b.combined);
  CHECK(a.quality == b.quality);
  CHECK(a.diversity == b.diversity);
}
