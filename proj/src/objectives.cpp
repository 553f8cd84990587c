#include "cdegan/objectives.hpp"

#include <cmath>

namespace cdegan {

const char* to_string(GMutation m) {
  switch (m) {
    case GMutation::minimax: return "minimax";
    case GMutation::heuristic: return "heuristic";
    case GMutation::least_squares: return "least_squares";
  }
  return "?";
}

const char* to_string(DMutation m) {
  return m == DMutation::minimax ? "minimax" : "least_squares";
}

SoftWeights soft_weights(const Vector& losses, double delta) {
  if (losses.size() < 1) throw ContractError("soft_weights: empty loss vector");
  Eigen::ArrayXd u = delta * losses.array();
  Eigen::ArrayXd e = (u - u.maxCoeff()).exp();
  SoftWeights sw;
  sw.delta = delta;
  sw.w = (e / e.sum()).matrix();
  return sw;
}

GLossResult g_loss(Tape& tape, GMutation kind, const MlpSpec& g_spec,
                   const ParamSet& gen, const MlpSpec& d_spec,
                   std::span<const ParamSet> discs, const Matrix& z,
                   double delta) {
  if (discs.empty()) throw ContractError("g_loss: no discriminators");
  GLossResult res;
  res.gen_params = bind_params(tape, gen, true);
  Var fake = forward_with(tape, g_spec, res.gen_params, z, DHead::raw);
  Matrix ones = Matrix::Ones(z.rows(), 1);

  std::vector<Var> parts;
  parts.reserve(discs.size());
  for (const ParamSet& d : discs) {
    // discriminators enter as constants; the fake batch stays attached to
    // the generator through forward_from
    std::vector<Var> dp = bind_params(tape, d, false);
    Var piece;
    switch (kind) {
      case GMutation::minimax: {
        Var dg = forward_from(tape, d_spec, dp, fake, DHead::sigmoid);
        piece = scalar_mul(0.5, mean_all(log(sub(tape.constant(ones), dg))));
        break;
      }
      case GMutation::heuristic: {
        Var dg = forward_from(tape, d_spec, dp, fake, DHead::sigmoid);
        piece = scalar_mul(-0.5, mean_all(log(dg)));
        break;
      }
      case GMutation::least_squares: {
        Var dg = forward_from(tape, d_spec, dp, fake, DHead::raw);
        piece = mean_all(square(sub(dg, tape.constant(ones))));
        break;
      }
    }
    parts.push_back(piece);
  }

  Var lvec = concat_scalars(parts);
  Var w = softmax_col(lvec, delta);
  res.loss = weighted_sum(w, lvec);
  res.weights = tape.value(w).col(0);
  for (Var p : parts) res.per_disc.push_back(tape.value(p)(0, 0));
  return res;
}

DLossResult d_loss(Tape& tape, DMutation kind, const MlpSpec& d_spec,
                   const ParamSet& disc, const Matrix& real,
                   const Matrix& fake) {
  if (real.rows() != fake.rows())
    throw ContractError("d_loss: real and fake batch sizes differ");
  DLossResult res;
  res.disc_params = bind_params(tape, disc, true);
  Matrix ones = Matrix::Ones(real.rows(), 1);
  switch (kind) {
    case DMutation::minimax: {
      Var dx = forward_with(tape, d_spec, res.disc_params, real, DHead::sigmoid);
      Var dg = forward_with(tape, d_spec, res.disc_params, fake, DHead::sigmoid);
      res.objective = add(mean_all(log(dx)),
                          mean_all(log(sub(tape.constant(ones), dg))));
      res.train_loss = neg(res.objective);
      break;
    }
    case DMutation::least_squares: {
      Var dx = forward_with(tape, d_spec, res.disc_params, real, DHead::raw);
      Var dg = forward_with(tape, d_spec, res.disc_params, fake, DHead::raw);
      res.objective =
          add(scalar_mul(0.5, mean_all(square(sub(dx, tape.constant(ones))))),
              scalar_mul(0.5, mean_all(square(dg))));
      res.train_loss = res.objective;
      break;
    }
  }
  return res;
}

Var gradient_penalty(Tape& tape, const MlpSpec& d_spec, const ParamSet& disc,
                     std::span<const Var> disc_params, const Matrix& real,
                     const Matrix& fake, RngStream& rng, double lambda) {
  if (lambda == 0.0) return tape.constant(Matrix::Zero(1, 1));
  if (real.rows() != fake.rows() || real.cols() != fake.cols())
    throw ContractError("gradient_penalty: batch shapes differ");
  if (disc_params.size() != 2 * d_spec.layers.size())
    throw ContractError("gradient_penalty: parameter count does not match spec");
  for (size_t l = 0; l + 1 < d_spec.layers.size(); ++l) {
    Activation a = d_spec.layers[l].act;
    if (a != Activation::relu && a != Activation::leaky_relu &&
        a != Activation::linear)
      throw ContractError(
          "gradient_penalty: needs piecewise-linear hidden activations");
  }

  const Eigen::Index B = real.rows();
  Matrix xhat(B, real.cols());
  for (Eigen::Index r = 0; r < B; ++r) {
    double u = rng.uniform();
    xhat.row(r) = u * real.row(r) + (1.0 - u) * fake.row(r);
  }

  // Plain forward over xhat for the activation masks; they are constant in a
  // neighborhood, so their parameter dependence drops out exactly.
  size_t L = d_spec.layers.size();
  std::vector<Matrix> masks(L);
  {
    Matrix x = xhat;
    for (size_t l = 0; l < L; ++l) {
      Matrix s = (x * disc.tensors[2 * l]).rowwise() +
                 disc.tensors[2 * l + 1].row(0);
      switch (d_spec.layers[l].act) {
        case Activation::relu:
          masks[l] = (s.array() > 0.0).cast<double>().matrix();
          x = s.cwiseMax(0.0);
          break;
        case Activation::leaky_relu:
          masks[l] = (s.array() > 0.0)
                         .select(Matrix::Ones(s.rows(), s.cols()),
                                 Matrix::Constant(s.rows(), s.cols(),
                                                  d_spec.leaky_slope));
          x = (s.array() > 0.0).select(s, d_spec.leaky_slope * s);
          break;
        case Activation::linear:
          masks[l] = Matrix::Ones(s.rows(), s.cols());
          x = std::move(s);
          break;
        default:
          throw ContractError("gradient_penalty: unexpected activation");
      }
    }
  }

  // Input gradient of the raw score, built backwards out of the same weight
  // leaves so the penalty trains them.
  Var v = matmul_bt(tape.constant(Matrix::Ones(B, 1)),
                    disc_params[2 * (L - 1)]);
  for (size_t l = L - 1; l-- > 0;) {
    v = mul(v, tape.constant(masks[l]));
    v = matmul_bt(v, disc_params[2 * l]);
  }

  Var norms = rows_l2norm(v);
  Var excess = sub(norms, tape.constant(Matrix::Ones(B, 1)));
  return scalar_mul(lambda, mean_all(square(excess)));
}

}  // namespace cdegan
