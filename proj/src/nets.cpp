#include "cdegan/nets.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace cdegan {

namespace {

constexpr double kInitStd = 0.02;

MlpSpec stack(Role role, std::vector<int> dims, Activation hidden) {
  MlpSpec s;
  s.role = role;
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    bool last = l + 2 == dims.size();
    s.layers.push_back({dims[l], dims[l + 1], last ? Activation::linear : hidden});
  }
  return s;
}

}  // namespace

MlpSpec mlp3_generator(int noise_dim, int data_dim) {
  return stack(Role::generator, {noise_dim, 128, 128, data_dim},
               Activation::relu);
}

MlpSpec mlp3_discriminator(int data_dim) {
  return stack(Role::discriminator, {data_dim, 128, 128, 1},
               Activation::leaky_relu);
}

MlpSpec mlp4_generator(int noise_dim, int data_dim) {
  return stack(Role::generator, {noise_dim, 128, 128, 128, data_dim},
               Activation::relu);
}

MlpSpec mlp4_discriminator(int data_dim) {
  return stack(Role::discriminator, {data_dim, 128, 128, 128, 1},
               Activation::relu);
}

void validate(const MlpSpec& spec) {
  if (spec.layers.empty()) throw ConfigError("mlp: no layers");
  for (size_t l = 0; l < spec.layers.size(); ++l) {
    const LayerSpec& ls = spec.layers[l];
    if (ls.in < 1 || ls.out < 1)
      throw ConfigError("mlp: layer " + std::to_string(l) +
                        " has non-positive width");
    if (l > 0 && spec.layers[l - 1].out != ls.in)
      throw ConfigError("mlp: layer " + std::to_string(l) +
                        " input width does not chain");
  }
  if (spec.role == Role::discriminator && spec.layers.back().out != 1)
    throw ConfigError("mlp: discriminator must end in one unit");
  if (spec.role == Role::discriminator &&
      spec.layers.back().act != Activation::linear)
    throw ConfigError("mlp: discriminator head is applied at eval time; "
                      "final layer must be linear");
}

int64_t ParamSet::param_count() const {
  int64_t n = 0;
  for (const Matrix& t : tensors) n += t.size();
  return n;
}

bool ParamSet::has_grads() const {
  if (grads.size() != tensors.size()) return false;
  for (size_t i = 0; i < grads.size(); ++i)
    if (grads[i].rows() != tensors[i].rows() ||
        grads[i].cols() != tensors[i].cols())
      return false;
  return true;
}

ParamSet build_mlp(const MlpSpec& spec, RngStream& rng) {
  validate(spec);
  ParamSet p;
  for (const LayerSpec& ls : spec.layers) {
    Matrix w(ls.in, ls.out);
    for (int r = 0; r < ls.in; ++r)
      for (int c = 0; c < ls.out; ++c) w(r, c) = kInitStd * rng.normal();
    p.tensors.push_back(std::move(w));
    p.tensors.push_back(Matrix::Zero(1, ls.out));
  }
  return p;
}

namespace {

Var apply_activation(Var x, Activation act, double slope) {
  switch (act) {
    case Activation::relu: return relu(x);
    case Activation::leaky_relu: return leaky_relu(x, slope);
    case Activation::tanh: return tanh(x);
    case Activation::sigmoid: return sigmoid(x);
    case Activation::linear: return x;
  }
  throw ContractError("unknown activation");
}

}  // namespace

std::vector<Var> bind_params(Tape& tape, const ParamSet& p, bool track) {
  std::vector<Var> vars;
  vars.reserve(p.tensors.size());
  for (const Matrix& t : p.tensors) vars.push_back(tape.leaf(t, track));
  return vars;
}

Var forward_from(Tape& tape, const MlpSpec& spec, std::span<const Var> params,
                 Var input, DHead head) {
  if (params.size() != 2 * spec.layers.size())
    throw ContractError("forward: parameter count does not match spec");
  if (tape.value(input).cols() != spec.layers.front().in)
    throw ContractError("forward: input width " +
                        std::to_string(tape.value(input).cols()) + " != " +
                        std::to_string(spec.layers.front().in));
  Var x = input;
  for (size_t l = 0; l < spec.layers.size(); ++l) {
    x = add_rowvec(matmul(x, params[2 * l]), params[2 * l + 1]);
    x = apply_activation(x, spec.layers[l].act, spec.leaky_slope);
  }
  if (spec.role == Role::discriminator && head == DHead::sigmoid)
    x = sigmoid(x);
  return x;
}

Var forward_with(Tape& tape, const MlpSpec& spec, std::span<const Var> params,
                 const Matrix& input, DHead head) {
  return forward_from(tape, spec, params, tape.constant(input), head);
}

BoundNet forward_generator(Tape& tape, const MlpSpec& spec, const ParamSet& p,
                           const Matrix& z, bool track) {
  if (spec.role != Role::generator)
    throw ContractError("forward_generator: spec role is not generator");
  BoundNet net;
  net.params = bind_params(tape, p, track);
  net.out = forward_with(tape, spec, net.params, z, DHead::raw);
  return net;
}

BoundNet forward_discriminator(Tape& tape, const MlpSpec& spec,
                               const ParamSet& p, const Matrix& x, DHead head,
                               bool track) {
  if (spec.role != Role::discriminator)
    throw ContractError("forward_discriminator: spec role is not discriminator");
  BoundNet net;
  net.params = bind_params(tape, p, track);
  net.out = forward_with(tape, spec, net.params, x, head);
  return net;
}

namespace {

Matrix eval_mlp(const MlpSpec& spec, const ParamSet& p, const Matrix& input) {
  if (p.tensors.size() != 2 * spec.layers.size())
    throw ContractError("eval: parameter count does not match spec");
  Matrix x = input;
  for (size_t l = 0; l < spec.layers.size(); ++l) {
    Matrix s = (x * p.tensors[2 * l]).rowwise() + p.tensors[2 * l + 1].row(0);
    switch (spec.layers[l].act) {
      case Activation::relu: x = s.cwiseMax(0.0); break;
      case Activation::leaky_relu:
        x = (s.array() > 0.0).select(s, spec.leaky_slope * s);
        break;
      case Activation::tanh: x = s.array().tanh().matrix(); break;
      case Activation::sigmoid:
        x = (1.0 / (1.0 + (-s.array()).exp()))
                .cwiseMax(kSigmoidClampLo)
                .cwiseMin(kSigmoidClampHi)
                .matrix();
        break;
      case Activation::linear: x = std::move(s); break;
    }
  }
  return x;
}

}  // namespace

Matrix eval_generator(const MlpSpec& spec, const ParamSet& p, const Matrix& z) {
  if (spec.role != Role::generator)
    throw ContractError("eval_generator: spec role is not generator");
  return eval_mlp(spec, p, z);
}

Matrix eval_discriminator(const MlpSpec& spec, const ParamSet& p,
                          const Matrix& x, DHead head) {
  if (spec.role != Role::discriminator)
    throw ContractError("eval_discriminator: spec role is not discriminator");
  Matrix out = eval_mlp(spec, p, x);
  if (head == DHead::sigmoid)
    out = (1.0 / (1.0 + (-out.array()).exp()))
              .cwiseMax(kSigmoidClampLo)
              .cwiseMin(kSigmoidClampHi)
              .matrix();
  return out;
}

void harvest_grads(Tape& tape, const BoundNet& net, ParamSet& p) {
  if (net.params.size() != p.tensors.size())
    throw ContractError("harvest: bound net does not match parameter set");
  p.grads.resize(p.tensors.size());
  for (size_t i = 0; i < net.params.size(); ++i)
    p.grads[i] = tape.grad(net.params[i]);
}

double grad_l2_norm(const ParamSet& p) {
  if (!p.has_grads())
    throw ContractError("grad_l2_norm: gradients missing or mis-shaped");
  return l2_norm(p.grads);
}

AdamState AdamState::init_like(const ParamSet& p, AdamHyper hyper) {
  AdamState s;
  s.hyper = hyper;
  for (const Matrix& t : p.tensors) {
    s.m.push_back(Matrix::Zero(t.rows(), t.cols()));
    s.v.push_back(Matrix::Zero(t.rows(), t.cols()));
  }
  return s;
}

void adam_step(ParamSet& p, AdamState& state) {
  if (!p.has_grads()) throw ContractError("adam_step: gradients missing");
  if (state.m.size() != p.tensors.size())
    throw ContractError("adam_step: optimizer state does not match parameters");
  const AdamHyper& h = state.hyper;
  ++state.step;
  double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
  double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
  for (size_t i = 0; i < p.tensors.size(); ++i) {
    const Matrix& g = p.grads[i];
    state.m[i] = h.beta1 * state.m[i] + (1.0 - h.beta1) * g;
    state.v[i] = h.beta2 * state.v[i] + (1.0 - h.beta2) * g.cwiseProduct(g);
    Matrix mhat = state.m[i] / c1;
    Matrix vhat = state.v[i] / c2;
    p.tensors[i].array() -=
        h.alpha * mhat.array() / (vhat.array().sqrt() + h.eps);
  }
  p.grads.clear();
}

const char* to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::leaky_relu: return "leaky_relu";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
    case Activation::linear: return "linear";
  }
  return "?";
}

const char* to_string(Role r) {
  return r == Role::generator ? "generator" : "discriminator";
}

namespace {

using nlohmann::json;

Activation activation_from(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "leaky_relu") return Activation::leaky_relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "linear") return Activation::linear;
  throw IoError("checkpoint: unknown activation '" + s + "'");
}

json matrix_to_json(const Matrix& m) {
  json j;
  j["shape"] = {m.rows(), m.cols()};
  std::vector<double> values;
  values.reserve(static_cast<size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
  j["values"] = std::move(values);
  return j;
}

Matrix matrix_from_json(const json& j) {
  auto shape = j.at("shape");
  Eigen::Index rows = shape.at(0).get<Eigen::Index>();
  Eigen::Index cols = shape.at(1).get<Eigen::Index>();
  const auto& values = j.at("values");
  if (static_cast<Eigen::Index>(values.size()) != rows * cols)
    throw IoError("checkpoint: tensor value count does not match shape");
  Matrix m(rows, cols);
  size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values.at(k++).get<double>();
  return m;
}

json tensors_to_json(const std::vector<Matrix>& ts) {
  json arr = json::array();
  for (const Matrix& t : ts) arr.push_back(matrix_to_json(t));
  return arr;
}

std::vector<Matrix> tensors_from_json(const json& arr) {
  std::vector<Matrix> ts;
  for (const auto& j : arr) ts.push_back(matrix_from_json(j));
  return ts;
}

}  // namespace

void save_net_checkpoint(const std::string& path, const NetCheckpoint& ckpt) {
  json spec;
  spec["role"] = to_string(ckpt.spec.role);
  spec["leaky_slope"] = ckpt.spec.leaky_slope;
  spec["layers"] = json::array();
  for (const LayerSpec& ls : ckpt.spec.layers)
    spec["layers"].push_back(
        {{"in", ls.in}, {"out", ls.out}, {"act", to_string(ls.act)}});

  json j;
  j["spec"] = std::move(spec);
  j["tensors"] = tensors_to_json(ckpt.params.tensors);
  j["adam"] = {{"step", ckpt.adam.step},
               {"alpha", ckpt.adam.hyper.alpha},
               {"beta1", ckpt.adam.hyper.beta1},
               {"beta2", ckpt.adam.hyper.beta2},
               {"eps", ckpt.adam.hyper.eps},
               {"m", tensors_to_json(ckpt.adam.m)},
               {"v", tensors_to_json(ckpt.adam.v)}};
  j["rng_state"] = {{"seed", ckpt.rng_seed}, {"counter", ckpt.rng_counter}};

  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump();
  out.close();
  if (!out) throw IoError("short write to '" + path + "'");
}

NetCheckpoint load_net_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("checkpoint '" + path + "': " + e.what());
  }
  try {
    NetCheckpoint ckpt;
    const json& spec = j.at("spec");
    std::string role = spec.at("role").get<std::string>();
    ckpt.spec.role =
        role == "generator" ? Role::generator : Role::discriminator;
    ckpt.spec.leaky_slope = spec.at("leaky_slope").get<double>();
    for (const auto& lj : spec.at("layers"))
      ckpt.spec.layers.push_back(
          {lj.at("in").get<int>(), lj.at("out").get<int>(),
           activation_from(lj.at("act").get<std::string>())});
    validate(ckpt.spec);

    ckpt.params.tensors = tensors_from_json(j.at("tensors"));
    const json& adam = j.at("adam");
    ckpt.adam.step = adam.at("step").get<int64_t>();
    ckpt.adam.hyper.alpha = adam.at("alpha").get<double>();
    ckpt.adam.hyper.beta1 = adam.at("beta1").get<double>();
    ckpt.adam.hyper.beta2 = adam.at("beta2").get<double>();
    ckpt.adam.hyper.eps = adam.at("eps").get<double>();
    ckpt.adam.m = tensors_from_json(adam.at("m"));
    ckpt.adam.v = tensors_from_json(adam.at("v"));
    ckpt.rng_seed = j.at("rng_state").at("seed").get<uint64_t>();
    ckpt.rng_counter = j.at("rng_state").at("counter").get<uint64_t>();

    if (ckpt.params.tensors.size() != 2 * ckpt.spec.layers.size() ||
        ckpt.adam.m.size() != ckpt.params.tensors.size() ||
        ckpt.adam.v.size() != ckpt.params.tensors.size())
      throw IoError("checkpoint '" + path + "': tensor lists do not line up");
    return ckpt;
  } catch (const json::exception& e) {
    throw IoError("checkpoint '" + path + "': " + e.what());
  }
}

}  // namespace cdegan
