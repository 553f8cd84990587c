#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cdegan/autodiff.hpp"
#include "cdegan/data.hpp"

namespace cdegan {

enum class Activation { relu, leaky_relu, tanh, sigmoid, linear };
enum class Role { generator, discriminator };

// Discriminator output mode. One parameter set serves both: sigmoid for the
// log-loss family, raw for the least-squares family. Not a parameter.
enum class DHead { sigmoid, raw };

struct LayerSpec {
  int in = 0;
  int out = 0;
  Activation act = Activation::linear;
};

struct MlpSpec {
  Role role = Role::generator;
  std::vector<LayerSpec> layers;
  double leaky_slope = 0.2;
};

// Benchmark presets. Generators map noise to 2-d points through relu stacks
// with a linear head; discriminators score points, head applied at eval.
MlpSpec mlp3_generator(int noise_dim = 256, int data_dim = 2);
MlpSpec mlp3_discriminator(int data_dim = 2);
MlpSpec mlp4_generator(int noise_dim = 256, int data_dim = 2);
MlpSpec mlp4_discriminator(int data_dim = 2);

void validate(const MlpSpec& spec);

// Parameters interleaved W1, b1, W2, b2, ... where W is (in x out) and b is
// (1 x out). grads mirrors tensors once a backward pass deposits into it.
struct ParamSet {
  std::vector<Matrix> tensors;
  std::vector<Matrix> grads;

  int64_t param_count() const;
  bool has_grads() const;
};

// Weights N(0, 0.02^2) drawn row-major, biases zero.
ParamSet build_mlp(const MlpSpec& spec, RngStream& rng);

// A network planted on a tape: parameter leaves in ParamSet order plus the
// output node.
struct BoundNet {
  std::vector<Var> params;
  Var out;
};

// Plants the parameter leaves once; run the chain over any number of input
// batches with forward_with so their gradients accumulate into one place.
// track=false plants parameters as constants (no gradients accumulate).
std::vector<Var> bind_params(Tape& tape, const ParamSet& p, bool track);
// forward_from keeps the input attached when it is itself an upstream node
// (a generator output feeding a discriminator).
Var forward_from(Tape& tape, const MlpSpec& spec, std::span<const Var> params,
                 Var input, DHead head);
Var forward_with(Tape& tape, const MlpSpec& spec, std::span<const Var> params,
                 const Matrix& input, DHead head);

// One-shot conveniences over bind_params + forward_with.
BoundNet forward_generator(Tape& tape, const MlpSpec& spec, const ParamSet& p,
                           const Matrix& z, bool track);
BoundNet forward_discriminator(Tape& tape, const MlpSpec& spec,
                               const ParamSet& p, const Matrix& x, DHead head,
                               bool track);

// Tape-free forward for sampling and scoring; identical arithmetic to the
// tape path, including the sigmoid clamp.
Matrix eval_generator(const MlpSpec& spec, const ParamSet& p, const Matrix& z);
Matrix eval_discriminator(const MlpSpec& spec, const ParamSet& p,
                          const Matrix& x, DHead head);

// Copies each tracked parameter's gradient into p.grads.
void harvest_grads(Tape& tape, const BoundNet& net, ParamSet& p);

double grad_l2_norm(const ParamSet& p);

struct AdamHyper {
  double alpha = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.99;
  double eps = 1e-8;
};

struct AdamState {
  AdamHyper hyper;
  int64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;

  static AdamState init_like(const ParamSet& p, AdamHyper hyper);
};

// One bias-corrected update from p.grads; clears the grads it consumed.
void adam_step(ParamSet& p, AdamState& state);

struct NetCheckpoint {
  MlpSpec spec;
  ParamSet params;
  AdamState adam;
  uint64_t rng_seed = 0;
  uint64_t rng_counter = 0;
};

// Flat JSON, values written so that reload is bit-exact.
void save_net_checkpoint(const std::string& path, const NetCheckpoint& ckpt);
NetCheckpoint load_net_checkpoint(const std::string& path);

const char* to_string(Activation a);
const char* to_string(Role r);

}  // namespace cdegan
