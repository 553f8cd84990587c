#pragma once

#include <cstdint>
#include <string_view>

#include "cdegan/common.hpp"

namespace cdegan {

// Counter-based deterministic stream. Draws are a pure function of
// (seed, draw index); children derive from the parent's identity seed and
// a label, never from its position, so sibling consumers stay independent
// of each other's draw counts.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : seed_(seed) {}

  RngStream child(std::string_view label) const;
  RngStream child(uint64_t index) const;

  uint64_t next_u64();
  double uniform();      // [0, 1)
  double uniform_pm1();  // [-1, 1)
  double normal();       // Box-Muller, consumes two draws

  uint64_t seed() const { return seed_; }
  uint64_t counter() const { return counter_; }
  static RngStream restore(uint64_t seed, uint64_t counter);

 private:
  uint64_t seed_;
  uint64_t counter_ = 0;
};

struct GaussianRingSpec {
  int modes = 8;
  double radius = 2.0;
  double sigma = 0.02;
};

struct NoiseSpec {
  int dim = 256;
};

// modes x 2, center k at angle 2*pi*k/modes, counter-clockwise from (r, 0).
Matrix ring_centers(const GaussianRingSpec& spec);

// n x 2: uniform mode choice, then an isotropic gaussian around its center.
Matrix sample_real(const GaussianRingSpec& spec, int n, RngStream& rng);

// n x dim, each entry uniform in [-1, 1].
Matrix sample_noise(const NoiseSpec& spec, int n, RngStream& rng);

}  // namespace cdegan
