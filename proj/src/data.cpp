#include "cdegan/data.hpp"

#include <cmath>
#include <numbers>

namespace cdegan {

namespace {

constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;

uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ull;
  }
  return h;
}

uint64_t combine(uint64_t a, uint64_t b) {
  return mix64(a ^ (b + kGamma + (a << 6) + (a >> 2)));
}

}  // namespace

RngStream RngStream::child(std::string_view label) const {
  return RngStream(combine(seed_, fnv1a(label)));
}

RngStream RngStream::child(uint64_t index) const {
  return RngStream(combine(seed_, mix64(index + 1)));
}

uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(seed_ + counter_ * kGamma);
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform_pm1() { return 2.0 * uniform() - 1.0; }

double RngStream::normal() {
  // u1 in (0, 1] keeps the log finite
  double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::restore(uint64_t seed, uint64_t counter) {
  RngStream s(seed);
  s.counter_ = counter;
  return s;
}

Matrix ring_centers(const GaussianRingSpec& spec) {
  if (spec.modes < 1) throw ConfigError("ring: modes must be >= 1");
  Matrix c(spec.modes, 2);
  for (int k = 0; k < spec.modes; ++k) {
    double angle = 2.0 * std::numbers::pi * k / spec.modes;
    c(k, 0) = spec.radius * std::cos(angle);
    c(k, 1) = spec.radius * std::sin(angle);
  }
  return c;
}

Matrix sample_real(const GaussianRingSpec& spec, int n, RngStream& rng) {
  if (n < 0) throw ConfigError("sample_real: negative count");
  Matrix centers = ring_centers(spec);
  Matrix out(n, 2);
  for (int i = 0; i < n; ++i) {
    int k = static_cast<int>(rng.next_u64() % static_cast<uint64_t>(spec.modes));
    out(i, 0) = centers(k, 0) + spec.sigma * rng.normal();
    out(i, 1) = centers(k, 1) + spec.sigma * rng.normal();
  }
  return out;
}

Matrix sample_noise(const NoiseSpec& spec, int n, RngStream& rng) {
  if (n < 0) throw ConfigError("sample_noise: negative count");
  if (spec.dim < 1) throw ConfigError("noise: dim must be >= 1");
  Matrix out(n, spec.dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < spec.dim; ++j) out(i, j) = rng.uniform_pm1();
  return out;
}

}  // namespace cdegan
