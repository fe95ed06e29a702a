#pragma once

#include <cstdint>
#include <random>

namespace bvarsv {

/// Seeded random stream. Every sampler in the library takes one of these
/// explicitly; a stream must not be shared between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0x5eed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Exponential with the given rate.
  double exponential(double rate);

  /// Gamma with shape/rate parametrisation.
  double gamma(double shape, double rate);

  /// log of a Gamma(shape, 1) draw; finite even for shapes far below 1e-3.
  double log_gamma_unit(double shape);

  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Deterministic per-task seed: base seed xor task index, mixed through
/// splitmix64 so that neighbouring tasks get unrelated streams.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t task_index);

}  // namespace bvarsv
