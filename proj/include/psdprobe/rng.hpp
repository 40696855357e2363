#pragma once

#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

namespace psdprobe {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// SplitMix64: the state is a counter advanced by a fixed odd increment and
// every output is a bijective mix of it, so streams are cheap to split.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Independent child stream keyed by (current state, stream id).
  SplitMix64 split(std::uint64_t stream) const {
    return SplitMix64(mix(state_ ^ mix(stream + 0x632be59bd9b4e019ULL)));
  }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double gaussian() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::uint64_t bits() { return engine_(); }

  Vector gaussian_vector(Index n);
  Matrix gaussian_matrix(Index rows, Index cols);
  // Uniform point on the unit sphere in R^n.
  Vector sphere(Index n);

  Rng split(std::uint64_t stream) const {
    Rng child(0);
    child.engine_ = engine_.split(stream);
    return child;
  }

 private:
  SplitMix64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Deterministic seed derivation for trial i of an experiment.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return SplitMix64::mix(base * 0x9e3779b97f4a7c15ULL + SplitMix64::mix(tag + 1));
}

}  // namespace psdprobe
