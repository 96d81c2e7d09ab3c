#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

namespace varmeta {

/// Portable seeded generator: std::mt19937_64 (whose output sequence is fixed
/// by the standard) with uniforms built from the top 53 bits and normals
/// from the Box-Muller transform. std::*_distribution is avoided because its
/// output differs between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open_low() { return 1.0 - uniform(); }
  double normal();
  Eigen::VectorXd normal_vector(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace varmeta
