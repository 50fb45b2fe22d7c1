// Shared helpers for the unit tests.
#pragma once

#include <random>

#include "fepl/genmodel.hpp"

namespace fepl::test {

/// A decoder small enough for exhaustive checks: 32 beams, 4 channels.
inline Architecture small_arch() { return default_architecture(32, 4, 16); }

/// Glorot weights plus random biases, so every ReLU sees both signs.
inline GenModel random_model(const Architecture& arch, std::uint64_t seed) {
  Rng rng(seed);
  GenModel m = init_model(arch, rng);
  std::normal_distribution<double> n(0.0, 0.05);
  for (double& p : m.mutable_parameters()) p += n(rng);
  return m;
}

inline NormPose random_pose(Rng& rng, double lim = 0.95) {
  std::uniform_real_distribution<double> u(-lim, lim);
  const double a = u(rng);
  return {a, u(rng)};
}

}  // namespace fepl::test
