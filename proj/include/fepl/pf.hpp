// Odometry-free Monte-Carlo localization baseline: random-walk prediction,
// laser-only likelihood weighting, systematic resampling.
#pragma once

#include <vector>

#include "fepl/world.hpp"

namespace fepl {

struct Particle {
  Pose2 pose;
  double weight{0.0};
};

struct ParticleSet {
  std::vector<Particle> particles;
  int uniform_resets{0};  // times update_weights fell back to uniform weights

  std::size_t size() const noexcept { return particles.size(); }
  double weight_sum() const noexcept;
  /// 1 / sum w^2 of the (normalized) weights.
  double effective_sample_size() const noexcept;
};

struct PfConfig {
  int n_particles{500};
  double diffusion_sigma{0.3};
  double likelihood_sigma{0.5};
  int beam_stride{8};
  double ess_threshold{0.5};

  /// diffusion_sigma may be 0 (no motion); other sigmas must be positive.
  void validate(int beam_count) const;
};

ParticleSet init_uniform(const WorldMap& map, const PfConfig& cfg, Rng& rng);

/// Gaussian random walk per axis, then projection onto the free space.
ParticleSet predict(const ParticleSet& ps, const WorldMap& map, const PfConfig& cfg, Rng& rng);

/// Multiplies weights by the strided-beam Gaussian likelihood of `scan`
/// against noise-free expected scans, in the log domain. If every
/// likelihood underflows or is non-finite the weights are reset to uniform.
ParticleSet update_weights(const ParticleSet& ps, const Scan& scan, const WorldMap& map,
                           const SensorConfig& sensor, const PfConfig& cfg);

/// Low-variance resampling from a single uniform draw. `count` defaults to
/// the current size.
ParticleSet resample_systematic(const ParticleSet& ps, Rng& rng, std::size_t count = 0);

/// Weighted mean position.
Pose2 estimate(const ParticleSet& ps);

/// Full predict -> update -> (resample if ESS < threshold * n) cycle.
ParticleSet pf_step(const ParticleSet& ps, const Scan& scan, const WorldMap& map,
                    const SensorConfig& sensor, const PfConfig& cfg, Rng& rng);

}  // namespace fepl
