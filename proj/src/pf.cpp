#include "fepl/pf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fepl/error.hpp"

namespace fepl {

double ParticleSet::weight_sum() const noexcept {
  double s = 0.0;
  for (const Particle& p : particles) s += p.weight;
  return s;
}

double ParticleSet::effective_sample_size() const noexcept {
  double s2 = 0.0;
  for (const Particle& p : particles) s2 += p.weight * p.weight;
  return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

void PfConfig::validate(int beam_count) const {
  if (n_particles < 2) throw ValidationError("pf.n must be >= 2");
  if (!(diffusion_sigma >= 0.0)) throw ValidationError("pf.diffusion_sigma must be >= 0");
  if (!(likelihood_sigma > 0.0)) throw ValidationError("pf.likelihood_sigma must be > 0");
  if (beam_stride < 1 || beam_stride > beam_count) {
    throw ValidationError("pf.beam_stride must be in [1, " + std::to_string(beam_count) + "]");
  }
  if (!(ess_threshold > 0.0 && ess_threshold <= 1.0)) {
    throw ValidationError("pf.ess_threshold must be in (0, 1]");
  }
}

ParticleSet init_uniform(const WorldMap& map, const PfConfig& cfg, Rng& rng) {
  if (cfg.n_particles < 2) throw ValidationError("pf.n must be >= 2");
  ParticleSet ps;
  ps.particles.reserve(static_cast<std::size_t>(cfg.n_particles));
  const double w = 1.0 / cfg.n_particles;
  for (int i = 0; i < cfg.n_particles; ++i) ps.particles.push_back({sample_free_pose(map, rng), w});
  return ps;
}

ParticleSet predict(const ParticleSet& ps, const WorldMap& map, const PfConfig& cfg, Rng& rng) {
  ParticleSet out = ps;
  if (cfg.diffusion_sigma == 0.0) return out;
  std::normal_distribution<double> jitter(0.0, cfg.diffusion_sigma);
  for (Particle& p : out.particles) {
    const double dx = jitter(rng);
    const double dy = jitter(rng);
    p.pose = project_to_free(map, {p.pose.x + dx, p.pose.y + dy}, p.pose);
  }
  return out;
}

ParticleSet update_weights(const ParticleSet& ps, const Scan& scan, const WorldMap& map,
                           const SensorConfig& sensor, const PfConfig& cfg) {
  if (static_cast<int>(scan.ranges.size()) != sensor.beam_count) {
    throw DimensionMismatch("scan has " + std::to_string(scan.ranges.size()) + " beams, expected " +
                            std::to_string(sensor.beam_count));
  }
  const double inv2s2 = 1.0 / (2.0 * cfg.likelihood_sigma * cfg.likelihood_sigma);
  ParticleSet out = ps;
  std::vector<double> logw(out.size());
  double max_logw = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::vector<double> expected = expected_ranges_strided(map, out.particles[i].pose, sensor, cfg.beam_stride);
    double ss = 0.0;
    for (std::size_t j = 0; j < expected.size(); ++j) {
      const double d = scan.ranges[j * static_cast<std::size_t>(cfg.beam_stride)] - expected[j];
      ss += d * d;
    }
    logw[i] = std::log(out.particles[i].weight) - ss * inv2s2;
    if (std::isfinite(logw[i])) max_logw = std::max(max_logw, logw[i]);
  }
  double total = 0.0;
  if (std::isfinite(max_logw)) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double w = std::isfinite(logw[i]) ? std::exp(logw[i] - max_logw) : 0.0;
      out.particles[i].weight = w;
      total += w;
    }
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    const double w = 1.0 / static_cast<double>(out.size());
    for (Particle& p : out.particles) p.weight = w;
    ++out.uniform_resets;
    return out;
  }
  for (Particle& p : out.particles) p.weight /= total;
  return out;
}

ParticleSet resample_systematic(const ParticleSet& ps, Rng& rng, std::size_t count) {
  const std::size_t n = count == 0 ? ps.size() : count;
  ParticleSet out;
  out.uniform_resets = ps.uniform_resets;
  out.particles.reserve(n);
  if (ps.particles.empty()) return out;
  const double step = 1.0 / static_cast<double>(n);
  std::uniform_real_distribution<double> u(0.0, step);
  const double u0 = u(rng);
  const double total = ps.weight_sum();
  std::size_t i = 0;
  double cumulative = ps.particles[0].weight / total;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = u0 + static_cast<double>(k) * step;
    while (target > cumulative && i + 1 < ps.size()) {
      ++i;
      cumulative += ps.particles[i].weight / total;
    }
    out.particles.push_back({ps.particles[i].pose, step});
  }
  return out;
}

Pose2 estimate(const ParticleSet& ps) {
  double sx = 0.0, sy = 0.0, sw = 0.0;
  for (const Particle& p : ps.particles) {
    sx += p.weight * p.pose.x;
    sy += p.weight * p.pose.y;
    sw += p.weight;
  }
  return {sx / sw, sy / sw};
}

ParticleSet pf_step(const ParticleSet& ps, const Scan& scan, const WorldMap& map,
                    const SensorConfig& sensor, const PfConfig& cfg, Rng& rng) {
  ParticleSet next = update_weights(predict(ps, map, cfg, rng), scan, map, sensor, cfg);
  if (next.effective_sample_size() < cfg.ess_threshold * static_cast<double>(next.size())) {
    next = resample_systematic(next, rng);
  }
  return next;
}

}  // namespace fepl
