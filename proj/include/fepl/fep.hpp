// Free-energy state estimation and active-inference navigation.
//
// Under the Laplace and mean-field approximations the free energy reduces to
// precision-weighted squared prediction error, F = 1/2 e^T S^-1 e with
// e = o - g(x). Perception descends F in the belief x; action changes the
// true position so that observations match the goal-biased prediction.
#pragma once

#include <vector>

#include "fepl/genmodel.hpp"
#include "fepl/normalize.hpp"
#include "fepl/world.hpp"

namespace fepl {

struct Belief {
  NormPose x;
  double alpha{5e-3};
  /// Observation variance: one entry (shared) or one per beam.
  std::vector<double> sigma_o{1.0};

  /// Throws ValidationError.
  void validate(int beam_count) const;
  double precision(std::size_t beam) const noexcept {
    return 1.0 / (sigma_o.size() == 1 ? sigma_o[0] : sigma_o[beam]);
  }
};

struct GoalSpec {
  NormPose x_goal;
  NormScan o_goal;  // forward(model, x_goal)
  double beta{1.0};
  double sigma_x{1.0};

  static GoalSpec make(const GenModel& model, const NormPose& x_goal, double beta = 1.0,
                       double sigma_x = 1.0);
  /// beta / sigma_x, the sensor-space gain on the attractor error.
  double gain() const noexcept { return beta / sigma_x; }
};

struct ControlState {
  ActionCmd a;        // metres per second
  double gamma{1.0};
  double dt{0.5};
  double dxda{0.5};   // position change per unit action
  double a_max{1.0};  // per-component limit, m/s

  void validate() const;
};

double free_energy(const NormScan& o, const Belief& belief, const GenModel& model);

/// x <- clamp(x + alpha * J^T S^-1 (o - g(x))). Throws DivergenceError on a
/// non-finite update and DimensionMismatch on a wrong-length scan.
Belief perceive_step(const Belief& belief, const NormScan& o, const GenModel& model);

/// Perception plus the goal attractor alpha * J^T (beta / sigma_x) (o - o_goal).
Belief perceive_goal_step(const Belief& belief, const NormScan& o, const GoalSpec& goal,
                          const GenModel& model);

/// a <- clamp(a + scale * gamma * dxda * J^T S^-1 (o - g(x)), a_max); the
/// increment is computed in normalized units and scaled to m/s with the map
/// half-extents.
ControlState act_step(const ControlState& ctrl, const Belief& belief, const NormScan& o,
                      const GenModel& model, const Bounds& bounds);

/// Read-only handles shared by localization and navigation runs.
struct WorldContext {
  const WorldMap* map{nullptr};
  SensorConfig sensor;
  const GenModel* model{nullptr};
};

struct FepParams {
  double alpha{0.02};
  double beta{1.0};
  double sigma_o{1.0};
  double sigma_x{1.0};
  double gamma{0.2};
  double dt{0.5};
  double a_max{1.0};
  int max_iterations{500};
  double success_radius{0.8};
  /// Keep the action between iterations instead of resetting it to zero.
  bool accumulate_action{false};

  void validate() const;
};

struct TraceEntry {
  int iter{0};
  Pose2 truth;
  Pose2 belief;     // metres
  ActionCmd action;
  double error{0.0};      // |belief - truth|, metres
  double dist_goal{0.0};  // NaN outside navigation
  double free_energy{0.0};
};

/// One observe -> perceive_step cycle per entry of `true_path` (a constant
/// path is static localization, a moving one is teleport traversal). Entry
/// k holds the belief after k + 1 updates.
std::vector<TraceEntry> localize(const WorldContext& ctx, std::span<const Pose2> true_path,
                                 const Pose2& initial_belief, const FepParams& params, Rng& rng);

struct NavigationResult {
  std::vector<TraceEntry> trace;  // entry k: state at the start of iteration k
  bool success{false};
  int iterations{0};              // iterations needed when successful
};

/// Goal-directed loop: observe, goal-biased perception, action inference,
/// actuation; stops when the true position is within the success radius or
/// the iteration cap is reached. The belief starts at the true start.
NavigationResult navigate(const WorldContext& ctx, const Pose2& start, const Pose2& goal,
                          const FepParams& params, Rng& rng);

/// Same as navigate, writing into `out` as it goes so the trace up to a
/// failing step survives the exception.
void navigate_into(const WorldContext& ctx, const Pose2& start, const Pose2& goal,
                   const FepParams& params, Rng& rng, NavigationResult& out);

}  // namespace fepl
