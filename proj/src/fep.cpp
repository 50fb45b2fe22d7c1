#include "fepl/fep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fepl/error.hpp"

namespace fepl {

namespace {

void check_length(const NormScan& o, int b) {
  if (static_cast<int>(o.values.size()) != b) {
    throw DimensionMismatch("scan has " + std::to_string(o.values.size()) + " beams, model expects " +
                            std::to_string(b));
  }
}

// J^T S^-1 (o - g), the prediction error mapped to the latent space.
Eigen::Vector2d latent_error(const GenModel::Evaluation& ev, const NormScan& o, const Belief& belief) {
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < o.values.size(); ++i) {
    const double e = (o.values[i] - ev.prediction[i]) * belief.precision(i);
    acc[0] += ev.jacobian(static_cast<Eigen::Index>(i), 0) * e;
    acc[1] += ev.jacobian(static_cast<Eigen::Index>(i), 1) * e;
  }
  return acc;
}

Belief moved(const Belief& belief, const Eigen::Vector2d& step) {
  const NormPose next{belief.x.u + belief.alpha * step[0], belief.x.v + belief.alpha * step[1]};
  if (!std::isfinite(next.u) || !std::isfinite(next.v)) {
    throw DivergenceError("belief update is not finite (alpha " + std::to_string(belief.alpha) +
                          "); reduce the step size");
  }
  Belief out = belief;
  out.x = clamp_unit(next);
  return out;
}

}  // namespace

void Belief::validate(int beam_count) const {
  if (!(alpha > 0.0)) throw ValidationError("belief step size alpha must be > 0");
  if (sigma_o.size() != 1 && static_cast<int>(sigma_o.size()) != beam_count) {
    throw ValidationError("sigma_o must have 1 or B entries");
  }
  for (double s : sigma_o) {
    if (!(s > 0.0)) throw ValidationError("observation variances must be > 0");
  }
}

GoalSpec GoalSpec::make(const GenModel& model, const NormPose& x_goal, double beta, double sigma_x) {
  if (!(beta >= 0.0)) throw ValidationError("goal beta must be >= 0");
  if (!(sigma_x > 0.0)) throw ValidationError("goal sigma_x must be > 0");
  return {x_goal, model.forward(x_goal), beta, sigma_x};
}

void ControlState::validate() const {
  if (!(gamma > 0.0)) throw ValidationError("action step size gamma must be > 0");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (!(a_max > 0.0)) throw ValidationError("a_max must be > 0");
}

void FepParams::validate() const {
  if (!(alpha > 0.0)) throw ValidationError("fep.alpha must be > 0");
  if (!(beta >= 0.0)) throw ValidationError("fep.beta must be >= 0");
  if (!(sigma_o > 0.0)) throw ValidationError("fep.sigma_o must be > 0");
  if (!(sigma_x > 0.0)) throw ValidationError("fep.sigma_x must be > 0");
  if (!(gamma > 0.0)) throw ValidationError("fep.gamma must be > 0");
  if (!(dt > 0.0)) throw ValidationError("fep.dt must be > 0");
  if (!(a_max > 0.0)) throw ValidationError("fep.a_max must be > 0");
  if (max_iterations < 0) throw ValidationError("fep.max_iterations must be >= 0");
  if (!(success_radius > 0.0)) throw ValidationError("fep.success_radius must be > 0");
}

double free_energy(const NormScan& o, const Belief& belief, const GenModel& model) {
  check_length(o, model.output_dim());
  const NormScan pred = model.forward(belief.x);
  double f = 0.0;
  for (std::size_t i = 0; i < o.values.size(); ++i) {
    const double e = o.values[i] - pred.values[i];
    f += e * e * belief.precision(i);
  }
  return 0.5 * f;
}

Belief perceive_step(const Belief& belief, const NormScan& o, const GenModel& model) {
  check_length(o, model.output_dim());
  const GenModel::Evaluation ev = model.evaluate(belief.x);
  return moved(belief, latent_error(ev, o, belief));
}

Belief perceive_goal_step(const Belief& belief, const NormScan& o, const GoalSpec& goal,
                          const GenModel& model) {
  if (goal.beta == 0.0) return perceive_step(belief, o, model);
  check_length(o, model.output_dim());
  check_length(goal.o_goal, model.output_dim());
  const GenModel::Evaluation ev = model.evaluate(belief.x);
  Eigen::Vector2d step = latent_error(ev, o, belief);
  const double k = goal.gain();
  for (std::size_t i = 0; i < o.values.size(); ++i) {
    const double e = k * (o.values[i] - goal.o_goal.values[i]);
    step[0] += ev.jacobian(static_cast<Eigen::Index>(i), 0) * e;
    step[1] += ev.jacobian(static_cast<Eigen::Index>(i), 1) * e;
  }
  return moved(belief, step);
}

ControlState act_step(const ControlState& ctrl, const Belief& belief, const NormScan& o,
                      const GenModel& model, const Bounds& bounds) {
  check_length(o, model.output_dim());
  const GenModel::Evaluation ev = model.evaluate(belief.x);
  const Eigen::Vector2d g = latent_error(ev, o, belief);
  const double gain = ctrl.gamma * ctrl.dxda;
  const double dvx = gain * g[0] * meters_per_unit_x(bounds);
  const double dvy = gain * g[1] * meters_per_unit_y(bounds);
  ControlState out = ctrl;
  out.a.vx = std::clamp(ctrl.a.vx + dvx, -ctrl.a_max, ctrl.a_max);
  out.a.vy = std::clamp(ctrl.a.vy + dvy, -ctrl.a_max, ctrl.a_max);
  if (!std::isfinite(out.a.vx) || !std::isfinite(out.a.vy)) {
    throw DivergenceError("action update is not finite (gamma " + std::to_string(ctrl.gamma) + ")");
  }
  return out;
}

namespace {

Belief initial_belief(const WorldContext& ctx, const Pose2& p, const FepParams& params) {
  Belief b;
  b.x = clamp_unit(normalize_pose(ctx.map->bounds(), p));
  b.alpha = params.alpha;
  b.sigma_o = {params.sigma_o};
  b.validate(ctx.model->output_dim());
  return b;
}

NormScan observe(const WorldContext& ctx, const Pose2& truth, Rng& rng) {
  return normalize_scan(simulate_scan(*ctx.map, truth, ctx.sensor, rng), ctx.sensor.max_range);
}

}  // namespace

std::vector<TraceEntry> localize(const WorldContext& ctx, std::span<const Pose2> true_path,
                                 const Pose2& initial, const FepParams& params, Rng& rng) {
  params.validate();
  const Bounds& bounds = ctx.map->bounds();
  Belief belief = initial_belief(ctx, initial, params);
  std::vector<TraceEntry> trace;
  trace.reserve(true_path.size());
  for (std::size_t k = 0; k < true_path.size(); ++k) {
    const Pose2& truth = true_path[k];
    const NormScan o = observe(ctx, truth, rng);
    belief = perceive_step(belief, o, *ctx.model);
    TraceEntry e;
    e.iter = static_cast<int>(k);
    e.truth = truth;
    e.belief = denormalize_pose(bounds, belief.x);
    e.error = distance(e.belief, truth);
    e.dist_goal = std::numeric_limits<double>::quiet_NaN();
    e.free_energy = free_energy(o, belief, *ctx.model);
    trace.push_back(e);
  }
  return trace;
}

NavigationResult navigate(const WorldContext& ctx, const Pose2& start, const Pose2& goal,
                          const FepParams& params, Rng& rng) {
  NavigationResult result;
  navigate_into(ctx, start, goal, params, rng, result);
  return result;
}

void navigate_into(const WorldContext& ctx, const Pose2& start, const Pose2& goal_pose,
                   const FepParams& params, Rng& rng, NavigationResult& result) {
  params.validate();
  result = {};
  const Bounds& bounds = ctx.map->bounds();
  const GenModel& model = *ctx.model;
  Belief belief = initial_belief(ctx, start, params);
  const GoalSpec goal =
      GoalSpec::make(model, clamp_unit(normalize_pose(bounds, goal_pose)), params.beta, params.sigma_x);
  ControlState ctrl;
  ctrl.gamma = params.gamma;
  ctrl.dt = params.dt;
  ctrl.dxda = params.dt;
  ctrl.a_max = params.a_max;
  ctrl.validate();

  Pose2 truth = start;
  for (int k = 0;; ++k) {
    const NormScan o = observe(ctx, truth, rng);
    TraceEntry e;
    e.iter = k;
    e.truth = truth;
    e.dist_goal = distance(truth, goal_pose);
    if (e.dist_goal < params.success_radius || k >= params.max_iterations) {
      e.belief = denormalize_pose(bounds, belief.x);
      e.error = distance(e.belief, truth);
      e.free_energy = free_energy(o, belief, model);
      result.trace.push_back(e);
      result.success = e.dist_goal < params.success_radius;
      result.iterations = k;
      break;
    }
    e.free_energy = free_energy(o, belief, model);
    belief = perceive_goal_step(belief, o, goal, model);
    if (!params.accumulate_action) ctrl.a = {};
    ctrl = act_step(ctrl, belief, o, model, bounds);
    e.belief = denormalize_pose(bounds, belief.x);
    e.error = distance(e.belief, truth);
    e.action = ctrl.a;
    result.trace.push_back(e);
    truth = apply_action(*ctx.map, truth, ctrl.a, ctrl.dt);
  }
}

}  // namespace fepl
