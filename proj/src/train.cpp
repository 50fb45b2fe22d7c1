#include "fepl/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fepl/error.hpp"

namespace fepl {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be finite and >= 0");
  }
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0)) throw ValidationError("adam_beta1 must be in (0, 1)");
  if (!(adam_beta2 > 0.0 && adam_beta2 < 1.0)) throw ValidationError("adam_beta2 must be in (0, 1)");
  if (!(adam_eps > 0.0)) throw ValidationError("adam_eps must be > 0");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ValidationError("validation_fraction must be in [0, 1)");
  }
}

Split split_sizes(std::size_t n_records, double validation_fraction) {
  const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n_records) * validation_fraction));
  const std::size_t val = std::min(n_val, n_records > 0 ? n_records - 1 : 0);
  return {n_records - val, val};
}

namespace {

std::vector<double> to_double(const std::vector<float>& v) { return {v.begin(), v.end()}; }

}  // namespace

double mean_l1(const GenModel& model, const Dataset& data, std::size_t first, std::size_t count) {
  if (count == 0) return 0.0;
  const int b = model.output_dim();
  double total = 0.0;
  for (std::size_t i = first; i < first + count; ++i) {
    const Record& r = data.records[i];
    const NormScan pred = model.forward(r.pose);
    double s = 0.0;
    for (int j = 0; j < b; ++j) s += std::abs(pred.values[static_cast<std::size_t>(j)] - r.scan[static_cast<std::size_t>(j)]);
    total += s;
  }
  return total / (static_cast<double>(count) * b);
}

TrainResult train(const GenModel& initial, const Dataset& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  if (data.records.empty()) throw ValidationError("cannot train on an empty dataset");
  const int b = initial.output_dim();
  if (data.beam_count() != b) {
    throw DimensionMismatch("dataset has " + std::to_string(data.beam_count()) +
                            " beams but the model predicts " + std::to_string(b));
  }
  const Split split = split_sizes(data.records.size(), cfg.validation_fraction);
  if (static_cast<std::size_t>(cfg.batch_size) > split.train) {
    throw ValidationError("batch_size " + std::to_string(cfg.batch_size) +
                          " exceeds the training split (" + std::to_string(split.train) + ")");
  }
  // Validation falls back to the training split when no records are held out.
  const std::size_t val_first = split.validation > 0 ? split.train : 0;
  const std::size_t val_count = split.validation > 0 ? split.validation : split.train;

  GenModel model = initial;
  std::span<double> params = model.mutable_parameters();
  const std::size_t np = params.size();
  std::vector<double> grad(np), m1(np, 0.0), m2(np, 0.0);
  std::vector<double> sample_loss(split.train, 0.0);
  std::vector<std::size_t> order(split.train);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::vector<double>> targets;
  targets.reserve(split.train);
  for (std::size_t i = 0; i < split.train; ++i) targets.push_back(to_double(data.records[i].scan));

  Rng rng(cfg.seed);
  auto ws = model.make_workspace();
  TrainResult result{model, {}, 0};
  double best_val = std::numeric_limits<double>::infinity();
  long step = 0;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    int batches = 0;
    for (std::size_t start = 0; start < split.train; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(split.train, start + static_cast<std::size_t>(cfg.batch_size));
      const double weight = 1.0 / (static_cast<double>(end - start) * b);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        sample_loss[idx] = model.accumulate_l1_gradient(data.records[idx].pose, targets[idx], weight, grad, *ws);
      }
      ++step;
      ++batches;
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < np; ++i) {
        m1[i] = cfg.adam_beta1 * m1[i] + (1.0 - cfg.adam_beta1) * grad[i];
        m2[i] = cfg.adam_beta2 * m2[i] + (1.0 - cfg.adam_beta2) * grad[i] * grad[i];
        params[i] -= cfg.learning_rate * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + cfg.adam_eps);
      }
    }
    // Summed in record order so the value does not depend on the shuffle.
    const double train_l1 = std::accumulate(sample_loss.begin(), sample_loss.end(), 0.0) /
                            (static_cast<double>(split.train) * b);
    const double val_l1 = mean_l1(model, data, val_first, val_count);
    if (!std::isfinite(train_l1) || !std::isfinite(val_l1)) {
      std::ostringstream msg;
      msg << "training diverged at epoch " << epoch << " (learning_rate " << cfg.learning_rate
          << "): loss is not finite";
      throw DivergenceError(msg.str());
    }
    EpochStats stats{epoch, train_l1, val_l1, batches};
    result.history.push_back(stats);
    if (val_l1 < best_val) {
      best_val = val_l1;
      result.model = model;
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

}  // namespace fepl
