// L1 / Adam training of the generative model.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fepl/dataset.hpp"
#include "fepl/genmodel.hpp"

namespace fepl {

struct TrainConfig {
  int batch_size{500};
  int epochs{200};
  double learning_rate{1e-3};
  double adam_beta1{0.9};
  double adam_beta2{0.999};
  double adam_eps{1e-8};
  double validation_fraction{3000.0 / 13000.0};
  std::uint64_t seed{0};

  void validate() const;
};

struct EpochStats {
  int epoch{0};  // 1-based
  double train_l1{0.0};
  double validation_l1{0.0};
  int batches{0};
};

struct TrainResult {
  GenModel model;  // parameters with the lowest validation L1
  std::vector<EpochStats> history;
  int best_epoch{0};
};

/// Sizes of the train/validation split; the validation part is the tail of
/// the record list.
struct Split {
  std::size_t train{0};
  std::size_t validation{0};
};
Split split_sizes(std::size_t n_records, double validation_fraction);

/// Mean absolute error over every beam of the given records.
double mean_l1(const GenModel& model, const Dataset& data, std::size_t first, std::size_t count);

using EpochCallback = std::function<void(const EpochStats&)>;

/// Throws ValidationError on bad inputs and DivergenceError if the loss
/// becomes non-finite.
TrainResult train(const GenModel& initial, const Dataset& data, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

}  // namespace fepl
