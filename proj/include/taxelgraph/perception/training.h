#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "taxelgraph/diffcore/adam.h"
#include "taxelgraph/perception/model.h"

namespace taxelgraph {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle; the train side gets max(1, round(fraction * n)) samples.
DatasetSplit split_dataset(std::size_t n, double train_fraction, std::uint64_t seed);

struct EvalMetrics {
  // Mean per-sample rmse over all label dimensions in label units (meters,
  // degrees). NaN when the index set is empty.
  double rmse = 0.0;
  // Mean per-sample rmse over position dimensions only, in cm.
  double position_cm = 0.0;
  // Mean per-sample rmse over angle dimensions only, in degrees (NaN if none).
  double orientation_deg = 0.0;
};

EvalMetrics evaluate_model(const PerceptionModel& model, std::span<const GraspSample> samples,
                           std::span<const std::size_t> indices);

struct EpochReport {
  EvalMetrics train;
  EvalMetrics test;
};

struct TrainReport {
  EpochReport initial;
  std::vector<EpochReport> epochs;
};

// Mini-batch Adam on the mean per-sample rmse in loss units (cm, degrees). Pass `optimizer` to continue
// from an earlier run's moments; otherwise a fresh state is used.
TrainReport train_perception(PerceptionModel& model, std::span<const GraspSample> samples,
                             const TrainConfig& config, AdamState* optimizer = nullptr,
                             const std::function<void(std::size_t, const EpochReport&)>&
                                 on_epoch = nullptr);

// Same, with an explicit split.
TrainReport train_perception(PerceptionModel& model, std::span<const GraspSample> samples,
                             const DatasetSplit& split, const TrainConfig& config,
                             AdamState* optimizer = nullptr,
                             const std::function<void(std::size_t, const EpochReport&)>&
                                 on_epoch = nullptr);

}  // namespace taxelgraph
