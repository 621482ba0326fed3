#include "taxelgraph/perception/training.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "taxelgraph/errors.h"
#include "taxelgraph/perception/loss.h"
#include "taxelgraph/rng.h"

namespace taxelgraph {

DatasetSplit split_dataset(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("split_dataset: empty dataset");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw std::invalid_argument("split_dataset: train fraction must be in (0, 1]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, 0x5EED);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n))), 1, n);
  DatasetSplit split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

EvalMetrics evaluate_model(const PerceptionModel& model, std::span<const GraspSample> samples,
                           std::span<const std::size_t> indices) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const TargetLayout& target = model.spec().target;
  if (indices.empty()) return {nan, nan, nan};
  double total = 0.0, position = 0.0, angle = 0.0;
  for (std::size_t idx : indices) {
    const GraspSample& s = samples[idx];
    const std::vector<double> pred = model.predict(s);
    const std::span<const double> truth = s.label;
    total += rmse_loss(pred, truth);
    if (target.position_dims > 0) {
      position += 100.0 * rmse_loss(std::span(pred).first(target.position_dims),
                                    truth.first(target.position_dims));
    }
    if (target.angle_dims > 0) {
      angle += rmse_loss(std::span(pred).subspan(target.position_dims),
                         truth.subspan(target.position_dims));
    }
  }
  const double n = static_cast<double>(indices.size());
  return {total / n, target.position_dims > 0 ? position / n : nan,
          target.angle_dims > 0 ? angle / n : nan};
}

TrainReport train_perception(PerceptionModel& model, std::span<const GraspSample> samples,
                             const TrainConfig& config, AdamState* optimizer,
                             const std::function<void(std::size_t, const EpochReport&)>& on_epoch) {
  if (samples.empty()) throw DataError("train_perception: empty dataset");
  return train_perception(model, samples,
                          split_dataset(samples.size(), config.train_fraction, config.seed), config,
                          optimizer, on_epoch);
}

TrainReport train_perception(PerceptionModel& model, std::span<const GraspSample> samples,
                             const DatasetSplit& split, const TrainConfig& config,
                             AdamState* optimizer,
                             const std::function<void(std::size_t, const EpochReport&)>& on_epoch) {
  if (samples.empty() || split.train.empty()) throw DataError("train_perception: empty dataset");
  if (config.batch_size == 0) throw std::invalid_argument("train_perception: batch_size must be >= 1");
  AdamState local;
  AdamState& adam = optimizer ? *optimizer : local;
  adam.config.learning_rate = config.learning_rate;

  TrainReport report;
  report.initial = {evaluate_model(model, samples, split.train),
                    evaluate_model(model, samples, split.test)};

  std::unique_ptr<PerceptionModel> gradient = model.zeros_like();
  std::vector<std::size_t> order = split.train;
  Rng rng = make_rng(config.seed, 0xBA7C);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double weight = 1.0 / static_cast<double>(end - start);
      zero_all(gradient->tensors());
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        batch_loss += model.accumulate_gradient(samples[order[b]], weight, *gradient);
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite perception loss at epoch " + std::to_string(epoch));
      }
      adam_step(model.tensors(), std::as_const(*gradient).tensors(), adam);
    }
    EpochReport er{evaluate_model(model, samples, split.train),
                   evaluate_model(model, samples, split.test)};
    if (on_epoch) on_epoch(epoch, er);
    report.epochs.push_back(er);
  }
  return report;
}

}  // namespace taxelgraph
