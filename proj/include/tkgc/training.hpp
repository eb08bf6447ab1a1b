#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tkgc/config.hpp"
#include "tkgc/eval.hpp"
#include "tkgc/graph.hpp"
#include "tkgc/ingest.hpp"
#include "tkgc/model.hpp"

namespace tkgc {

struct BatchLoss {
  double loss = 0.0;  // mean over the batch
  ModelParams grad;
};

// Softmax cross-entropy over all candidate objects, averaged over `batch`
// (augmented quadruples), with gradients for every tensor. `seeds[i]` seeds
// the TNG sample of batch[i]; each example's own reciprocal edge is hidden
// from its TNG. Throws DivergenceError naming the quadruple on a non-finite loss.
BatchLoss loss_batch(std::span<const Quadruple> batch, std::span<const std::uint64_t> seeds,
                     const TemporalKG& kg_train, const ModelParams& params,
                     const RunConfig& config);

// Seed of training example `position` in `epoch`.
[[nodiscard]] std::uint64_t training_seed(std::uint64_t base, std::size_t epoch, std::size_t position);

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::uint64_t step = 0;

  static AdamState for_params(const ModelParams& params);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// One Adam update. weight_decay adds an L2 term to the gradient.
void adam_step(ModelParams& params, const ModelParams& grad, AdamState& state,
               const RunConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<MetricsReport> valid;
  double wall_seconds = 0.0;

  // One JSON-lines record; wall_seconds is included only when requested.
  [[nodiscard]] std::string to_json_line(bool with_wall_seconds) const;
};

// Inputs of a training run. Quadruples are raw; reciprocals are added here.
struct TrainingData {
  TemporalKG train_kg;            // augmented training graph (TNG source)
  QuadrupleList train_examples;   // augmented training quadruples
  QuadrupleList valid_raw;
  QuadrupleList test_raw;
  FilterIndex filter;             // train U valid U test, augmented

  static TrainingData from_splits(const SplitSet& splits, const VocabSizes& vocab);
};

struct TrainState {
  ModelParams params;
  AdamState adam;
  std::size_t epochs_done = 0;
  ModelParams best_params;
  double best_valid_mrr = -1.0;
  std::size_t best_epoch = 0;
};

struct TrainResult {
  TrainState state;
  std::vector<EpochRecord> log;
};

using EpochCallback = std::function<void(const EpochRecord&, const TrainState&)>;

// Seeded mini-batch training with Adam; validates every config.eval_every
// epochs and keeps the parameters with the best validation MRR. `resume`
// continues from a saved state. Throws DivergenceError when the loss turns
// non-finite; `on_epoch` has been called for every completed epoch by then.
TrainResult train(const TrainingData& data, const RunConfig& config,
                  const EpochCallback& on_epoch = {}, std::optional<TrainState> resume = std::nullopt);

struct ParameterCount {
  std::size_t total = 0;
  std::vector<std::pair<std::string, std::size_t>> breakdown;

  [[nodiscard]] std::string to_json() const;
  [[nodiscard]] std::string to_csv() const;
};

// Entity table + relation table (reciprocals included) + omega + phase +
// combiner (weights and bias) + aggregator (weights and bias).
ParameterCount count_parameters(const RunConfig& config, const VocabSizes& vocab);

// Phi applied to an absolute timestamp (the absolute-time ablation).
Vector absolute_time_encoding(const ModelParams& params, TimeIndex t);

}  // namespace tkgc
