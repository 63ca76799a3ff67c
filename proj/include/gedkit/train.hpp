#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gedkit/dataset.hpp"
#include "gedkit/model.hpp"

namespace gedkit {

struct TrainConfig {
  int iterations = 10000;
  int batch_size = 128;
  double lr = 0.001;
  int val_every = 100;
  std::uint64_t seed = 1;
};

struct TrainLogEntry {
  int iteration = 0;
  double train_loss = 0.0;  // batch mean loss; NaN for the initial entry
  double val_mse = 0.0;
  bool has_val = false;
};

struct TrainResult {
  ModelParams best_params;
  double best_val_mse = 0.0;
  int best_iteration = 0;
  std::vector<TrainLogEntry> log;
};

double validation_mse(const ModelParams& params, const LabelEncoder& enc,
                      const std::vector<GraphPairSample>& pairs, const Dataset& ds);

// Adam over shuffled train-pair batches; validation every val_every
// iterations and at the end; returns the checkpoint with the lowest
// validation MSE. Aborts on non-finite loss. log_stream, when given, gets one
// JSON line per log entry.
TrainResult train_model(const Dataset& ds, const LabelEncoder& enc,
                        const ModelConfig& mc, const TrainConfig& tc,
                        std::ostream* log_stream = nullptr);

}  // namespace gedkit
