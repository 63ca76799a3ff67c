#include "gedkit/train.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "gedkit/optim.hpp"
#include "json.hpp"

namespace gedkit {

double validation_mse(const ModelParams& params, const LabelEncoder& enc,
                      const std::vector<GraphPairSample>& pairs, const Dataset& ds) {
  if (pairs.empty()) throw std::invalid_argument("validation_mse: no pairs");
  double total = 0.0;
  for (const auto& s : pairs) {
    const double pred = predict_similarity(ds.by_id(s.i), ds.by_id(s.j), params, enc);
    const double d = pred - s.similarity;
    total += d * d;
  }
  return total / pairs.size();
}

namespace {

void emit(std::ostream* log_stream, const TrainLogEntry& e) {
  if (!log_stream) return;
  nlohmann::json j{{"iteration", e.iteration}};
  if (!std::isnan(e.train_loss)) j["train_loss"] = e.train_loss;
  if (e.has_val) j["val_mse"] = e.val_mse;
  *log_stream << j.dump() << "\n";
}

}  // namespace

TrainResult train_model(const Dataset& ds, const LabelEncoder& enc,
                        const ModelConfig& mc, const TrainConfig& tc,
                        std::ostream* log_stream) {
  if (ds.train_pairs.empty()) throw std::invalid_argument("train: no training pairs");
  if (tc.iterations < 0 || tc.batch_size < 1 || tc.val_every < 1)
    throw std::invalid_argument("train: bad schedule configuration");

  ModelParams params = ModelParams::init(mc, enc.dimension(), tc.seed);
  AdamState adam(params.tensors(), AdamConfig{.lr = tc.lr});
  Batcher batcher(static_cast<int>(ds.train_pairs.size()), tc.batch_size, tc.seed + 1);

  TrainResult result;
  result.best_val_mse = validation_mse(params, enc, ds.val_pairs, ds);
  result.best_params = params.clone();
  result.best_iteration = 0;
  TrainLogEntry initial{0, std::nan(""), result.best_val_mse, true};
  result.log.push_back(initial);
  emit(log_stream, initial);

  std::vector<std::vector<int>> epoch;
  std::size_t epoch_pos = 0;
  for (int it = 1; it <= tc.iterations; ++it) {
    if (epoch_pos >= epoch.size()) {
      epoch = batcher.next_epoch();
      epoch_pos = 0;
    }
    const auto& batch = epoch[epoch_pos++];

    Tape tape;
    Tensor total;
    for (int idx : batch) {
      const auto& s = ds.train_pairs[idx];
      Tensor pred = predict_forward(tape, ds.by_id(s.i), ds.by_id(s.j), params, enc);
      Tensor l = pair_loss(tape, pred, s.similarity);
      total = total.defined() ? add(tape, total, l) : l;
    }
    Tensor loss = scale(tape, total, 1.0 / batch.size());
    const double loss_value = loss.item();
    if (!std::isfinite(loss_value))
      throw std::runtime_error("train: non-finite loss at iteration " +
                               std::to_string(it) + " (batch size " +
                               std::to_string(batch.size()) + ")");
    tape.backward(loss);
    adam.step();

    if (it % tc.val_every == 0 || it == tc.iterations) {
      TrainLogEntry e{it, loss_value, validation_mse(params, enc, ds.val_pairs, ds),
                      true};
      result.log.push_back(e);
      emit(log_stream, e);
      if (e.val_mse < result.best_val_mse) {
        result.best_val_mse = e.val_mse;
        result.best_params = params.clone();
        result.best_iteration = it;
      }
    } else {
      TrainLogEntry e{it, loss_value, 0.0, false};
      result.log.push_back(e);
      emit(log_stream, e);
    }
  }
  return result;
}

}  // namespace gedkit
