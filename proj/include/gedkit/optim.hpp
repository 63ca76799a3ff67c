#pragma once

#include <cstdint>
#include <vector>

#include "gedkit/tensor.hpp"

namespace gedkit {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias-corrected moments. step() consumes the parameters' current
// gradients (which must be populated) and zeroes them afterwards.
class AdamState {
 public:
  explicit AdamState(std::vector<Tensor> params, AdamConfig cfg = {});

  void step();
  std::int64_t step_count() const { return t_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
  AdamConfig cfg_;
};

}  // namespace gedkit
