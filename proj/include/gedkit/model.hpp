#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gedkit/graph.hpp"
#include "gedkit/tensor.hpp"

namespace gedkit {

enum class PoolingVariant { simple_mean, degree, global_context, learnable_gc };

const char* to_string(PoolingVariant v);
PoolingVariant pooling_from_string(const std::string& s);

struct ModelConfig {
  std::vector<int> gcn_dims{64, 32, 16};
  int ntn_k = 16;
  int hist_bins = 16;
  std::vector<int> fc_dims{16, 8, 4, 1};  // output dims of the FC stack
  PoolingVariant pooling = PoolingVariant::learnable_gc;
  bool strategy2 = true;

  int embed_dim() const { return gcn_dims.back(); }
  int fc_input_dim() const { return ntn_k + (strategy2 ? hist_bins : 0); }
};

// All learnable weights, in a fixed registry order (the order drives
// initialization draws, optimizer state and checkpoint layout).
struct ModelParams {
  ModelConfig config;
  int input_dim = 1;
  std::vector<std::pair<std::string, Tensor>> entries;

  static ModelParams init(const ModelConfig& cfg, int input_dim, std::uint64_t seed);

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  Tensor& gcn_w(int layer);
  Tensor& gcn_b(int layer);
  const Tensor& gcn_w(int layer) const;
  const Tensor& gcn_b(int layer) const;

  std::vector<Tensor> tensors() const;
  ModelParams clone() const;  // deep copy, detached from any tape
  void zero_grads();
};

// Degree-normalized neighbor aggregation (self-loop included), ReLU between
// layers, linear final layer.
Tensor gcn_forward(Tape& t, const Tensor& features, const Graph& g,
                   const ModelParams& p);

// Node-attention pooling; attention weights optionally reported for
// inspection (uniform 1/N for simple_mean, ln(deg+1) for degree).
Tensor pool(Tape& t, const Tensor& u_nodes, const Graph& g, const ModelParams& p,
            std::vector<double>* attention_out = nullptr);

Tensor ntn_interact(Tape& t, const Tensor& hi, const Tensor& hj, const ModelParams& p);

// Normalized histogram of sigmoid(Ui_pad Uj_pad^T) over B uniform bins on
// [0,1], the smaller side zero-padded to max(N1,N2) rows. Computed on values
// only: no gradient flows through it.
std::vector<double> pairwise_histogram(const Tensor& ui, const Tensor& uj, int bins);

struct PredictDetail {
  std::vector<double> attention1, attention2;
};

// Full pipeline to a scalar tensor in (0,1).
Tensor predict_forward(Tape& t, const Graph& g1, const Graph& g2,
                       const ModelParams& p, const LabelEncoder& enc,
                       PredictDetail* detail = nullptr);
double predict_similarity(const Graph& g1, const Graph& g2, const ModelParams& p,
                          const LabelEncoder& enc, PredictDetail* detail = nullptr);

Tensor pair_loss(Tape& t, const Tensor& predicted, double s_true);

// Checkpoint: single JSON file with config, label encoder and all parameters.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const LabelEncoder& enc);
struct Checkpoint {
  ModelParams params;
  LabelEncoder encoder;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace gedkit
