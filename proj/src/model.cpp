#include "gedkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gedkit {

using nlohmann::json;

const char* to_string(PoolingVariant v) {
  switch (v) {
    case PoolingVariant::simple_mean: return "simple_mean";
    case PoolingVariant::degree: return "degree";
    case PoolingVariant::global_context: return "global_context";
    case PoolingVariant::learnable_gc: return "learnable_gc";
  }
  return "?";
}

PoolingVariant pooling_from_string(const std::string& s) {
  std::string t = s;
  std::replace(t.begin(), t.end(), '-', '_');
  if (t == "simple_mean" || t == "simplemean") return PoolingVariant::simple_mean;
  if (t == "degree" || t == "attdegree") return PoolingVariant::degree;
  if (t == "global_context" || t == "attglobalcontext")
    return PoolingVariant::global_context;
  if (t == "learnable_gc" || t == "attlearnablegc") return PoolingVariant::learnable_gc;
  throw std::invalid_argument("unknown pooling variant: " + s);
}

// --- parameters ---

namespace {

Tensor uniform_init(std::vector<int> shape, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t = Tensor::zeros(std::move(shape), true);
  for (auto& x : t.value()) x = dist(rng);
  return t;
}

Tensor glorot(std::vector<int> shape, int fan_in, int fan_out, std::mt19937_64& rng) {
  return uniform_init(std::move(shape), std::sqrt(6.0 / (fan_in + fan_out)), rng);
}

// ReLU halves the activation variance, so layers feeding a ReLU use the He
// bound; plain glorot starves the embeddings until sigmoid(Ui Uj^T) is
// indistinguishable from 0.5 and training cannot leave the constant
// predictor.
Tensor he_uniform(std::vector<int> shape, int fan_in, std::mt19937_64& rng) {
  return uniform_init(std::move(shape), std::sqrt(6.0 / fan_in), rng);
}

void validate_config(const ModelConfig& cfg) {
  if (cfg.gcn_dims.empty()) throw std::invalid_argument("config: gcn_dims empty");
  if (cfg.ntn_k < 1) throw std::invalid_argument("config: ntn_k must be >= 1");
  if (cfg.hist_bins < 1) throw std::invalid_argument("config: hist_bins must be >= 1");
  if (cfg.fc_dims.empty() || cfg.fc_dims.back() != 1)
    throw std::invalid_argument("config: fc_dims must end in 1");
}

}  // namespace

ModelParams ModelParams::init(const ModelConfig& cfg, int input_dim,
                              std::uint64_t seed) {
  validate_config(cfg);
  if (input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
  std::mt19937_64 rng(seed);
  ModelParams p;
  p.config = cfg;
  p.input_dim = input_dim;

  int d_in = input_dim;
  for (std::size_t l = 0; l < cfg.gcn_dims.size(); ++l) {
    int d_out = cfg.gcn_dims[l];
    const bool feeds_relu = l + 1 < cfg.gcn_dims.size();
    p.entries.emplace_back("gcn" + std::to_string(l) + ".W",
                           feeds_relu ? he_uniform({d_in, d_out}, d_in, rng)
                                      : glorot({d_in, d_out}, d_in, d_out, rng));
    p.entries.emplace_back("gcn" + std::to_string(l) + ".b",
                           Tensor::zeros({d_out}, true));
    d_in = d_out;
  }
  const int d = cfg.embed_dim(), k = cfg.ntn_k;
  p.entries.emplace_back("att.W2", glorot({d, d}, d, d, rng));
  p.entries.emplace_back("ntn.W3", glorot({d, d, k}, d, d, rng));
  p.entries.emplace_back("ntn.V", glorot({k, 2 * d}, 2 * d, k, rng));
  p.entries.emplace_back("ntn.b3", Tensor::zeros({k}, true));

  int f_in = cfg.fc_input_dim();
  for (std::size_t l = 0; l < cfg.fc_dims.size(); ++l) {
    int f_out = cfg.fc_dims[l];
    p.entries.emplace_back("fc" + std::to_string(l) + ".W",
                           glorot({f_out, f_in}, f_in, f_out, rng));
    p.entries.emplace_back("fc" + std::to_string(l) + ".b",
                           Tensor::zeros({f_out}, true));
    f_in = f_out;
  }
  return p;
}

Tensor& ModelParams::at(const std::string& name) {
  for (auto& [n, t] : entries)
    if (n == name) return t;
  throw std::invalid_argument("no such parameter: " + name);
}

const Tensor& ModelParams::at(const std::string& name) const {
  return const_cast<ModelParams*>(this)->at(name);
}

Tensor& ModelParams::gcn_w(int layer) { return at("gcn" + std::to_string(layer) + ".W"); }
Tensor& ModelParams::gcn_b(int layer) { return at("gcn" + std::to_string(layer) + ".b"); }
const Tensor& ModelParams::gcn_w(int layer) const {
  return at("gcn" + std::to_string(layer) + ".W");
}
const Tensor& ModelParams::gcn_b(int layer) const {
  return at("gcn" + std::to_string(layer) + ".b");
}

std::vector<Tensor> ModelParams::tensors() const {
  std::vector<Tensor> out;
  out.reserve(entries.size());
  for (const auto& [n, t] : entries) out.push_back(t);
  return out;
}

ModelParams ModelParams::clone() const {
  ModelParams p;
  p.config = config;
  p.input_dim = input_dim;
  for (const auto& [n, t] : entries)
    p.entries.emplace_back(n, Tensor::from_data(t.shape(), t.value(), true));
  return p;
}

void ModelParams::zero_grads() {
  for (auto& [n, t] : entries) t.zero_grad();
}

// --- forward stages ---

namespace {

// Symmetric-normalized aggregation matrix: neighbors plus self,
// entries 1/sqrt(d_n d_m) with d = degree + 1.
Tensor aggregation_matrix(const Graph& g) {
  const int n = g.node_count();
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (int u = 0; u < n; ++u) {
    const double du = g.degree(u) + 1.0;
    m[static_cast<std::size_t>(u) * n + u] = 1.0 / du;
    for (int v : g.adj[u])
      m[static_cast<std::size_t>(u) * n + v] =
          1.0 / std::sqrt(du * (g.degree(v) + 1.0));
  }
  return Tensor::from_data({n, n}, std::move(m));
}

}  // namespace

Tensor gcn_forward(Tape& t, const Tensor& features, const Graph& g,
                   const ModelParams& p) {
  const int n = g.node_count();
  if (features.rank() != 2 || features.dim(0) != n || features.dim(1) != p.input_dim)
    throw std::invalid_argument("gcn_forward: feature matrix shape mismatch");
  Tensor agg = aggregation_matrix(g);
  Tensor u = features;
  const int layers = static_cast<int>(p.config.gcn_dims.size());
  for (int l = 0; l < layers; ++l) {
    u = matmul(t, agg, u);
    u = add_rowvec(t, matmul(t, u, p.gcn_w(l)), p.gcn_b(l));
    if (l + 1 < layers) u = relu(t, u);  // last layer stays linear
  }
  return u;
}

Tensor pool(Tape& t, const Tensor& u_nodes, const Graph& g, const ModelParams& p,
            std::vector<double>* attention_out) {
  const int n = g.node_count();
  if (u_nodes.rank() != 2 || u_nodes.dim(0) != n)
    throw std::invalid_argument("pool: embedding matrix shape mismatch");

  auto report = [&](const std::vector<double>& a) {
    if (attention_out) *attention_out = a;
  };

  switch (p.config.pooling) {
    case PoolingVariant::simple_mean: {
      report(std::vector<double>(n, 1.0 / n));
      return scale(t, sum_rows(t, u_nodes), 1.0 / n);
    }
    case PoolingVariant::degree: {
      std::vector<double> w(n);
      for (int i = 0; i < n; ++i) w[i] = std::log(g.degree(i) + 1.0);
      report(w);
      Tensor wt = Tensor::from_data({n}, std::move(w));
      return matvec(t, transpose(t, u_nodes), wt);
    }
    case PoolingVariant::global_context:
    case PoolingVariant::learnable_gc: {
      Tensor mean_u = scale(t, sum_rows(t, u_nodes), 1.0 / n);
      Tensor context =
          p.config.pooling == PoolingVariant::learnable_gc
              ? tanh_act(t, matvec(t, p.at("att.W2"), mean_u))
              : mean_u;
      Tensor a = sigmoid(t, matvec(t, u_nodes, context));
      report(a.value());
      return matvec(t, transpose(t, u_nodes), a);
    }
  }
  throw std::logic_error("pool: unknown variant");
}

Tensor ntn_interact(Tape& t, const Tensor& hi, const Tensor& hj, const ModelParams& p) {
  Tensor bil = bilinear(t, hi, p.at("ntn.W3"), hj);
  Tensor lin = matvec(t, p.at("ntn.V"), concat(t, hi, hj));
  return sigmoid(t, add(t, add(t, bil, lin), p.at("ntn.b3")));
}

std::vector<double> pairwise_histogram(const Tensor& ui, const Tensor& uj, int bins) {
  if (bins < 1) throw std::invalid_argument("pairwise_histogram: bins must be >= 1");
  if (ui.rank() != 2 || uj.rank() != 2 || ui.dim(1) != uj.dim(1))
    throw std::invalid_argument("pairwise_histogram: embedding dims mismatch");
  const int n1 = ui.dim(0), n2 = uj.dim(0), d = ui.dim(1);
  const int n = std::max(n1, n2);

  std::vector<double> hist(bins, 0.0);
  const auto& a = ui.value();
  const auto& b = uj.value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      if (i < n1 && j < n2)  // zero-padded rows contribute sigmoid(0)
        for (int x = 0; x < d; ++x) s += a[i * d + x] * b[j * d + x];
      const double sij = 1.0 / (1.0 + std::exp(-s));
      int bin = std::min(bins - 1, static_cast<int>(sij * bins));
      hist[bin] += 1.0;
    }
  const double inv = 1.0 / (static_cast<double>(n) * n);
  for (auto& h : hist) h *= inv;
  return hist;
}

Tensor predict_forward(Tape& t, const Graph& g1, const Graph& g2,
                       const ModelParams& p, const LabelEncoder& enc,
                       PredictDetail* detail) {
  const int d0 = enc.dimension();
  Tensor x1 = Tensor::from_data({g1.node_count(), d0}, enc.encode(g1));
  Tensor x2 = Tensor::from_data({g2.node_count(), d0}, enc.encode(g2));
  Tensor u1 = gcn_forward(t, x1, g1, p);
  Tensor u2 = gcn_forward(t, x2, g2, p);
  Tensor h1 = pool(t, u1, g1, p, detail ? &detail->attention1 : nullptr);
  Tensor h2 = pool(t, u2, g2, p, detail ? &detail->attention2 : nullptr);
  Tensor feat = ntn_interact(t, h1, h2, p);
  if (p.config.strategy2) {
    Tensor hist = Tensor::from_data(
        {p.config.hist_bins}, pairwise_histogram(u1, u2, p.config.hist_bins));
    feat = concat(t, feat, hist);
  }
  const int layers = static_cast<int>(p.config.fc_dims.size());
  Tensor x = feat;
  for (int l = 0; l < layers; ++l) {
    x = add(t, matvec(t, p.at("fc" + std::to_string(l) + ".W"), x),
            p.at("fc" + std::to_string(l) + ".b"));
    if (l + 1 < layers) x = relu(t, x);
  }
  return sigmoid(t, x);
}

double predict_similarity(const Graph& g1, const Graph& g2, const ModelParams& p,
                          const LabelEncoder& enc, PredictDetail* detail) {
  Tape t(false);
  return predict_forward(t, g1, g2, p, enc, detail).item();
}

Tensor pair_loss(Tape& t, const Tensor& predicted, double s_true) {
  if (predicted.numel() != 1)
    throw std::invalid_argument("pair_loss: prediction must be scalar");
  Tensor diff = sub(t, predicted, Tensor::scalar(s_true));
  return mul(t, diff, diff);
}

// --- checkpoints ---

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const LabelEncoder& enc) {
  json cfg{{"gcn_dims", params.config.gcn_dims},
           {"K", params.config.ntn_k},
           {"B", params.config.hist_bins},
           {"fc_dims", params.config.fc_dims},
           {"pooling_variant", to_string(params.config.pooling)},
           {"strategy2", params.config.strategy2},
           {"input_dim", params.input_dim}};
  json encoder{{"constant", enc.is_constant()}, {"labels", enc.labels()}};
  json tensors = json::object();
  for (const auto& [name, t] : params.entries)
    tensors[name] = json{{"shape", t.shape()}, {"data", t.value()}};
  json doc{{"format", "gedkit-checkpoint-v1"},
           {"config", cfg},
           {"label_encoder", encoder},
           {"params", tensors}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << doc.dump() << "\n";
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": checkpoint parse error: " + e.what());
  }
  if (doc.value("format", "") != "gedkit-checkpoint-v1")
    throw std::runtime_error(path + ": not a gedkit checkpoint");

  const auto& cfg = doc.at("config");
  ModelConfig mc;
  mc.gcn_dims = cfg.at("gcn_dims").get<std::vector<int>>();
  mc.ntn_k = cfg.at("K").get<int>();
  mc.hist_bins = cfg.at("B").get<int>();
  mc.fc_dims = cfg.at("fc_dims").get<std::vector<int>>();
  mc.pooling = pooling_from_string(cfg.at("pooling_variant").get<std::string>());
  mc.strategy2 = cfg.at("strategy2").get<bool>();

  Checkpoint ck;
  const auto& ej = doc.at("label_encoder");
  ck.encoder = ej.at("constant").get<bool>()
                   ? LabelEncoder::constant()
                   : LabelEncoder::from_labels(
                         ej.at("labels").get<std::vector<std::string>>());

  // Rebuild in registry order so the structure matches a fresh init.
  ck.params = ModelParams::init(mc, cfg.at("input_dim").get<int>(), 0);
  const auto& tensors = doc.at("params");
  for (auto& [name, t] : ck.params.entries) {
    if (!tensors.contains(name))
      throw std::runtime_error(path + ": checkpoint missing parameter " + name);
    const auto& tj = tensors.at(name);
    auto shape = tj.at("shape").get<std::vector<int>>();
    auto data = tj.at("data").get<std::vector<double>>();
    if (shape != t.shape())
      throw std::runtime_error(path + ": parameter shape mismatch for " + name);
    t = Tensor::from_data(std::move(shape), std::move(data), true);
  }
  return ck;
}

}  // namespace gedkit
