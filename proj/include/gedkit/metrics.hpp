#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gedkit/dataset.hpp"

namespace gedkit {

double mse(const std::vector<double>& pred, const std::vector<double>& truth);

// Pearson correlation of average ranks (ties get fractional ranks).
// nullopt when either side has zero rank variance.
std::optional<double> spearman_rho(const std::vector<double>& pred,
                                   const std::vector<double>& truth);

// Tau-b: (concordant - discordant) / sqrt((n0 - t_pred) (n0 - t_truth)).
// nullopt when either side is all ties.
std::optional<double> kendall_tau(const std::vector<double>& pred,
                                  const std::vector<double>& truth);

// Rankings are (id, similarity) lists; ordering is similarity descending with
// id-ascending tie-break, applied to predictions and ground truth alike.
using Ranking = std::vector<std::pair<std::string, double>>;
double precision_at_k(const Ranking& pred, const Ranking& truth, int k);

using SimilarityFn = std::function<double(const Graph&, const Graph&)>;

struct QueryResult {
  std::string query_id;
  // db graph id, predicted similarity, true similarity; sorted by prediction.
  std::vector<std::tuple<std::string, double, double>> ranking;
  double mse = 0.0;
  std::optional<double> rho, tau;
  std::map<int, double> p_at_k;
};

struct EvalReport {
  std::string method;
  double mse = 0.0;
  double rho = 0.0, tau = 0.0;
  int rho_excluded = 0, tau_excluded = 0;  // queries with undefined rank metrics
  std::map<int, double> p_at_k;
  double mean_pair_ms = 0.0;
  int n_queries = 0;
  std::vector<QueryResult> queries;
};

// Query protocol: each test graph queries the train+val database; per-query
// metrics are averaged, undefined rank correlations excluded and counted.
EvalReport evaluate_method(const std::string& name, const SimilarityFn& fn,
                           const Dataset& ds, const std::vector<int>& ks);

// Classical GED algorithms as similarity methods (nged + exp transform).
SimilarityFn classical_similarity(const std::string& algo, int beam_width = 100,
                                  const SearchOptions& opt = {});

std::string report_to_json(const std::vector<EvalReport>& reports,
                           bool include_queries = false);
std::string report_to_csv(const std::vector<EvalReport>& reports);

}  // namespace gedkit
