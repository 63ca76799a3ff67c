#include "gedkit/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gedkit {

double mse(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.empty() || pred.size() != truth.size())
    throw std::invalid_argument("mse: lists must be non-empty and equal length");
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    total += d * d;
  }
  return total / pred.size();
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * (i + j) + 1.0;  // 1-based fractional rank
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman_rho(const std::vector<double>& pred,
                                   const std::vector<double>& truth) {
  if (pred.size() != truth.size() || pred.size() < 2)
    throw std::invalid_argument("spearman_rho: need two equal-length lists");
  const auto ra = average_ranks(pred);
  const auto rb = average_ranks(truth);
  const std::size_t n = ra.size();
  const double mean = (n + 1) / 2.0;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = ra[i] - mean, db = rb[i] - mean;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

std::optional<double> kendall_tau(const std::vector<double>& pred,
                                  const std::vector<double>& truth) {
  if (pred.size() != truth.size() || pred.size() < 2)
    throw std::invalid_argument("kendall_tau: need two equal-length lists");
  const std::size_t n = pred.size();
  long long concordant = 0, discordant = 0, ties_p = 0, ties_t = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dp = pred[i] - pred[j];
      const double dt = truth[i] - truth[j];
      if (dp == 0.0 && dt == 0.0) {
        ++ties_p;
        ++ties_t;
      } else if (dp == 0.0) {
        ++ties_p;
      } else if (dt == 0.0) {
        ++ties_t;
      } else if (dp * dt > 0.0) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  const double n0 = 0.5 * n * (n - 1);
  const double denom = std::sqrt((n0 - ties_p) * (n0 - ties_t));
  if (denom == 0.0) return std::nullopt;
  return (concordant - discordant) / denom;
}

namespace {

Ranking sorted_ranking(Ranking r) {
  std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  return r;
}

}  // namespace

double precision_at_k(const Ranking& pred, const Ranking& truth, int k) {
  if (k < 1 || k > static_cast<int>(pred.size()) || pred.size() != truth.size())
    throw std::invalid_argument("precision_at_k: k out of range");
  const Ranking sp = sorted_ranking(pred);
  const Ranking st = sorted_ranking(truth);
  std::vector<std::string> top_p, top_t;
  for (int i = 0; i < k; ++i) {
    top_p.push_back(sp[i].first);
    top_t.push_back(st[i].first);
  }
  std::sort(top_p.begin(), top_p.end());
  std::sort(top_t.begin(), top_t.end());
  std::vector<std::string> common;
  std::set_intersection(top_p.begin(), top_p.end(), top_t.begin(), top_t.end(),
                        std::back_inserter(common));
  return static_cast<double>(common.size()) / k;
}

EvalReport evaluate_method(const std::string& name, const SimilarityFn& fn,
                           const Dataset& ds, const std::vector<int>& ks) {
  if (ds.split.test.empty()) throw std::invalid_argument("evaluate: empty test set");

  std::vector<std::string> db = ds.split.train;
  db.insert(db.end(), ds.split.val.begin(), ds.split.val.end());
  std::sort(db.begin(), db.end());
  for (int k : ks)
    if (k < 1 || k > static_cast<int>(db.size()))
      throw std::invalid_argument("evaluate: k=" + std::to_string(k) +
                                  " out of range for database size " +
                                  std::to_string(db.size()));

  std::map<std::pair<std::string, std::string>, double> truth;
  for (const auto& s : ds.eval_pairs) truth[{s.i, s.j}] = s.similarity;

  EvalReport rep;
  rep.method = name;
  double total_ms = 0.0;
  long long total_pairs = 0;
  double sum_mse = 0.0, sum_rho = 0.0, sum_tau = 0.0;
  std::map<int, double> sum_pk;

  for (const auto& qid : ds.split.test) {
    const Graph& q = ds.by_id(qid);
    QueryResult qr;
    qr.query_id = qid;
    std::vector<double> preds, truths;
    Ranking pred_rank, truth_rank;
    for (const auto& did : db) {
      auto it = truth.find({qid, did});
      if (it == truth.end()) continue;  // pair skipped during ground-truth build
      const auto t0 = std::chrono::steady_clock::now();
      const double p = fn(q, ds.by_id(did));
      total_ms += std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
      ++total_pairs;
      preds.push_back(p);
      truths.push_back(it->second);
      pred_rank.emplace_back(did, p);
      truth_rank.emplace_back(did, it->second);
    }
    if (preds.empty())
      throw std::runtime_error("evaluate: query " + qid + " has no ground truth");

    qr.mse = mse(preds, truths);
    qr.rho = spearman_rho(preds, truths);
    qr.tau = kendall_tau(preds, truths);
    for (int k : ks) qr.p_at_k[k] = precision_at_k(pred_rank, truth_rank, k);

    Ranking sorted_pred = sorted_ranking(pred_rank);
    std::map<std::string, double> truth_by_id(truth_rank.begin(), truth_rank.end());
    for (const auto& [did, p] : sorted_pred)
      qr.ranking.emplace_back(did, p, truth_by_id[did]);

    sum_mse += qr.mse;
    if (qr.rho)
      sum_rho += *qr.rho;
    else
      ++rep.rho_excluded;
    if (qr.tau)
      sum_tau += *qr.tau;
    else
      ++rep.tau_excluded;
    for (int k : ks) sum_pk[k] += qr.p_at_k[k];
    rep.queries.push_back(std::move(qr));
  }

  rep.n_queries = static_cast<int>(ds.split.test.size());
  rep.mse = sum_mse / rep.n_queries;
  const int rho_n = rep.n_queries - rep.rho_excluded;
  const int tau_n = rep.n_queries - rep.tau_excluded;
  rep.rho = rho_n > 0 ? sum_rho / rho_n : std::nan("");
  rep.tau = tau_n > 0 ? sum_tau / tau_n : std::nan("");
  for (int k : ks) rep.p_at_k[k] = sum_pk[k] / rep.n_queries;
  rep.mean_pair_ms = total_pairs > 0 ? total_ms / total_pairs : 0.0;
  return rep;
}

SimilarityFn classical_similarity(const std::string& algo, int beam_width,
                                  const SearchOptions& opt) {
  return [algo, beam_width, opt](const Graph& a, const Graph& b) {
    GedResult r;
    if (algo == "beam")
      r = ged_beam(a, b, {}, beam_width, opt);
    else if (algo == "hungarian")
      r = ged_hungarian(a, b);
    else if (algo == "vj")
      r = ged_vj(a, b);
    else if (algo == "ensemble")
      r = ged_min_ensemble(a, b, {}, beam_width, opt);
    else if (algo == "astar")
      r = ged_astar(a, b, {}, opt);
    else
      throw std::invalid_argument("classical_similarity: unknown algorithm " + algo);
    return nged_to_similarity(pair_nged(r.distance, a.node_count(), b.node_count()));
  };
}

namespace {

nlohmann::json report_json(const EvalReport& r, bool include_queries) {
  nlohmann::json pk = nlohmann::json::object();
  for (auto [k, v] : r.p_at_k) pk["p@" + std::to_string(k)] = v;
  nlohmann::json j{{"method", r.method},
                   {"mse", r.mse},
                   {"rho", r.rho},
                   {"tau", r.tau},
                   {"rho_excluded", r.rho_excluded},
                   {"tau_excluded", r.tau_excluded},
                   {"p_at_k", pk},
                   {"mean_pair_ms", r.mean_pair_ms},
                   {"n_queries", r.n_queries}};
  if (include_queries) {
    nlohmann::json qs = nlohmann::json::array();
    for (const auto& q : r.queries) {
      nlohmann::json ranking = nlohmann::json::array();
      for (const auto& [id, p, t] : q.ranking)
        ranking.push_back({{"id", id}, {"predicted", p}, {"true", t}});
      qs.push_back({{"query", q.query_id}, {"mse", q.mse}, {"ranking", ranking}});
    }
    j["queries"] = qs;
  }
  return j;
}

}  // namespace

std::string report_to_json(const std::vector<EvalReport>& reports,
                           bool include_queries) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : reports) arr.push_back(report_json(r, include_queries));
  return nlohmann::json{{"reports", arr}}.dump(2);
}

std::string report_to_csv(const std::vector<EvalReport>& reports) {
  std::ostringstream out;
  out << "method,metric,value\n";
  out.precision(12);
  for (const auto& r : reports) {
    out << r.method << ",mse," << r.mse << "\n";
    out << r.method << ",rho," << r.rho << "\n";
    out << r.method << ",tau," << r.tau << "\n";
    for (auto [k, v] : r.p_at_k) out << r.method << ",p@" << k << "," << v << "\n";
    out << r.method << ",mean_pair_ms," << r.mean_pair_ms << "\n";
  }
  return out.str();
}

}  // namespace gedkit
