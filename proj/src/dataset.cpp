#include "gedkit/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace gedkit {

using nlohmann::json;
namespace fs = std::filesystem;

const Graph& Dataset::by_id(const std::string& id) const {
  for (const auto& g : graphs)
    if (g.id == id) return g;
  throw std::invalid_argument("dataset: no graph with id " + id);
}

bool Dataset::has_id(const std::string& id) const {
  for (const auto& g : graphs)
    if (g.id == id) return true;
  return false;
}

double pair_nged(double ged, int n1, int n2) {
  return ged / ((n1 + n2) / 2.0);
}

double nged_to_similarity(double nged) { return std::exp(-nged); }

namespace {

struct PairTask {
  int gi, gj;
  int bucket;  // 0 train, 1 val, 2 eval
};

}  // namespace

Dataset build_dataset(std::vector<Graph> graphs, const BuildOptions& opt) {
  if (graphs.empty()) throw std::invalid_argument("build_dataset: no graphs");
  {
    std::set<std::string> ids;
    for (const auto& g : graphs)
      if (!ids.insert(g.id).second)
        throw std::invalid_argument("build_dataset: duplicate graph id " + g.id);
  }

  Dataset ds;
  ds.graphs = std::move(graphs);
  const int n = static_cast<int>(ds.graphs.size());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opt.seed);
  std::shuffle(order.begin(), order.end(), rng);

  const int n_train = static_cast<int>(std::llround(0.6 * n));
  const int n_val = static_cast<int>(std::llround(0.2 * n));
  std::vector<int> train_idx, val_idx, test_idx;
  for (int k = 0; k < n; ++k) {
    if (k < n_train)
      train_idx.push_back(order[k]);
    else if (k < n_train + n_val)
      val_idx.push_back(order[k]);
    else
      test_idx.push_back(order[k]);
  }
  // Canonical (smaller-id, larger-id) pair order within each bucket.
  auto by_id = [&](int a, int b) { return ds.graphs[a].id < ds.graphs[b].id; };
  std::sort(train_idx.begin(), train_idx.end(), by_id);
  std::sort(val_idx.begin(), val_idx.end(), by_id);
  std::sort(test_idx.begin(), test_idx.end(), by_id);
  for (int i : train_idx) ds.split.train.push_back(ds.graphs[i].id);
  for (int i : val_idx) ds.split.val.push_back(ds.graphs[i].id);
  for (int i : test_idx) ds.split.test.push_back(ds.graphs[i].id);

  std::vector<PairTask> tasks;
  for (std::size_t a = 0; a < train_idx.size(); ++a)
    for (std::size_t b = a; b < train_idx.size(); ++b)
      tasks.push_back({train_idx[a], train_idx[b], 0});
  for (int v : val_idx)
    for (int t : train_idx) tasks.push_back({v, t, 1});
  std::vector<int> db_idx = train_idx;
  db_idx.insert(db_idx.end(), val_idx.begin(), val_idx.end());
  std::sort(db_idx.begin(), db_idx.end(), by_id);
  for (int q : test_idx)
    for (int d : db_idx) tasks.push_back({q, d, 2});

  struct Outcome {
    bool ok = false;
    double ged = 0.0;
    GedKind kind = GedKind::exact;
  };
  std::vector<Outcome> outcomes(tasks.size());

  auto compute = [&](std::size_t ti) {
    const auto& task = tasks[ti];
    const Graph& a = ds.graphs[task.gi];
    const Graph& b = ds.graphs[task.gj];
    Outcome out;
    try {
      if (std::max(a.node_count(), b.node_count()) <= opt.size_threshold) {
        GedResult r = ged_astar(a, b, {}, opt.search);
        out = {true, r.distance, GedKind::exact};
      } else {
        GedResult r = ged_min_ensemble(a, b, {}, opt.beam_width, opt.search);
        out = {true, r.distance, GedKind::upper_bound};
      }
    } catch (const BudgetExceeded&) {
      out.ok = false;
    }
    outcomes[ti] = out;
  };

  if (opt.jobs <= 1) {
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) compute(ti);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < opt.jobs; ++w)
      pool.emplace_back([&] {
        for (std::size_t ti = next.fetch_add(1); ti < tasks.size();
             ti = next.fetch_add(1))
          compute(ti);
      });
    for (auto& th : pool) th.join();
  }

  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    if (!outcomes[ti].ok) {
      ++ds.skipped_pairs;
      continue;
    }
    const auto& task = tasks[ti];
    const Graph& a = ds.graphs[task.gi];
    const Graph& b = ds.graphs[task.gj];
    GraphPairSample s;
    s.i = a.id;
    s.j = b.id;
    s.ged = outcomes[ti].ged;
    s.ged_kind = outcomes[ti].kind;
    s.nged = pair_nged(s.ged, a.node_count(), b.node_count());
    s.similarity = nged_to_similarity(s.nged);
    (task.bucket == 0 ? ds.train_pairs : task.bucket == 1 ? ds.val_pairs : ds.eval_pairs)
        .push_back(std::move(s));
  }
  return ds;
}

// --- persistence ---

namespace {

json sample_to_json(const GraphPairSample& s) {
  return json{{"i", s.i},         {"j", s.j},
              {"ged", s.ged},     {"kind", to_string(s.ged_kind)},
              {"nged", s.nged},   {"similarity", s.similarity}};
}

GraphPairSample sample_from_json(const json& j) {
  GraphPairSample s;
  s.i = j.at("i").get<std::string>();
  s.j = j.at("j").get<std::string>();
  s.ged = j.at("ged").get<double>();
  s.ged_kind = j.at("kind").get<std::string>() == "exact" ? GedKind::exact
                                                          : GedKind::upper_bound;
  s.nged = j.at("nged").get<double>();
  s.similarity = j.at("similarity").get<double>();
  return s;
}

void save_pairs(const std::vector<GraphPairSample>& pairs, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& s : pairs) out << sample_to_json(s).dump() << "\n";
}

std::vector<GraphPairSample> load_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<GraphPairSample> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    pairs.push_back(sample_from_json(json::parse(line)));
  }
  return pairs;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir) {
  fs::create_directories(dir);
  const fs::path root(dir);
  save_graph_file(ds.graphs, (root / "graphs.jsonl").string());
  json split{{"train", ds.split.train},
             {"val", ds.split.val},
             {"test", ds.split.test},
             {"skipped_pairs", ds.skipped_pairs}};
  std::ofstream out(root / "split.json");
  if (!out) throw std::runtime_error("cannot write split.json in " + dir);
  out << split.dump(2) << "\n";
  save_pairs(ds.train_pairs, root / "pairs_train.jsonl");
  save_pairs(ds.val_pairs, root / "pairs_val.jsonl");
  save_pairs(ds.eval_pairs, root / "pairs_eval.jsonl");
}

Dataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  Dataset ds;
  ds.graphs = load_graph_file((root / "graphs.jsonl").string());
  std::ifstream in(root / "split.json");
  if (!in) throw std::runtime_error("cannot open split.json in " + dir);
  json split;
  in >> split;
  ds.split.train = split.at("train").get<std::vector<std::string>>();
  ds.split.val = split.at("val").get<std::vector<std::string>>();
  ds.split.test = split.at("test").get<std::vector<std::string>>();
  ds.skipped_pairs = split.value("skipped_pairs", 0);
  ds.train_pairs = load_pairs(root / "pairs_train.jsonl");
  ds.val_pairs = load_pairs(root / "pairs_val.jsonl");
  ds.eval_pairs = load_pairs(root / "pairs_eval.jsonl");
  return ds;
}

std::vector<Graph> make_corpus(const CorpusOptions& opt) {
  if (opt.n_graphs < 1 || opt.min_nodes < 1 || opt.max_nodes < opt.min_nodes ||
      opt.variants_per_base < 0 || opt.perturb_min < 1 ||
      opt.perturb_max < opt.perturb_min)
    throw std::invalid_argument("make_corpus: bad options");
  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<int> size(opt.min_nodes, opt.max_nodes);
  std::uniform_real_distribution<double> dens(opt.density_min, opt.density_max);
  std::uniform_int_distribution<int> kd(opt.perturb_min, opt.perturb_max);

  PerturbOptions po;
  po.min_nodes = opt.min_nodes;
  po.max_nodes = opt.max_nodes;
  po.alphabet = opt.alphabet;

  std::vector<Graph> graphs;
  char buf[32];
  while (static_cast<int>(graphs.size()) < opt.n_graphs) {
    const int n = size(rng);
    const double density = dens(rng);
    const std::uint64_t gseed = rng();
    Graph base = generate_graph(n, density, opt.alphabet, gseed);
    std::snprintf(buf, sizeof buf, "g%03d", static_cast<int>(graphs.size()));
    base.id = buf;
    graphs.push_back(base);
    for (int v = 0;
         v < opt.variants_per_base && static_cast<int>(graphs.size()) < opt.n_graphs;
         ++v) {
      const int k = kd(rng);
      const std::uint64_t pseed = rng();
      PerturbResult pr = perturb_graph(base, k, pseed, po);
      std::snprintf(buf, sizeof buf, "g%03d", static_cast<int>(graphs.size()));
      pr.graph.id = buf;
      graphs.push_back(pr.graph);
    }
  }
  return graphs;
}

Batcher::Batcher(int n_samples, int batch_size, std::uint64_t seed)
    : n_(n_samples), batch_(batch_size), state_(seed) {
  if (n_ < 1) throw std::invalid_argument("Batcher: need at least one sample");
  if (batch_ < 1) throw std::invalid_argument("Batcher: batch size must be >= 1");
}

std::vector<std::vector<int>> Batcher::next_epoch() {
  std::mt19937_64 rng(state_);
  state_ = rng();  // advance the stream so epochs differ
  std::vector<int> order(n_);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<int>> batches;
  for (int start = 0; start < n_; start += batch_) {
    int end = std::min(n_, start + batch_);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

}  // namespace gedkit
