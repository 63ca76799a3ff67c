#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gedkit/ged.hpp"
#include "gedkit/graph.hpp"

namespace gedkit {

struct GraphPairSample {
  std::string i, j;
  double ged = 0.0;
  GedKind ged_kind = GedKind::exact;
  double nged = 0.0;
  double similarity = 1.0;
};

struct DatasetSplit {
  std::vector<std::string> train, val, test;
};

struct Dataset {
  std::vector<Graph> graphs;
  DatasetSplit split;
  std::vector<GraphPairSample> train_pairs;  // train x train, i <= j
  std::vector<GraphPairSample> val_pairs;    // val x train
  std::vector<GraphPairSample> eval_pairs;   // test x (train + val)
  int skipped_pairs = 0;                     // search budget exceeded

  const Graph& by_id(const std::string& id) const;
  bool has_id(const std::string& id) const;
};

double pair_nged(double ged, int n1, int n2);
double nged_to_similarity(double nged);  // exp(-nged)

struct BuildOptions {
  int size_threshold = 10;  // exact GED up to this node count, ensemble beyond
  std::uint64_t seed = 1;
  int beam_width = 100;
  int jobs = 1;
  SearchOptions search;
};

// 60/20/20 graph split (seeded shuffle), ground truth per pair: exact A*
// below the size threshold, min of {beam, hungarian, vj} above. Pairs whose
// exact search exceeds the budget are dropped and counted.
Dataset build_dataset(std::vector<Graph> graphs, const BuildOptions& opt);

void save_dataset(const Dataset& ds, const std::string& dir);
Dataset load_dataset(const std::string& dir);

// Synthetic corpus: random connected base graphs plus perturbed variants
// (known small edit distance to their base), so pair similarities cover a
// useful range instead of clustering at "far apart".
struct CorpusOptions {
  int n_graphs = 100;
  int min_nodes = 4;
  int max_nodes = 8;
  std::vector<std::string> alphabet{"A", "B", "C", "D"};
  double density_min = 0.1;
  double density_max = 0.4;
  int variants_per_base = 3;
  int perturb_min = 1;
  int perturb_max = 4;
  std::uint64_t seed = 1;
};

std::vector<Graph> make_corpus(const CorpusOptions& opt);

// Per-epoch shuffled index batches over one seeded stream; the final short
// batch is kept.
class Batcher {
 public:
  Batcher(int n_samples, int batch_size, std::uint64_t seed);
  std::vector<std::vector<int>> next_epoch();

 private:
  int n_, batch_;
  std::uint64_t state_;
};

}  // namespace gedkit
