#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace gedkit {

// Node-labeled undirected simple graph. Node indices are contiguous 0..N-1.
// An empty label string marks an unlabeled node; a graph is either fully
// labeled or fully unlabeled.
struct Graph {
  std::string id;
  std::vector<std::string> labels;
  std::vector<std::pair<int, int>> edges;  // canonical: first < second, sorted
  std::vector<std::vector<int>> adj;       // sorted neighbor lists

  int node_count() const { return static_cast<int>(labels.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }
  int degree(int u) const { return static_cast<int>(adj[u].size()); }
  bool has_edge(int u, int v) const;
  bool labeled() const { return !labels.empty() && !labels[0].empty(); }
};

// Validates and canonicalizes an edge list: reversed/duplicate edges collapse
// to one undirected edge, self-loops and out-of-range endpoints are rejected.
Graph make_graph(std::string id, std::vector<std::string> labels,
                 const std::vector<std::pair<int, int>>& edges);

bool same_graph(const Graph& a, const Graph& b);  // labels + edge set, ids ignored
bool is_connected(const Graph& g);
bool isomorphic(const Graph& a, const Graph& b);  // exhaustive, guarded to N <= 10

// Relabels node i to perm[i]; labels and edges follow their nodes.
Graph permute_nodes(const Graph& g, const std::vector<int>& perm);

// Connected random graph: uniform random spanning tree attachment, then
// round(density * remaining_pairs) extra edges. Deterministic in all inputs.
Graph generate_graph(int n, double edge_density,
                     const std::vector<std::string>& alphabet, std::uint64_t seed);

struct PerturbOptions {
  bool keep_connected = true;
  int min_nodes = 1;
  int max_nodes = std::numeric_limits<int>::max();
  std::vector<std::string> alphabet;  // empty: reuse labels present in the graph
};

struct PerturbResult {
  Graph graph;
  int applied_edits = 0;
};

// Applies k random edit operations (vertex/edge insert/delete, relabel).
// Composite moves account for every atomic edit they contain, so
// GED(g, result) <= k always holds. Inapplicable operation types are skipped
// and another is drawn.
PerturbResult perturb_graph(const Graph& g, int k, std::uint64_t seed,
                            const PerturbOptions& opt = {});

// File format: one JSON object per graph,
//   {"id": "...", "nodes": [{"i": 0, "label": "C"}, ...], "edges": [[0,1], ...]}
// with "label" omitted for unlabeled graphs. Dataset files hold one object
// per line (UTF-8, LF).
Graph parse_graph(const std::string& json_text);
std::string graph_to_json(const Graph& g);
Graph load_graph(const std::string& path);
void save_graph(const Graph& g, const std::string& path);
std::vector<Graph> load_graph_file(const std::string& path);
void save_graph_file(const std::vector<Graph>& graphs, const std::string& path);

// One-hot encoding over the label alphabet seen at fit time. Unlabeled
// graphs get a shared constant 1-dimensional feature (value 1.0).
class LabelEncoder {
 public:
  LabelEncoder() = default;
  static LabelEncoder fit(const std::vector<Graph>& graphs);
  static LabelEncoder constant();
  static LabelEncoder from_labels(std::vector<std::string> labels);

  bool is_constant() const { return constant_; }
  int dimension() const;
  const std::vector<std::string>& labels() const { return labels_; }
  int index_of(const std::string& label) const;  // throws on unknown label
  std::vector<double> encode(const Graph& g) const;  // row-major N x dimension()

 private:
  std::vector<std::string> labels_;
  bool constant_ = false;
};

}  // namespace gedkit
