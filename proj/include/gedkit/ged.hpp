#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gedkit/graph.hpp"

namespace gedkit {

struct CostModel {
  double node_insert = 1.0;
  double node_delete = 1.0;
  double node_relabel = 1.0;
  double edge_insert = 1.0;
  double edge_delete = 1.0;

  bool symmetric() const {
    return node_insert == node_delete && edge_insert == edge_delete;
  }
};

enum class GedKind { exact, upper_bound };

enum class EditOpKind { edge_delete, node_relabel, node_delete, node_insert, edge_insert };

// Edit ops reference node slots: 0..N1-1 are g1's nodes, N1.. are inserted
// nodes, in insertion order. Deleted slots stay addressable until the final
// compaction in apply_edit_path.
struct EditOp {
  EditOpKind kind;
  int a = -1;
  int b = -1;
  std::string label;
};

struct GedResult {
  double distance = 0.0;
  GedKind kind = GedKind::exact;
  std::optional<std::vector<EditOp>> edit_path;
  std::chrono::duration<double, std::milli> elapsed{0.0};
};

struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SearchOptions {
  std::int64_t max_expansions = 20'000'000;
};

// A complete node mapping assigns each g1 node a distinct g2 node or -1
// (deletion); g2 nodes outside the image are insertions. These three
// evaluate/describe such a mapping directly from the definition.
double mapping_cost(const Graph& g1, const Graph& g2, const std::vector<int>& map1to2,
                    const CostModel& cm);
std::vector<EditOp> mapping_edit_path(const Graph& g1, const Graph& g2,
                                      const std::vector<int>& map1to2);
double edit_path_cost(const std::vector<EditOp>& path, const CostModel& cm);
Graph apply_edit_path(const Graph& g1, const std::vector<EditOp>& path);

// Exhaustive enumeration of all complete mappings; the reference oracle.
// Limited to max(N1, N2) <= 7.
GedResult ged_bruteforce(const Graph& g1, const Graph& g2, const CostModel& cm = {});

// Exact best-first search over prefix mappings of g1's nodes in index order,
// with an admissible label-multiset + edge-count heuristic.
GedResult ged_astar(const Graph& g1, const Graph& g2, const CostModel& cm = {},
                    const SearchOptions& opt = {});

// Same search with the open list truncated to the best `width` states after
// each expansion. width <= 0 means unbounded (exact). Always returns the cost
// of a complete edit path, hence an upper bound.
GedResult ged_beam(const Graph& g1, const Graph& g2, const CostModel& cm = {},
                   int width = 100, const SearchOptions& opt = {});

// Bipartite approximations: build the (N1+N2)^2 assignment matrix
// (substitution block = relabel indicator + half degree difference;
// deletion/insertion diagonals include half the incident edge cost), solve it
// optimally, and return the true cost of the induced edit path.
GedResult ged_hungarian(const Graph& g1, const Graph& g2, const CostModel& cm = {});
GedResult ged_vj(const Graph& g1, const Graph& g2, const CostModel& cm = {});

GedResult ged_min_ensemble(const Graph& g1, const Graph& g2, const CostModel& cm = {},
                           int beam_width = 100, const SearchOptions& opt = {});

const char* to_string(GedKind kind);
const char* to_string(EditOpKind kind);

}  // namespace gedkit
