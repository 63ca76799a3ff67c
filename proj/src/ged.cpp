#include "gedkit/ged.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "gedkit/assignment.hpp"

namespace gedkit {

const char* to_string(GedKind kind) {
  return kind == GedKind::exact ? "exact" : "upper_bound";
}

const char* to_string(EditOpKind kind) {
  switch (kind) {
    case EditOpKind::edge_delete: return "edge_delete";
    case EditOpKind::node_relabel: return "node_relabel";
    case EditOpKind::node_delete: return "node_delete";
    case EditOpKind::node_insert: return "node_insert";
    case EditOpKind::edge_insert: return "edge_insert";
  }
  return "?";
}

// --- mapping evaluation (direct from the definition) ---

double mapping_cost(const Graph& g1, const Graph& g2, const std::vector<int>& m,
                    const CostModel& cm) {
  const int n1 = g1.node_count(), n2 = g2.node_count();
  if (static_cast<int>(m.size()) != n1)
    throw std::invalid_argument("mapping_cost: mapping size mismatch");
  std::vector<char> image(n2, 0);
  double cost = 0.0;
  for (int u = 0; u < n1; ++u) {
    int v = m[u];
    if (v < 0) {
      cost += cm.node_delete;
    } else {
      if (v >= n2 || image[v])
        throw std::invalid_argument("mapping_cost: mapping is not injective");
      image[v] = 1;
      if (g1.labels[u] != g2.labels[v]) cost += cm.node_relabel;
    }
  }
  for (int v = 0; v < n2; ++v)
    if (!image[v]) cost += cm.node_insert;

  int matched = 0;
  for (auto [a, b] : g1.edges) {
    if (m[a] >= 0 && m[b] >= 0 && g2.has_edge(m[a], m[b]))
      ++matched;
    else
      cost += cm.edge_delete;
  }
  cost += (g2.edge_count() - matched) * cm.edge_insert;
  return cost;
}

std::vector<EditOp> mapping_edit_path(const Graph& g1, const Graph& g2,
                                      const std::vector<int>& m) {
  const int n1 = g1.node_count(), n2 = g2.node_count();
  std::vector<int> slot_of(n2, -1);  // g2 node -> slot in the edited graph
  for (int u = 0; u < n1; ++u)
    if (m[u] >= 0) slot_of[m[u]] = u;

  std::vector<EditOp> path;
  for (auto [a, b] : g1.edges)
    if (!(m[a] >= 0 && m[b] >= 0 && g2.has_edge(m[a], m[b])))
      path.push_back({EditOpKind::edge_delete, a, b, {}});
  for (int u = 0; u < n1; ++u)
    if (m[u] >= 0 && g1.labels[u] != g2.labels[m[u]])
      path.push_back({EditOpKind::node_relabel, u, -1, g2.labels[m[u]]});
  for (int u = 0; u < n1; ++u)
    if (m[u] < 0) path.push_back({EditOpKind::node_delete, u, -1, {}});
  int next_slot = n1;
  for (int v = 0; v < n2; ++v)
    if (slot_of[v] < 0) {
      slot_of[v] = next_slot++;
      path.push_back({EditOpKind::node_insert, slot_of[v], -1, g2.labels[v]});
    }
  for (auto [x, y] : g2.edges) {
    bool matched = slot_of[x] < n1 && slot_of[y] < n1 &&
                   g1.has_edge(slot_of[x], slot_of[y]);
    if (!matched) path.push_back({EditOpKind::edge_insert, slot_of[x], slot_of[y], {}});
  }
  return path;
}

double edit_path_cost(const std::vector<EditOp>& path, const CostModel& cm) {
  double c = 0.0;
  for (const auto& op : path) switch (op.kind) {
      case EditOpKind::edge_delete: c += cm.edge_delete; break;
      case EditOpKind::node_relabel: c += cm.node_relabel; break;
      case EditOpKind::node_delete: c += cm.node_delete; break;
      case EditOpKind::node_insert: c += cm.node_insert; break;
      case EditOpKind::edge_insert: c += cm.edge_insert; break;
    }
  return c;
}

Graph apply_edit_path(const Graph& g1, const std::vector<EditOp>& path) {
  const int n1 = g1.node_count();
  std::vector<std::string> labels = g1.labels;
  std::vector<char> alive(n1, 1);
  std::set<std::pair<int, int>> edges(g1.edges.begin(), g1.edges.end());

  auto need_slot = [&](int s) {
    if (s < 0 || s >= static_cast<int>(labels.size()))
      throw std::invalid_argument("apply_edit_path: bad node slot");
  };
  for (const auto& op : path) switch (op.kind) {
      case EditOpKind::edge_delete: {
        need_slot(op.a);
        need_slot(op.b);
        if (!edges.erase(std::minmax(op.a, op.b)))
          throw std::invalid_argument("apply_edit_path: deleting a missing edge");
        break;
      }
      case EditOpKind::node_relabel:
        need_slot(op.a);
        labels[op.a] = op.label;
        break;
      case EditOpKind::node_delete: {
        need_slot(op.a);
        for (auto [x, y] : edges)
          if (x == op.a || y == op.a)
            throw std::invalid_argument("apply_edit_path: deleting a non-isolated node");
        alive[op.a] = 0;
        break;
      }
      case EditOpKind::node_insert: {
        if (op.a != static_cast<int>(labels.size()))
          throw std::invalid_argument("apply_edit_path: node slots must be appended in order");
        labels.push_back(op.label);
        alive.push_back(1);
        break;
      }
      case EditOpKind::edge_insert: {
        need_slot(op.a);
        need_slot(op.b);
        if (!alive[op.a] || !alive[op.b])
          throw std::invalid_argument("apply_edit_path: edge endpoint is deleted");
        if (!edges.insert(std::minmax(op.a, op.b)).second)
          throw std::invalid_argument("apply_edit_path: inserting a duplicate edge");
        break;
      }
    }

  std::vector<int> remap(labels.size(), -1);
  std::vector<std::string> out_labels;
  for (std::size_t s = 0; s < labels.size(); ++s)
    if (alive[s]) {
      remap[s] = static_cast<int>(out_labels.size());
      out_labels.push_back(labels[s]);
    }
  std::vector<std::pair<int, int>> out_edges;
  for (auto [x, y] : edges) {
    if (remap[x] < 0 || remap[y] < 0)
      throw std::invalid_argument("apply_edit_path: dangling edge after deletions");
    out_edges.emplace_back(remap[x], remap[y]);
  }
  return make_graph(g1.id + "+edits", std::move(out_labels), out_edges);
}

// --- brute force ---

namespace {

struct Stopwatch {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  std::chrono::duration<double, std::milli> elapsed() const {
    return std::chrono::steady_clock::now() - start;
  }
};

void enumerate_mappings(const Graph& g1, const Graph& g2, const CostModel& cm,
                        std::vector<int>& m, std::vector<char>& used, int depth,
                        double& best, std::vector<int>& best_map) {
  const int n1 = g1.node_count(), n2 = g2.node_count();
  if (depth == n1) {
    double c = mapping_cost(g1, g2, m, cm);
    if (c < best) {
      best = c;
      best_map = m;
    }
    return;
  }
  for (int v = 0; v < n2; ++v) {
    if (used[v]) continue;
    used[v] = 1;
    m[depth] = v;
    enumerate_mappings(g1, g2, cm, m, used, depth + 1, best, best_map);
    used[v] = 0;
  }
  m[depth] = -1;
  enumerate_mappings(g1, g2, cm, m, used, depth + 1, best, best_map);
}

}  // namespace

GedResult ged_bruteforce(const Graph& g1, const Graph& g2, const CostModel& cm) {
  Stopwatch sw;
  const int n1 = g1.node_count(), n2 = g2.node_count();
  if (std::max(n1, n2) > 7)
    throw std::invalid_argument("ged_bruteforce: limited to graphs with at most 7 nodes");
  std::vector<int> m(n1, -1), best_map(n1, -1);
  std::vector<char> used(n2, 0);
  double best = std::numeric_limits<double>::infinity();
  enumerate_mappings(g1, g2, cm, m, used, 0, best, best_map);
  GedResult res;
  res.distance = best;
  res.kind = GedKind::exact;
  res.edit_path = mapping_edit_path(g1, g2, best_map);
  res.elapsed = sw.elapsed();
  return res;
}

// --- A* / beam search over prefix mappings ---

namespace {

struct PairView {
  const Graph& g1;
  const Graph& g2;
  const CostModel& cm;
  int n1, n2;
  std::vector<std::uint64_t> adj1, adj2;
  std::vector<int> lab1, lab2;
  int n_labels = 0;
  // suffix_label_count[i][l]: g1 nodes i.. with label l; suffix_edges[i]:
  // g1 edges with an endpoint >= i (exactly the ones not yet charged at depth i).
  std::vector<std::vector<int>> suffix_label_count;
  std::vector<int> suffix_edges;
  std::vector<int> total2_label_count;

  PairView(const Graph& a, const Graph& b, const CostModel& cost_model)
      : g1(a), g2(b), cm(cost_model), n1(a.node_count()), n2(b.node_count()) {
    if (n1 > 62 || n2 > 62)
      throw std::invalid_argument("ged search: graphs above 62 nodes are not supported");
    std::map<std::string, int> ids;
    auto intern = [&](const std::string& s) {
      auto [it, _] = ids.emplace(s, static_cast<int>(ids.size()));
      return it->second;
    };
    for (int u = 0; u < n1; ++u) lab1.push_back(intern(a.labels[u]));
    for (int v = 0; v < n2; ++v) lab2.push_back(intern(b.labels[v]));
    n_labels = static_cast<int>(ids.size());

    adj1.assign(n1, 0);
    for (auto [u, v] : a.edges) {
      adj1[u] |= 1ull << v;
      adj1[v] |= 1ull << u;
    }
    adj2.assign(n2, 0);
    for (auto [u, v] : b.edges) {
      adj2[u] |= 1ull << v;
      adj2[v] |= 1ull << u;
    }

    suffix_label_count.assign(n1 + 1, std::vector<int>(n_labels, 0));
    for (int i = n1 - 1; i >= 0; --i) {
      suffix_label_count[i] = suffix_label_count[i + 1];
      ++suffix_label_count[i][lab1[i]];
    }
    suffix_edges.assign(n1 + 1, 0);
    for (int i = n1 - 1; i >= 0; --i) {
      int cnt = 0;
      for (auto [u, v] : a.edges)
        if (std::max(u, v) >= i) ++cnt;
      suffix_edges[i] = cnt;
    }
    total2_label_count.assign(n_labels, 0);
    for (int v = 0; v < n2; ++v) ++total2_label_count[lab2[v]];
  }
};

struct SearchState {
  double g = 0.0, f = 0.0;
  std::uint64_t used = 0;
  int parent = -1;
  std::int16_t depth = 0;
  std::int16_t assigned = -2;  // g2 node, or -1 for deletion
  std::int32_t e2_within = 0;  // g2 edges with both endpoints used
};

// Admissible remainder bound: optimal label matching relaxation on unmapped
// nodes plus edge count imbalance.
double heuristic(const PairView& pv, int depth, std::uint64_t used, int e2_within) {
  const auto& rem1 = pv.suffix_label_count[depth];
  std::vector<int> rem2 = pv.total2_label_count;
  int r2 = 0;
  for (int v = 0; v < pv.n2; ++v)
    if (used >> v & 1) --rem2[pv.lab2[v]];
  const int r1 = pv.n1 - depth;
  for (int l = 0; l < pv.n_labels; ++l) r2 += rem2[l];

  int common = 0;
  for (int l = 0; l < pv.n_labels; ++l) common += std::min(rem1[l], rem2[l]);
  double node_h = std::numeric_limits<double>::infinity();
  for (int match = 0; match <= std::min(r1, r2); ++match) {
    double c = std::max(0, match - common) * pv.cm.node_relabel +
               (r1 - match) * pv.cm.node_delete + (r2 - match) * pv.cm.node_insert;
    node_h = std::min(node_h, c);
  }

  const int a = pv.suffix_edges[depth];
  const int b = pv.g2.edge_count() - e2_within;
  const int matched = std::min(a, b);
  double edge_h = (a - matched) * pv.cm.edge_delete + (b - matched) * pv.cm.edge_insert;
  return node_h + edge_h;
}

// Cost charged when extending a prefix mapping by u=depth -> v (or deletion):
// the node op plus every edge whose charge is now decided.
double step_cost(const PairView& pv, const std::vector<int>& prefix_map, int depth,
                 int v, std::uint64_t used) {
  const std::uint64_t prefix_mask = (depth == 0) ? 0 : ((1ull << depth) - 1);
  const int e1_new = std::popcount(pv.adj1[depth] & prefix_mask);
  double cost;
  if (v < 0) {
    cost = pv.cm.node_delete + e1_new * pv.cm.edge_delete;
  } else {
    cost = pv.lab1[depth] == pv.lab2[v] ? 0.0 : pv.cm.node_relabel;
    int matched = 0;
    std::uint64_t nb = pv.adj1[depth] & prefix_mask;
    while (nb) {
      int j = std::countr_zero(nb);
      nb &= nb - 1;
      int w = prefix_map[j];
      if (w >= 0 && (pv.adj2[v] >> w & 1)) ++matched;
    }
    const int e2_new = std::popcount(pv.adj2[v] & used);
    cost += (e1_new - matched) * pv.cm.edge_delete + (e2_new - matched) * pv.cm.edge_insert;
  }
  return cost;
}

struct SearchOutcome {
  double distance = 0.0;
  std::vector<int> mapping;
};

SearchOutcome run_search(const Graph& g1, const Graph& g2, const CostModel& cm,
                         int width, const SearchOptions& opt) {
  PairView pv(g1, g2, cm);

  std::vector<SearchState> arena;
  arena.push_back({});
  arena[0].f = heuristic(pv, 0, 0, 0);

  struct OpenEntry {
    double f;
    int idx;
    bool operator<(const OpenEntry& o) const {  // min-heap via greater-than
      return f != o.f ? f > o.f : idx > o.idx;
    }
  };
  std::vector<OpenEntry> open{{arena[0].f, 0}};

  std::vector<int> prefix_map(pv.n1, -2);
  std::int64_t expansions = 0;
  while (!open.empty()) {
    std::pop_heap(open.begin(), open.end());
    OpenEntry top = open.back();
    open.pop_back();
    const SearchState s = arena[top.idx];

    if (s.depth == pv.n1) {
      std::vector<int> m(pv.n1, -2);
      for (int idx = top.idx, d = s.depth; d > 0; --d) {
        m[d - 1] = arena[idx].assigned;
        idx = arena[idx].parent;
      }
      return {s.g, std::move(m)};
    }

    if (++expansions > opt.max_expansions)
      throw BudgetExceeded("ged search: expansion budget exceeded (" +
                           std::to_string(opt.max_expansions) + ")");

    // Recover the prefix mapping once; children reuse it.
    for (int idx = top.idx, d = s.depth; d > 0; --d) {
      prefix_map[d - 1] = arena[idx].assigned;
      idx = arena[idx].parent;
    }

    auto push_child = [&](int v) {
      SearchState c;
      c.parent = top.idx;
      c.depth = static_cast<std::int16_t>(s.depth + 1);
      c.assigned = static_cast<std::int16_t>(v);
      c.used = v < 0 ? s.used : (s.used | (1ull << v));
      c.e2_within =
          v < 0 ? s.e2_within : s.e2_within + std::popcount(pv.adj2[v] & s.used);
      c.g = s.g + step_cost(pv, prefix_map, s.depth, v, s.used);
      if (c.depth == pv.n1) {
        const int inserted = pv.n2 - std::popcount(c.used);
        c.g += inserted * cm.node_insert +
               (pv.g2.edge_count() - c.e2_within) * cm.edge_insert;
        c.f = c.g;
      } else {
        c.f = c.g + heuristic(pv, c.depth, c.used, c.e2_within);
      }
      arena.push_back(c);
      open.push_back({c.f, static_cast<int>(arena.size()) - 1});
      std::push_heap(open.begin(), open.end());
    };

    for (int v = 0; v < pv.n2; ++v)
      if (!(s.used >> v & 1)) push_child(v);
    push_child(-1);

    if (width > 0 && static_cast<int>(open.size()) > width) {
      std::sort(open.begin(), open.end(), [](const OpenEntry& x, const OpenEntry& y) {
        return x.f != y.f ? x.f < y.f : x.idx < y.idx;
      });
      open.resize(width);
      std::make_heap(open.begin(), open.end());
    }
  }
  throw std::logic_error("ged search: open list exhausted without a goal");
}

// Swapping to a canonical orientation keeps the suboptimal searches exactly
// symmetric in their arguments; only valid when the cost model is symmetric.
bool flip_to_canonical(const Graph& g1, const Graph& g2, const CostModel& cm) {
  if (!cm.symmetric()) return false;
  if (g2.node_count() != g1.node_count()) return g2.node_count() < g1.node_count();
  if (g2.edge_count() != g1.edge_count()) return g2.edge_count() < g1.edge_count();
  if (g2.labels != g1.labels) return g2.labels < g1.labels;
  return g2.edges < g1.edges;
}

std::vector<int> invert_mapping(const std::vector<int>& m, int n_from, int n_to) {
  std::vector<int> inv(n_to, -1);
  for (int u = 0; u < n_from; ++u)
    if (m[u] >= 0) inv[m[u]] = u;
  return inv;
}

// The suboptimal methods resolve mapping ties arbitrarily, which can charge
// identical graphs a nonzero path. Considering the identity mapping as an
// extra candidate keeps d(g,g) = 0 without weakening the upper bound.
std::vector<int> prefer_identity(const Graph& g1, const Graph& g2,
                                 std::vector<int> m, const CostModel& cm) {
  if (g1.node_count() != g2.node_count()) return m;
  std::vector<int> identity(g1.node_count());
  std::iota(identity.begin(), identity.end(), 0);
  if (mapping_cost(g1, g2, identity, cm) < mapping_cost(g1, g2, m, cm))
    return identity;
  return m;
}

}  // namespace

GedResult ged_astar(const Graph& g1, const Graph& g2, const CostModel& cm,
                    const SearchOptions& opt) {
  Stopwatch sw;
  SearchOutcome out = run_search(g1, g2, cm, 0, opt);
  GedResult res;
  res.distance = out.distance;
  res.kind = GedKind::exact;
  res.edit_path = mapping_edit_path(g1, g2, out.mapping);
  res.elapsed = sw.elapsed();
  return res;
}

GedResult ged_beam(const Graph& g1, const Graph& g2, const CostModel& cm, int width,
                   const SearchOptions& opt) {
  Stopwatch sw;
  const bool flip = flip_to_canonical(g1, g2, cm);
  const Graph& a = flip ? g2 : g1;
  const Graph& b = flip ? g1 : g2;
  SearchOutcome out = run_search(a, b, cm, width, opt);
  const std::vector<int> m = prefer_identity(
      g1, g2,
      flip ? invert_mapping(out.mapping, a.node_count(), b.node_count()) : out.mapping,
      cm);
  GedResult res;
  res.distance = mapping_cost(g1, g2, m, cm);
  res.kind = GedKind::upper_bound;
  res.edit_path = mapping_edit_path(g1, g2, m);
  res.elapsed = sw.elapsed();
  return res;
}

namespace {

double lap_cell_inf() { return 1e9; }

// Riesen/Bunke style square assignment matrix over node operations, with
// incident-edge costs charged half to each endpoint.
std::vector<double> build_lap_matrix(const Graph& g1, const Graph& g2,
                                     const CostModel& cm) {
  const int n1 = g1.node_count(), n2 = g2.node_count();
  const int n = n1 + n2;
  std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
  const double inf = lap_cell_inf();
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double sub = g1.labels[i] == g2.labels[j] ? 0.0 : cm.node_relabel;
      const int du = g1.degree(i), dv = g2.degree(j);
      sub += du > dv ? 0.5 * (du - dv) * cm.edge_delete : 0.5 * (dv - du) * cm.edge_insert;
      c[static_cast<std::size_t>(i) * n + j] = sub;
    }
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n1; ++j)
      c[static_cast<std::size_t>(i) * n + (n2 + j)] =
          i == j ? cm.node_delete + 0.5 * g1.degree(i) * cm.edge_delete : inf;
  for (int i = 0; i < n2; ++i)
    for (int j = 0; j < n2; ++j)
      c[static_cast<std::size_t>(n1 + i) * n + j] =
          i == j ? cm.node_insert + 0.5 * g2.degree(i) * cm.edge_insert : inf;
  return c;
}

GedResult ged_lap(const Graph& g1, const Graph& g2, const CostModel& cm, bool use_jv) {
  Stopwatch sw;
  const bool flip = flip_to_canonical(g1, g2, cm);
  const Graph& a = flip ? g2 : g1;
  const Graph& b = flip ? g1 : g2;
  const int na = a.node_count(), nb = b.node_count();

  auto cmatrix = build_lap_matrix(a, b, cm);
  auto sol = use_jv ? solve_assignment_jv(cmatrix, na + nb)
                    : solve_assignment_hungarian(cmatrix, na + nb);

  std::vector<int> map_ab(na, -1);
  for (int i = 0; i < na; ++i)
    if (sol.row_to_col[i] < nb) map_ab[i] = sol.row_to_col[i];

  const std::vector<int> m = prefer_identity(
      g1, g2, flip ? invert_mapping(map_ab, na, nb) : map_ab, cm);
  GedResult res;
  res.distance = mapping_cost(g1, g2, m, cm);
  res.kind = GedKind::upper_bound;
  res.edit_path = mapping_edit_path(g1, g2, m);
  res.elapsed = sw.elapsed();
  return res;
}

}  // namespace

GedResult ged_hungarian(const Graph& g1, const Graph& g2, const CostModel& cm) {
  return ged_lap(g1, g2, cm, false);
}

GedResult ged_vj(const Graph& g1, const Graph& g2, const CostModel& cm) {
  return ged_lap(g1, g2, cm, true);
}

GedResult ged_min_ensemble(const Graph& g1, const Graph& g2, const CostModel& cm,
                           int beam_width, const SearchOptions& opt) {
  Stopwatch sw;
  GedResult best = ged_beam(g1, g2, cm, beam_width, opt);
  for (auto res : {ged_hungarian(g1, g2, cm), ged_vj(g1, g2, cm)})
    if (res.distance < best.distance) best = std::move(res);
  best.kind = GedKind::upper_bound;
  best.elapsed = sw.elapsed();
  return best;
}

}  // namespace gedkit
