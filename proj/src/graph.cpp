#include "gedkit/graph.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace gedkit {

using nlohmann::json;

bool Graph::has_edge(int u, int v) const {
  const auto& nb = adj[u];
  return std::binary_search(nb.begin(), nb.end(), v);
}

Graph make_graph(std::string id, std::vector<std::string> labels,
                 const std::vector<std::pair<int, int>>& edges) {
  Graph g;
  g.id = std::move(id);
  g.labels = std::move(labels);
  const int n = g.node_count();

  bool any_labeled = false, any_unlabeled = false;
  for (const auto& l : g.labels) (l.empty() ? any_unlabeled : any_labeled) = true;
  if (any_labeled && any_unlabeled)
    throw std::invalid_argument("graph '" + g.id + "': mixed labeled and unlabeled nodes");

  std::set<std::pair<int, int>> canon;
  for (auto [u, v] : edges) {
    if (u == v)
      throw std::invalid_argument("graph '" + g.id + "': self-loop at node " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw std::invalid_argument("graph '" + g.id + "': edge endpoint out of range (" +
                                  std::to_string(u) + "," + std::to_string(v) + ")");
    canon.insert(std::minmax(u, v));
  }
  g.edges.assign(canon.begin(), canon.end());
  g.adj.assign(n, {});
  for (auto [u, v] : g.edges) {
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& nb : g.adj) std::sort(nb.begin(), nb.end());
  return g;
}

bool same_graph(const Graph& a, const Graph& b) {
  return a.labels == b.labels && a.edges == b.edges;
}

bool is_connected(const Graph& g) {
  const int n = g.node_count();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : g.adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
  }
  return count == n;
}

namespace {

bool extend_isomorphism(const Graph& a, const Graph& b, std::vector<int>& map_ab,
                        std::vector<char>& used, int depth) {
  const int n = a.node_count();
  if (depth == n) return true;
  for (int v = 0; v < n; ++v) {
    if (used[v]) continue;
    if (a.labels[depth] != b.labels[v]) continue;
    if (a.degree(depth) != b.degree(v)) continue;
    bool ok = true;
    for (int u = 0; u < depth && ok; ++u)
      if (a.has_edge(u, depth) != b.has_edge(map_ab[u], v)) ok = false;
    if (!ok) continue;
    map_ab[depth] = v;
    used[v] = 1;
    if (extend_isomorphism(a, b, map_ab, used, depth + 1)) return true;
    used[v] = 0;
  }
  return false;
}

}  // namespace

bool isomorphic(const Graph& a, const Graph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  const int n = a.node_count();
  if (n > 10) throw std::invalid_argument("isomorphic: exhaustive check limited to 10 nodes");
  auto degs = [](const Graph& g) {
    std::vector<int> d;
    for (int u = 0; u < g.node_count(); ++u) d.push_back(g.degree(u));
    std::sort(d.begin(), d.end());
    return d;
  };
  if (degs(a) != degs(b)) return false;
  auto labs = [](const Graph& g) {
    auto l = g.labels;
    std::sort(l.begin(), l.end());
    return l;
  };
  if (labs(a) != labs(b)) return false;
  std::vector<int> map_ab(n, -1);
  std::vector<char> used(n, 0);
  return extend_isomorphism(a, b, map_ab, used, 0);
}

Graph permute_nodes(const Graph& g, const std::vector<int>& perm) {
  const int n = g.node_count();
  if (static_cast<int>(perm.size()) != n)
    throw std::invalid_argument("permute_nodes: permutation size mismatch");
  std::vector<char> seen(n, 0);
  for (int p : perm) {
    if (p < 0 || p >= n || seen[p])
      throw std::invalid_argument("permute_nodes: not a bijection on 0..N-1");
    seen[p] = 1;
  }
  std::vector<std::string> labels(n);
  for (int i = 0; i < n; ++i) labels[perm[i]] = g.labels[i];
  std::vector<std::pair<int, int>> edges;
  edges.reserve(g.edges.size());
  for (auto [u, v] : g.edges) edges.emplace_back(perm[u], perm[v]);
  return make_graph(g.id, std::move(labels), edges);
}

Graph generate_graph(int n, double edge_density,
                     const std::vector<std::string>& alphabet, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("generate_graph: n must be >= 1");
  if (edge_density < 0.0 || edge_density > 1.0)
    throw std::invalid_argument("generate_graph: density must lie in [0,1]");
  std::mt19937_64 rng(seed);

  std::vector<std::string> labels(n);
  if (!alphabet.empty()) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(alphabet.size()) - 1);
    for (auto& l : labels) l = alphabet[pick(rng)];
  }

  std::set<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    edges.insert({pick(rng), i});
  }
  std::vector<std::pair<int, int>> rest;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (!edges.count({u, v})) rest.emplace_back(u, v);
  std::shuffle(rest.begin(), rest.end(), rng);
  auto extra = static_cast<std::size_t>(std::llround(edge_density * rest.size()));
  for (std::size_t i = 0; i < extra; ++i) edges.insert(rest[i]);

  // Random relabeling so structure does not correlate with node index.
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Graph g = make_graph("", std::move(labels),
                       std::vector<std::pair<int, int>>(edges.begin(), edges.end()));
  return permute_nodes(g, perm);
}

namespace {

bool connected_without_node(const Graph& g, int skip) {
  const int n = g.node_count();
  if (n - 1 <= 1) return true;
  int start = skip == 0 ? 1 : 0;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{start};
  seen[start] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : g.adj[u]) {
      if (v == skip || seen[v]) continue;
      seen[v] = 1;
      ++count;
      stack.push_back(v);
    }
  }
  return count == n - 1;
}

bool connected_without_edge(const Graph& g, std::pair<int, int> e) {
  const int n = g.node_count();
  if (n <= 1) return true;
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : g.adj[u]) {
      if ((u == e.first && v == e.second) || (u == e.second && v == e.first)) continue;
      if (seen[v]) continue;
      seen[v] = 1;
      ++count;
      stack.push_back(v);
    }
  }
  return count == n;
}

struct Mutable {
  std::vector<std::string> labels;
  std::set<std::pair<int, int>> edges;

  Graph to_graph(const std::string& id) const {
    return make_graph(id, labels, {edges.begin(), edges.end()});
  }
};

}  // namespace

PerturbResult perturb_graph(const Graph& g, int k, std::uint64_t seed,
                            const PerturbOptions& opt) {
  if (k < 0) throw std::invalid_argument("perturb_graph: k must be >= 0");
  std::mt19937_64 rng(seed);

  Mutable cur{g.labels, {g.edges.begin(), g.edges.end()}};
  std::vector<std::string> alphabet = opt.alphabet;
  if (alphabet.empty()) {
    std::set<std::string> seen(g.labels.begin(), g.labels.end());
    seen.erase("");
    alphabet.assign(seen.begin(), seen.end());
  }
  const bool labeled = g.labeled();

  enum Op { kRelabel, kEdgeIns, kEdgeDel, kNodeIns, kNodeDel };
  int applied = 0;
  while (applied < k) {
    Graph snap = cur.to_graph(g.id);
    const int n = snap.node_count();
    const int remaining = k - applied;

    std::vector<std::pair<int, int>> insertable;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (!cur.edges.count({u, v})) insertable.emplace_back(u, v);

    std::vector<std::pair<int, int>> deletable;
    for (const auto& e : cur.edges)
      if (!opt.keep_connected || connected_without_edge(snap, e)) deletable.push_back(e);

    // A connected insert is node + edge; a delete is the node plus its
    // incident edges. Both must fit in the remaining edit budget.
    const int node_ins_ops = (opt.keep_connected && n > 0) ? 2 : 1;
    std::vector<int> removable;
    for (int u = 0; u < n; ++u) {
      if (n <= opt.min_nodes || n <= 1) break;
      if (snap.degree(u) + 1 > remaining) continue;
      if (opt.keep_connected && !connected_without_node(snap, u)) continue;
      removable.push_back(u);
    }

    std::vector<Op> menu;
    if (labeled && alphabet.size() >= 2) menu.push_back(kRelabel);
    if (!insertable.empty()) menu.push_back(kEdgeIns);
    if (!deletable.empty()) menu.push_back(kEdgeDel);
    if (n < opt.max_nodes && node_ins_ops <= remaining) menu.push_back(kNodeIns);
    if (!removable.empty()) menu.push_back(kNodeDel);

    if (menu.empty()) {
      // Pathological corner (e.g. single unlabeled node, 1 edit left):
      // fall back to an isolated node insert.
      if (n >= opt.max_nodes)
        throw std::runtime_error("perturb_graph: no applicable edit operation");
      cur.labels.push_back(labeled ? alphabet[0] : "");
      ++applied;
      continue;
    }

    std::uniform_int_distribution<std::size_t> pick_op(0, menu.size() - 1);
    switch (menu[pick_op(rng)]) {
      case kRelabel: {
        std::uniform_int_distribution<int> pick_node(0, n - 1);
        int u = pick_node(rng);
        std::vector<std::string> others;
        for (const auto& l : alphabet)
          if (l != cur.labels[u]) others.push_back(l);
        std::uniform_int_distribution<std::size_t> pick(0, others.size() - 1);
        cur.labels[u] = others[pick(rng)];
        applied += 1;
        break;
      }
      case kEdgeIns: {
        std::uniform_int_distribution<std::size_t> pick(0, insertable.size() - 1);
        cur.edges.insert(insertable[pick(rng)]);
        applied += 1;
        break;
      }
      case kEdgeDel: {
        std::uniform_int_distribution<std::size_t> pick(0, deletable.size() - 1);
        cur.edges.erase(deletable[pick(rng)]);
        applied += 1;
        break;
      }
      case kNodeIns: {
        std::string label;
        if (labeled) {
          std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
          label = alphabet[pick(rng)];
        }
        cur.labels.push_back(label);
        if (opt.keep_connected && n > 0) {
          std::uniform_int_distribution<int> pick_node(0, n - 1);
          cur.edges.insert({pick_node(rng), n});
          applied += 2;
        } else {
          applied += 1;
        }
        break;
      }
      case kNodeDel: {
        std::uniform_int_distribution<std::size_t> pick(0, removable.size() - 1);
        int u = removable[pick(rng)];
        applied += snap.degree(u) + 1;
        Mutable next;
        for (int i = 0; i < n; ++i)
          if (i != u) next.labels.push_back(cur.labels[i]);
        auto shift = [u](int x) { return x > u ? x - 1 : x; };
        for (auto [a, b] : cur.edges)
          if (a != u && b != u) next.edges.insert(std::minmax(shift(a), shift(b)));
        cur = std::move(next);
        break;
      }
    }
  }
  return PerturbResult{cur.to_graph(g.id), applied};
}

// --- file format ---

namespace {

Graph graph_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("graph JSON: expected an object");
  std::string id = j.value("id", "");
  if (!j.contains("nodes") || !j.at("nodes").is_array())
    throw std::invalid_argument("graph JSON: missing \"nodes\" array");

  std::vector<std::pair<long long, std::string>> raw;
  for (const auto& nj : j.at("nodes")) {
    long long idx = nj.at("i").get<long long>();
    raw.emplace_back(idx, nj.value("label", ""));
  }
  std::sort(raw.begin(), raw.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::map<long long, int> remap;
  std::vector<std::string> labels;
  for (const auto& [idx, label] : raw) {
    if (remap.count(idx))
      throw std::invalid_argument("graph JSON: duplicate node index " + std::to_string(idx));
    remap[idx] = static_cast<int>(labels.size());
    labels.push_back(label);
  }

  std::vector<std::pair<int, int>> edges;
  for (const auto& ej : j.value("edges", json::array())) {
    if (!ej.is_array() || ej.size() != 2)
      throw std::invalid_argument("graph JSON: edge must be a pair");
    long long a = ej[0].get<long long>(), b = ej[1].get<long long>();
    if (!remap.count(a) || !remap.count(b))
      throw std::invalid_argument("graph JSON: edge references unknown node");
    edges.emplace_back(remap[a], remap[b]);
  }
  return make_graph(std::move(id), std::move(labels), edges);
}

}  // namespace

Graph parse_graph(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("graph JSON parse error: ") + e.what());
  }
  return graph_from_json(j);
}

std::string graph_to_json(const Graph& g) {
  json nodes = json::array();
  for (int i = 0; i < g.node_count(); ++i) {
    json nj{{"i", i}};
    if (!g.labels[i].empty()) nj["label"] = g.labels[i];
    nodes.push_back(nj);
  }
  json edges = json::array();
  for (auto [u, v] : g.edges) edges.push_back(json::array({u, v}));
  return json{{"id", g.id}, {"nodes", nodes}, {"edges", edges}}.dump();
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_graph(ss.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  out << graph_to_json(g) << "\n";
}

std::vector<Graph> load_graph_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  std::vector<Graph> graphs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      graphs.push_back(parse_graph(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return graphs;
}

void save_graph_file(const std::vector<Graph>& graphs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write graph file: " + path);
  for (const auto& g : graphs) out << graph_to_json(g) << "\n";
}

// --- label encoding ---

LabelEncoder LabelEncoder::fit(const std::vector<Graph>& graphs) {
  std::set<std::string> seen;
  for (const auto& g : graphs)
    for (const auto& l : g.labels)
      if (!l.empty()) seen.insert(l);
  if (seen.empty()) return constant();
  return from_labels({seen.begin(), seen.end()});
}

LabelEncoder LabelEncoder::constant() {
  LabelEncoder e;
  e.constant_ = true;
  return e;
}

LabelEncoder LabelEncoder::from_labels(std::vector<std::string> labels) {
  LabelEncoder e;
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  e.labels_ = std::move(labels);
  return e;
}

int LabelEncoder::dimension() const {
  return constant_ ? 1 : static_cast<int>(labels_.size());
}

int LabelEncoder::index_of(const std::string& label) const {
  auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
  if (it == labels_.end() || *it != label)
    throw std::invalid_argument("unknown label: \"" + label + "\"");
  return static_cast<int>(it - labels_.begin());
}

std::vector<double> LabelEncoder::encode(const Graph& g) const {
  const int n = g.node_count();
  const int d = dimension();
  std::vector<double> out(static_cast<std::size_t>(n) * d, 0.0);
  if (constant_) {
    if (g.labeled())
      throw std::invalid_argument("constant encoder applied to a labeled graph");
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  for (int i = 0; i < n; ++i) {
    if (g.labels[i].empty())
      throw std::invalid_argument("one-hot encoder applied to an unlabeled graph");
    out[static_cast<std::size_t>(i) * d + index_of(g.labels[i])] = 1.0;
  }
  return out;
}

}  // namespace gedkit
