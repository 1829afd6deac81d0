#include "sgmc/graph.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "sgmc/errors.hpp"

namespace sgmc {

Edge make_edge(Node a, Node b) { return a < b ? Edge{a, b} : Edge{b, a}; }

UndirectedGraph::UndirectedGraph(int node_count) : n_(node_count) {
  if (node_count < 0) throw std::invalid_argument("negative node count");
  adj_.assign(static_cast<std::size_t>(n_) * n_, 0);
}

UndirectedGraph::UndirectedGraph(int node_count, std::initializer_list<Edge> edges)
    : UndirectedGraph(node_count, std::span<const Edge>(edges.begin(), edges.size())) {}

UndirectedGraph::UndirectedGraph(int node_count, std::span<const Edge> edges)
    : UndirectedGraph(node_count) {
  for (const auto& [a, b] : edges) add_edge(a, b);
}

void UndirectedGraph::check_node(Node v) const {
  if (v < 0 || v >= n_) {
    throw std::invalid_argument("node " + std::to_string(v) + " out of range");
  }
}

bool UndirectedGraph::has_edge(Node a, Node b) const {
  check_node(a);
  check_node(b);
  return adj_[static_cast<std::size_t>(a) * n_ + b] != 0;
}

void UndirectedGraph::add_edge(Node a, Node b) {
  check_node(a);
  check_node(b);
  if (a == b) throw std::invalid_argument("self-loop on node " + std::to_string(a));
  adj_[static_cast<std::size_t>(a) * n_ + b] = 1;
  adj_[static_cast<std::size_t>(b) * n_ + a] = 1;
}

void UndirectedGraph::remove_edge(Node a, Node b) {
  check_node(a);
  check_node(b);
  adj_[static_cast<std::size_t>(a) * n_ + b] = 0;
  adj_[static_cast<std::size_t>(b) * n_ + a] = 0;
}

int UndirectedGraph::edge_count() const {
  return static_cast<int>(std::count(adj_.begin(), adj_.end(), std::uint8_t{1}) / 2);
}

std::vector<Edge> UndirectedGraph::edges() const {
  std::vector<Edge> out;
  for (Node a = 0; a < n_; ++a) {
    for (Node b = a + 1; b < n_; ++b) {
      if (adj_[static_cast<std::size_t>(a) * n_ + b]) out.emplace_back(a, b);
    }
  }
  return out;
}

NodeSet UndirectedGraph::neighbors(Node v) const {
  check_node(v);
  NodeSet out;
  const auto* row = adj_.data() + static_cast<std::size_t>(v) * n_;
  for (Node u = 0; u < n_; ++u) {
    if (row[u]) out.push_back(u);
  }
  return out;
}

int UndirectedGraph::degree(Node v) const {
  check_node(v);
  const auto* row = adj_.data() + static_cast<std::size_t>(v) * n_;
  return static_cast<int>(std::count(row, row + n_, std::uint8_t{1}));
}

bool UndirectedGraph::is_complete(const NodeSet& nodes) const {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (!has_edge(nodes[i], nodes[j])) return false;
    }
  }
  return true;
}

bool separates(const UndirectedGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& s) {
  if (a.empty() || b.empty()) throw std::invalid_argument("separates: a and b must be non-empty");
  const int n = g.node_count();
  // 0 = free, 1 = in a, 2 = in b, 3 = in s
  std::vector<int> role(n, 0);
  auto mark = [&](const NodeSet& set, int tag) {
    for (Node v : set) {
      if (v < 0 || v >= n) throw std::invalid_argument("separates: node out of range");
      if (role[v] != 0) throw std::invalid_argument("separates: node sets must be disjoint");
      role[v] = tag;
    }
  };
  mark(a, 1);
  mark(b, 2);
  mark(s, 3);

  std::vector<char> seen(n, 0);
  std::vector<Node> stack(a.begin(), a.end());
  for (Node v : a) seen[v] = 1;
  while (!stack.empty()) {
    Node v = stack.back();
    stack.pop_back();
    for (Node u : g.neighbors(v)) {
      if (seen[u] || role[u] == 3) continue;
      if (role[u] == 2) return false;
      seen[u] = 1;
      stack.push_back(u);
    }
  }
  return true;
}

std::vector<Node> maximum_cardinality_search(const UndirectedGraph& g) {
  const int n = g.node_count();
  std::vector<int> weight(n, 0);
  std::vector<char> visited(n, 0);
  std::vector<Node> order;
  order.reserve(n);
  for (int step = 0; step < n; ++step) {
    Node best = -1;
    for (Node v = 0; v < n; ++v) {
      if (!visited[v] && (best < 0 || weight[v] > weight[best])) best = v;
    }
    visited[best] = 1;
    order.push_back(best);
    for (Node u : g.neighbors(best)) {
      if (!visited[u]) ++weight[u];
    }
  }
  return order;
}

namespace {

// For each node in MCS visit order, its neighbors visited earlier.
std::vector<NodeSet> earlier_neighbors(const UndirectedGraph& g, const std::vector<Node>& order) {
  const int n = g.node_count();
  std::vector<int> position(n);
  for (int i = 0; i < n; ++i) position[order[i]] = i;
  std::vector<NodeSet> out(n);
  for (int i = 0; i < n; ++i) {
    Node v = order[i];
    for (Node u : g.neighbors(v)) {
      if (position[u] < i) out[i].push_back(u);
    }
  }
  return out;
}

}  // namespace

bool is_decomposable(const UndirectedGraph& g) {
  // The reverse of an MCS order is a perfect elimination order iff g is
  // chordal, i.e. every node's earlier neighbors form a complete set.
  const auto order = maximum_cardinality_search(g);
  const auto earlier = earlier_neighbors(g, order);
  for (const auto& set : earlier) {
    if (!g.is_complete(set)) return false;
  }
  return true;
}

std::vector<NodeSet> maximal_cliques(const UndirectedGraph& g) {
  auto cliques = chordal_cliques(g);
  if (!cliques) throw UnsupportedModelError("maximal_cliques: graph is not chordal");
  return std::move(*cliques);
}

std::optional<std::vector<NodeSet>> chordal_cliques(const UndirectedGraph& g) {
  const auto order = maximum_cardinality_search(g);
  const auto earlier = earlier_neighbors(g, order);
  std::vector<NodeSet> candidates;
  candidates.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (!g.is_complete(earlier[i])) return std::nullopt;
    NodeSet c = earlier[i];
    c.push_back(order[i]);
    std::sort(c.begin(), c.end());
    candidates.push_back(std::move(c));
  }
  // Every maximal clique of a chordal graph appears among the candidates;
  // drop the ones strictly contained in another.
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::vector<NodeSet> cliques;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    bool is_maximal = true;
    for (std::size_t j = 0; j < candidates.size() && is_maximal; ++j) {
      if (i != j && candidates[j].size() > candidates[i].size() &&
          is_subset(candidates[i], candidates[j])) {
        is_maximal = false;
      }
    }
    if (is_maximal) cliques.push_back(candidates[i]);
  }
  return cliques;
}

namespace {

JunctionTree grow_tree(const std::vector<NodeSet>& cliques, int root) {
  JunctionTree tree;
  const int m = static_cast<int>(cliques.size());
  if (m == 0) return tree;
  std::vector<char> in_tree(m, 0);
  std::vector<int> placed;
  in_tree[root] = 1;
  placed.push_back(root);
  tree.cliques.push_back(cliques[root]);
  for (int step = 1; step < m; ++step) {
    int best_new = -1;
    int best_parent = -1;
    std::size_t best_weight = 0;
    for (int c = 0; c < m; ++c) {
      if (in_tree[c]) continue;
      for (int slot = 0; slot < static_cast<int>(placed.size()); ++slot) {
        std::size_t w = set_intersection(cliques[c], cliques[placed[slot]]).size();
        if (best_new < 0 || w > best_weight) {
          best_new = c;
          best_parent = slot;
          best_weight = w;
        }
      }
    }
    in_tree[best_new] = 1;
    placed.push_back(best_new);
    tree.cliques.push_back(cliques[best_new]);
    tree.parents.push_back(best_parent);
    tree.separators.push_back(set_intersection(cliques[best_new], tree.cliques[best_parent]));
  }
  return tree;
}

}  // namespace

JunctionTree junction_tree(const UndirectedGraph& g) { return grow_tree(maximal_cliques(g), 0); }

JunctionTree junction_tree(const std::vector<NodeSet>& cliques) { return grow_tree(cliques, 0); }

JunctionTree reroot(const JunctionTree& tree, int root) {
  auto cliques = tree.cliques;
  std::sort(cliques.begin(), cliques.end());
  auto it = std::find(cliques.begin(), cliques.end(), tree.cliques.at(root));
  return grow_tree(cliques, static_cast<int>(it - cliques.begin()));
}

std::size_t max_clique_size(const std::vector<NodeSet>& cliques) {
  std::size_t out = 0;
  for (const auto& c : cliques) out = std::max(out, c.size());
  return out;
}

NodeSet set_intersection(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

NodeSet set_difference(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool contains(const NodeSet& set, Node v) { return std::binary_search(set.begin(), set.end(), v); }

bool is_subset(const NodeSet& sub, const NodeSet& super) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

}  // namespace sgmc
