#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sgmc {

using Node = int;
// Sorted, duplicate-free list of node indices.
using NodeSet = std::vector<Node>;
// Unordered pair stored with first < second.
using Edge = std::pair<Node, Node>;

Edge make_edge(Node a, Node b);

/// Simple undirected graph over nodes 0..n-1 backed by a dense adjacency
/// matrix. Graphs in this library are small (cliques are capped and feature
/// groups bound the node count), so dense storage keeps queries trivial.
class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(int node_count);
  UndirectedGraph(int node_count, std::initializer_list<Edge> edges);
  UndirectedGraph(int node_count, std::span<const Edge> edges);

  int node_count() const { return n_; }
  bool has_edge(Node a, Node b) const;
  void add_edge(Node a, Node b);
  void remove_edge(Node a, Node b);

  int edge_count() const;
  std::vector<Edge> edges() const;
  NodeSet neighbors(Node v) const;
  int degree(Node v) const;
  bool is_complete(const NodeSet& nodes) const;

  bool operator==(const UndirectedGraph& other) const = default;

 private:
  void check_node(Node v) const;

  int n_ = 0;
  std::vector<std::uint8_t> adj_;
};

bool separates(const UndirectedGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& s);

// Visit order of maximum-cardinality search. Ties go to the smallest index.
std::vector<Node> maximum_cardinality_search(const UndirectedGraph& g);

bool is_decomposable(const UndirectedGraph& g);

// Maximal cliques of a chordal graph, each sorted, listed in lexicographic
// order. Throws UnsupportedModelError for non-chordal input.
std::vector<NodeSet> maximal_cliques(const UndirectedGraph& g);
// Maximal cliques, or nullopt for a non-chordal graph.
std::optional<std::vector<NodeSet>> chordal_cliques(const UndirectedGraph& g);

/// Cliques in an order satisfying running intersection. `separators[i]` and
/// `parents[i]` belong to `cliques[i + 1]`; the separator is the intersection
/// of that clique with its parent, which equals its intersection with the
/// union of all earlier cliques.
struct JunctionTree {
  std::vector<NodeSet> cliques;
  std::vector<NodeSet> separators;
  std::vector<int> parents;

  bool operator==(const JunctionTree& other) const = default;
};

// Built by maximum-weight spanning tree over clique intersections, grown from
// the lexicographically smallest clique.
JunctionTree junction_tree(const UndirectedGraph& g);
// From the output of maximal_cliques / chordal_cliques.
JunctionTree junction_tree(const std::vector<NodeSet>& cliques);

// Same cliques, grown from cliques[root] instead.
JunctionTree reroot(const JunctionTree& tree, int root);

std::size_t max_clique_size(const std::vector<NodeSet>& cliques);

// Set helpers for sorted NodeSets.
NodeSet set_intersection(const NodeSet& a, const NodeSet& b);
NodeSet set_union(const NodeSet& a, const NodeSet& b);
NodeSet set_difference(const NodeSet& a, const NodeSet& b);
bool contains(const NodeSet& set, Node v);
bool is_subset(const NodeSet& sub, const NodeSet& super);

}  // namespace sgmc
