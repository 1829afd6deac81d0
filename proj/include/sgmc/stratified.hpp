#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "sgmc/graph.hpp"

namespace sgmc {

/// Number of categories per variable, indexed by node.
struct OutcomeSpace {
  std::vector<int> cardinalities;

  static OutcomeSpace binary(int node_count);

  int size() const { return static_cast<int>(cardinalities.size()); }
  int cardinality(Node v) const { return cardinalities.at(v); }
  // Number of joint outcomes of the given nodes (1 for the empty set).
  std::int64_t outcome_count(const NodeSet& nodes) const;

  bool operator==(const OutcomeSpace& other) const = default;
};

// One assignment to the common neighbors of a stratified edge, listed in
// ascending node order.
using Context = std::vector<int>;
using ContextSet = std::set<Context>;
// Stratum per edge; an edge with no entry is unstratified.
using Strata = std::map<Edge, ContextSet>;

/// Undirected graph plus strata. Each stratum lists contexts over the current
/// common neighbors of its edge.
struct StratifiedGraph {
  UndirectedGraph graph;
  Strata strata;

  StratifiedGraph() = default;
  explicit StratifiedGraph(UndirectedGraph g) : graph(std::move(g)) {}
  StratifiedGraph(UndirectedGraph g, Strata s) : graph(std::move(g)), strata(std::move(s)) {}

  int node_count() const { return graph.node_count(); }
  bool is_stratified(Edge e) const;

  bool operator==(const StratifiedGraph& other) const = default;
};

NodeSet common_neighbors(const UndirectedGraph& g, Edge edge);

// Throws std::invalid_argument when a stratum is attached to a missing edge,
// has an empty neighbor set, holds malformed or out-of-range contexts, or
// covers every context of its edge. Empty context sets are rejected too.
void validate_strata(const StratifiedGraph& sg, const OutcomeSpace& space);

bool is_decomposable_sg(const StratifiedGraph& sg);
// Same check against a junction tree already computed for sg.graph.
bool is_decomposable_sg(const StratifiedGraph& sg, const JunctionTree& tree);

// Clique variables with the node shared by all of the clique's stratified
// edges last (largest such index); the rest ascending.
std::vector<Node> clique_ordering(const StratifiedGraph& sg, const NodeSet& clique);

/// Partition of one ordered variable's parent outcomes into groups that share
/// a conditional distribution. Parent outcomes are indexed mixed-radix over
/// the preceding variables of the ordering, first variable most significant.
struct VariableGrouping {
  Node node = 0;
  int cardinality = 2;
  std::int64_t parent_outcomes = 1;
  std::vector<int> group_of;
  std::vector<std::int64_t> group_size;

  int groups() const { return static_cast<int>(group_size.size()); }

  bool operator==(const VariableGrouping& other) const = default;
};

struct ParentGrouping {
  NodeSet clique;
  std::vector<Node> ordering;
  std::vector<VariableGrouping> variables;

  bool operator==(const ParentGrouping& other) const = default;
};

// Groups are numbered by their smallest member outcome.
ParentGrouping parent_grouping(const StratifiedGraph& sg, const NodeSet& clique,
                               const OutcomeSpace& space);
// Same merge rule with an explicit ordering; the last node must be common to
// every stratified edge inside `clique`.
ParentGrouping parent_grouping(const StratifiedGraph& sg, const NodeSet& clique,
                               const std::vector<Node>& ordering, const OutcomeSpace& space);
// All-singleton grouping over `nodes` in the order given.
ParentGrouping singleton_grouping(const std::vector<Node>& nodes, const OutcomeSpace& space);

// All assignments of `nodes` in mixed-radix order, first node most significant.
std::vector<Context> enumerate_contexts(const NodeSet& nodes, const OutcomeSpace& space);

}  // namespace sgmc
