#include "sgmc/stratified.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace sgmc {

OutcomeSpace OutcomeSpace::binary(int node_count) {
  return OutcomeSpace{std::vector<int>(static_cast<std::size_t>(node_count), 2)};
}

std::int64_t OutcomeSpace::outcome_count(const NodeSet& nodes) const {
  std::int64_t out = 1;
  for (Node v : nodes) out *= cardinality(v);
  return out;
}

bool StratifiedGraph::is_stratified(Edge e) const {
  auto it = strata.find(e);
  return it != strata.end() && !it->second.empty();
}

NodeSet common_neighbors(const UndirectedGraph& g, Edge edge) {
  if (!g.has_edge(edge.first, edge.second)) {
    throw std::invalid_argument("common_neighbors: edge {" + std::to_string(edge.first) + "," +
                                std::to_string(edge.second) + "} is not in the graph");
  }
  return set_intersection(g.neighbors(edge.first), g.neighbors(edge.second));
}

void validate_strata(const StratifiedGraph& sg, const OutcomeSpace& space) {
  if (space.size() != sg.node_count()) {
    throw std::invalid_argument("outcome space size does not match graph");
  }
  for (const auto& [edge, contexts] : sg.strata) {
    const std::string name =
        "{" + std::to_string(edge.first) + "," + std::to_string(edge.second) + "}";
    if (edge.first >= edge.second) throw std::invalid_argument("stratum edge " + name + " not normalized");
    if (!sg.graph.has_edge(edge.first, edge.second)) {
      throw std::invalid_argument("stratum on missing edge " + name);
    }
    const NodeSet l = common_neighbors(sg.graph, edge);
    if (l.empty()) throw std::invalid_argument("stratum on edge " + name + " with no common neighbors");
    if (contexts.empty()) throw std::invalid_argument("empty stratum on edge " + name);
    for (const auto& ctx : contexts) {
      if (ctx.size() != l.size()) throw std::invalid_argument("context arity mismatch on edge " + name);
      for (std::size_t i = 0; i < l.size(); ++i) {
        if (ctx[i] < 0 || ctx[i] >= space.cardinality(l[i])) {
          throw std::invalid_argument("context value out of range on edge " + name);
        }
      }
    }
    if (static_cast<std::int64_t>(contexts.size()) >= space.outcome_count(l)) {
      throw std::invalid_argument("stratum on edge " + name + " covers every context");
    }
  }
}

bool is_decomposable_sg(const StratifiedGraph& sg) {
  if (!is_decomposable(sg.graph)) return false;
  return is_decomposable_sg(sg, junction_tree(sg.graph));
}

bool is_decomposable_sg(const StratifiedGraph& sg, const JunctionTree& tree) {
  std::vector<Edge> stratified;
  for (const auto& [edge, contexts] : sg.strata) {
    if (contexts.empty()) continue;
    if (edge.first < 0 || edge.second >= sg.node_count() || edge.first >= edge.second) return false;
    if (!sg.graph.has_edge(edge.first, edge.second)) return false;
    if (common_neighbors(sg.graph, edge).empty()) return false;
    stratified.push_back(edge);
  }
  for (const auto& sep : tree.separators) {
    for (const auto& [a, b] : stratified) {
      if (contains(sep, a) && contains(sep, b)) return false;
    }
  }
  for (const auto& clique : tree.cliques) {
    NodeSet common;
    bool first = true;
    for (const auto& [a, b] : stratified) {
      if (!contains(clique, a) || !contains(clique, b)) continue;
      NodeSet ends{a, b};
      common = first ? ends : set_intersection(common, ends);
      first = false;
    }
    if (!first && common.empty()) return false;
  }
  return true;
}

namespace {

std::vector<Edge> stratified_edges_in(const StratifiedGraph& sg, const NodeSet& clique) {
  std::vector<Edge> out;
  for (const auto& [edge, contexts] : sg.strata) {
    if (!contexts.empty() && contains(clique, edge.first) && contains(clique, edge.second)) {
      out.push_back(edge);
    }
  }
  return out;
}

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> parent;
};

VariableGrouping singleton_variable(Node node, int cardinality, std::int64_t parent_outcomes) {
  VariableGrouping var;
  var.node = node;
  var.cardinality = cardinality;
  var.parent_outcomes = parent_outcomes;
  var.group_of.resize(static_cast<std::size_t>(parent_outcomes));
  std::iota(var.group_of.begin(), var.group_of.end(), 0);
  var.group_size.assign(static_cast<std::size_t>(parent_outcomes), 1);
  return var;
}

}  // namespace

std::vector<Node> clique_ordering(const StratifiedGraph& sg, const NodeSet& clique) {
  std::vector<Node> ordering(clique.begin(), clique.end());
  std::sort(ordering.begin(), ordering.end());
  const auto edges = stratified_edges_in(sg, clique);
  if (edges.empty()) return ordering;
  NodeSet common{edges.front().first, edges.front().second};
  for (const auto& [a, b] : edges) common = set_intersection(common, NodeSet{a, b});
  if (common.empty()) {
    throw std::invalid_argument("clique_ordering: stratified edges share no common node");
  }
  const Node last = common.back();
  ordering.erase(std::find(ordering.begin(), ordering.end(), last));
  ordering.push_back(last);
  return ordering;
}

ParentGrouping parent_grouping(const StratifiedGraph& sg, const NodeSet& clique,
                               const OutcomeSpace& space) {
  return parent_grouping(sg, clique, clique_ordering(sg, clique), space);
}

ParentGrouping parent_grouping(const StratifiedGraph& sg, const NodeSet& clique,
                               const std::vector<Node>& ordering, const OutcomeSpace& space) {
  ParentGrouping out = singleton_grouping(ordering, space);
  out.clique = clique;
  const auto edges = stratified_edges_in(sg, clique);
  if (edges.empty()) return out;

  const Node last = ordering.back();
  const std::vector<Node> parents(ordering.begin(), ordering.end() - 1);
  const std::size_t d = parents.size();
  auto position = [&](Node v) {
    return static_cast<std::size_t>(std::find(parents.begin(), parents.end(), v) - parents.begin());
  };
  // Place value of each parent in the mixed-radix outcome index.
  std::vector<std::int64_t> stride(d, 1);
  for (std::size_t i = d; i-- > 1;) stride[i - 1] = stride[i] * space.cardinality(parents[i]);

  VariableGrouping& target = out.variables.back();
  const auto total = static_cast<std::size_t>(target.parent_outcomes);
  DisjointSets sets(total);
  std::vector<int> values(d);
  for (const auto& edge : edges) {
    if (edge.first != last && edge.second != last) {
      throw std::invalid_argument("parent_grouping: last variable is not on every stratified edge");
    }
    const Node other = edge.first == last ? edge.second : edge.first;
    const std::size_t other_pos = position(other);
    const NodeSet l = common_neighbors(sg.graph, edge);
    std::vector<std::size_t> l_pos;
    for (Node v : l) l_pos.push_back(position(v));
    const ContextSet& contexts = sg.strata.at(edge);
    Context ctx(l.size());
    for (std::size_t p = 0; p < total; ++p) {
      auto rest = static_cast<std::int64_t>(p);
      for (std::size_t i = 0; i < d; ++i) {
        values[i] = static_cast<int>(rest / stride[i]);
        rest %= stride[i];
      }
      for (std::size_t i = 0; i < l.size(); ++i) ctx[i] = values[l_pos[i]];
      if (!contexts.contains(ctx)) continue;
      const std::int64_t base = static_cast<std::int64_t>(p) - values[other_pos] * stride[other_pos];
      sets.unite(p, static_cast<std::size_t>(base));
    }
  }

  std::vector<int> id_of_root(total, -1);
  target.group_size.clear();
  for (std::size_t p = 0; p < total; ++p) {
    const std::size_t root = sets.find(p);
    if (id_of_root[root] < 0) {
      id_of_root[root] = target.groups();
      target.group_size.push_back(0);
    }
    target.group_of[p] = id_of_root[root];
    ++target.group_size[id_of_root[root]];
  }
  return out;
}

ParentGrouping singleton_grouping(const std::vector<Node>& nodes, const OutcomeSpace& space) {
  ParentGrouping out;
  out.clique = NodeSet(nodes.begin(), nodes.end());
  std::sort(out.clique.begin(), out.clique.end());
  out.ordering = nodes;
  std::int64_t parent_outcomes = 1;
  for (Node v : nodes) {
    out.variables.push_back(singleton_variable(v, space.cardinality(v), parent_outcomes));
    parent_outcomes *= space.cardinality(v);
  }
  return out;
}

std::vector<Context> enumerate_contexts(const NodeSet& nodes, const OutcomeSpace& space) {
  std::vector<Context> out;
  Context current(nodes.size(), 0);
  const std::int64_t total = space.outcome_count(nodes);
  out.reserve(static_cast<std::size_t>(total));
  for (std::int64_t k = 0; k < total; ++k) {
    out.push_back(current);
    for (std::size_t i = nodes.size(); i-- > 0;) {
      if (++current[i] < space.cardinality(nodes[i])) break;
      current[i] = 0;
    }
  }
  return out;
}

}  // namespace sgmc
