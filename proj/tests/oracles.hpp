#pragma once

// Brute-force reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "sgmc/data.hpp"
#include "sgmc/graph.hpp"
#include "sgmc/stratified.hpp"

namespace oracle {

using sgmc::Node;
using sgmc::NodeSet;
using sgmc::UndirectedGraph;

inline std::vector<std::vector<char>> adjacency(const UndirectedGraph& g) {
  const int n = g.node_count();
  std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
  for (const auto& [a, b] : g.edges()) adj[a][b] = adj[b][a] = 1;
  return adj;
}

// Some subset of >= 4 nodes induces a cycle.
inline bool has_chordless_cycle(const UndirectedGraph& g) {
  const int n = g.node_count();
  const auto adj = adjacency(g);
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) < 4) continue;
    std::vector<int> nodes;
    for (int v = 0; v < n; ++v) {
      if (mask >> v & 1) nodes.push_back(v);
    }
    bool all_two = true;
    for (int v : nodes) {
      int d = 0;
      for (int u : nodes) d += adj[v][u];
      if (d != 2) {
        all_two = false;
        break;
      }
    }
    if (!all_two) continue;
    std::vector<int> stack{nodes[0]};
    std::set<int> seen{nodes[0]};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int u : nodes) {
        if (adj[v][u] && seen.insert(u).second) stack.push_back(u);
      }
    }
    if (seen.size() == nodes.size()) return true;
  }
  return false;
}

// Some simple path from a to b avoids s, found by enumerating paths.
inline bool path_avoiding(const UndirectedGraph& g, const NodeSet& a, const NodeSet& b, const NodeSet& s) {
  const int n = g.node_count();
  const auto adj = adjacency(g);
  std::vector<char> blocked(n, 0), target(n, 0), on_path(n, 0);
  for (Node v : s) blocked[v] = 1;
  for (Node v : b) target[v] = 1;
  std::function<bool(int)> extend = [&](int v) {
    if (target[v]) return true;
    on_path[v] = 1;
    for (int u = 0; u < n; ++u) {
      if (adj[v][u] && !on_path[u] && !blocked[u] && extend(u)) return true;
    }
    on_path[v] = 0;
    return false;
  };
  for (Node v : a) {
    std::fill(on_path.begin(), on_path.end(), 0);
    if (extend(v)) return true;
  }
  return false;
}

inline std::vector<NodeSet> maximal_cliques(const UndirectedGraph& g) {
  const int n = g.node_count();
  const auto adj = adjacency(g);
  std::vector<std::uint32_t> complete;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    bool ok = true;
    for (int a = 0; a < n && ok; ++a) {
      for (int b = a + 1; b < n && ok; ++b) {
        if ((mask >> a & 1) && (mask >> b & 1) && !adj[a][b]) ok = false;
      }
    }
    if (ok) complete.push_back(mask);
  }
  std::vector<NodeSet> out;
  for (auto m : complete) {
    bool maximal = std::none_of(complete.begin(), complete.end(), [m](auto o) { return o != m && (o & m) == m; });
    if (!maximal) continue;
    NodeSet s;
    for (int v = 0; v < n; ++v) {
      if (m >> v & 1) s.push_back(v);
    }
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline NodeSet intersect(const NodeSet& a, const NodeSet& b) {
  NodeSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Separator multiset of a maximum-weight spanning forest (Kruskal), one empty
// separator per extra connected component.
inline std::vector<NodeSet> separators(const std::vector<NodeSet>& cliques) {
  const int m = static_cast<int>(cliques.size());
  std::vector<std::tuple<int, int, int>> pairs;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) pairs.emplace_back(static_cast<int>(intersect(cliques[i], cliques[j]).size()), i, j);
  }
  std::sort(pairs.begin(), pairs.end(), [](auto& x, auto& y) { return std::get<0>(x) > std::get<0>(y); });
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  std::vector<NodeSet> out;
  for (auto [w, i, j] : pairs) {
    if (find(i) == find(j)) continue;
    parent[find(i)] = find(j);
    out.push_back(intersect(cliques[i], cliques[j]));
  }
  return out;
}

// Dirichlet-multinomial log marginal of one variable given parents, with
// the parent outcomes merged by `group` (parent outcome index -> group) and
// alpha = N * |group| / (parent outcomes * k).
inline double chain_term(const sgmc::DataMatrix& data, Node child, const std::vector<Node>& parents,
                         const std::vector<int>& group, double N) {
  const int k = data.space.cardinality(child);
  std::int64_t q = 1;
  for (Node p : parents) q *= data.space.cardinality(p);
  std::map<int, std::int64_t> group_size;
  for (std::int64_t p = 0; p < q; ++p) ++group_size[group[p]];
  std::map<std::pair<int, int>, double> n_cell;
  std::map<int, double> n_group;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    std::int64_t p = 0;
    for (Node v : parents) p = p * data.space.cardinality(v) + data.values(r, v);
    const int g = group[p];
    n_cell[{g, data.values(r, child)}] += 1;
    n_group[g] += 1;
  }
  double out = 0.0;
  for (const auto& [g, size] : group_size) {
    const double a = N * static_cast<double>(size) / (static_cast<double>(q) * k);
    const double ng = n_group.count(g) ? n_group[g] : 0.0;
    out += std::lgamma(k * a) - std::lgamma(k * a + ng);
    for (int x = 0; x < k; ++x) {
      const auto it = n_cell.find({g, x});
      if (it != n_cell.end()) out += std::lgamma(a + it->second) - std::lgamma(a);
    }
  }
  return out;
}

inline std::vector<int> identity_groups(std::int64_t q) {
  std::vector<int> g(static_cast<std::size_t>(q));
  std::iota(g.begin(), g.end(), 0);
  return g;
}

// Clique outcomes of the parents of `last` merged by brute force: two parent
// outcomes join when they differ only at one neighbor u whose edge {u, last}
// carries a stratum containing their shared assignment of the common neighbors.
inline std::vector<int> merged_groups(const sgmc::StratifiedGraph& sg, const std::vector<Node>& parents, Node last,
                                      const sgmc::OutcomeSpace& space) {
  std::int64_t q = 1;
  for (Node p : parents) q *= space.cardinality(p);
  std::vector<std::vector<int>> outcomes;
  for (std::int64_t p = 0; p < q; ++p) {
    std::vector<int> vals(parents.size());
    std::int64_t rest = p;
    for (std::size_t i = parents.size(); i-- > 0;) {
      vals[i] = static_cast<int>(rest % space.cardinality(parents[i]));
      rest /= space.cardinality(parents[i]);
    }
    outcomes.push_back(vals);
  }
  std::vector<int> parent(static_cast<std::size_t>(q));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (std::int64_t p1 = 0; p1 < q; ++p1) {
    for (std::int64_t p2 = p1 + 1; p2 < q; ++p2) {
      int diff = -1, count = 0;
      for (std::size_t i = 0; i < parents.size(); ++i) {
        if (outcomes[p1][i] != outcomes[p2][i]) {
          diff = static_cast<int>(i);
          ++count;
        }
      }
      if (count != 1) continue;
      const Node u = parents[diff];
      const auto it = sg.strata.find(sgmc::make_edge(u, last));
      if (it == sg.strata.end()) continue;
      const NodeSet common = sgmc::common_neighbors(sg.graph, it->first);
      std::vector<int> ctx;
      for (Node c : common) {
        const auto pos = std::find(parents.begin(), parents.end(), c) - parents.begin();
        ctx.push_back(outcomes[p1][pos]);
      }
      if (it->second.count(ctx)) parent[find(static_cast<int>(p1))] = find(static_cast<int>(p2));
    }
  }
  std::vector<int> out(static_cast<std::size_t>(q));
  for (std::int64_t p = 0; p < q; ++p) out[p] = find(static_cast<int>(p));
  return out;
}

inline double gm_chain(const sgmc::DataMatrix& data, const NodeSet& nodes, double N) {
  double out = 0.0;
  std::vector<Node> before;
  for (Node v : nodes) {
    std::int64_t q = 1;
    for (Node p : before) q *= data.space.cardinality(p);
    out += chain_term(data, v, before, identity_groups(q), N);
    before.push_back(v);
  }
  return out;
}

// log marginal likelihood of a decomposable stratified graph, assembled from
// brute-force cliques, a Kruskal junction tree and per-clique chains with the
// stratified node last.
inline double sgm_log_marginal(const sgmc::DataMatrix& data, const sgmc::StratifiedGraph& sg, double N) {
  double out = 0.0;
  const auto cliques = oracle::maximal_cliques(sg.graph);
  for (const auto& c : cliques) {
    std::set<Node> common;
    bool any = false;
    for (const auto& [e, ctx] : sg.strata) {
      if (ctx.empty() || !std::binary_search(c.begin(), c.end(), e.first) ||
          !std::binary_search(c.begin(), c.end(), e.second))
        continue;
      std::set<Node> ends{e.first, e.second};
      if (!any) {
        common = ends;
      } else {
        std::set<Node> keep;
        for (Node v : common) {
          if (ends.count(v)) keep.insert(v);
        }
        common = keep;
      }
      any = true;
    }
    if (!any) {
      out += gm_chain(data, c, N);
      continue;
    }
    const Node last = *common.rbegin();
    NodeSet rest;
    for (Node v : c) {
      if (v != last) rest.push_back(v);
    }
    out += gm_chain(data, rest, N);
    out += chain_term(data, last, rest, merged_groups(sg, rest, last, data.space), N);
  }
  for (const auto& s : oracle::separators(cliques)) out -= gm_chain(data, s, N);
  return out;
}

inline UndirectedGraph random_graph(int n, double p, std::mt19937_64& rng) {
  UndirectedGraph g(n);
  std::bernoulli_distribution coin(p);
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      if (coin(rng)) g.add_edge(a, b);
    }
  }
  return g;
}

inline sgmc::DataMatrix random_data(int rows, const sgmc::OutcomeSpace& space, std::mt19937_64& rng) {
  sgmc::CategoryMatrix v(rows, space.size());
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < space.size(); ++c) v(r, c) = std::uniform_int_distribution<int>(0, space.cardinality(c) - 1)(rng);
  }
  return sgmc::DataMatrix(std::move(v), space);
}

}  // namespace oracle
