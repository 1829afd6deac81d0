#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sgmc/errors.hpp"
#include "sgmc/graph.hpp"

using namespace sgmc;

namespace {

UndirectedGraph cycle(int n) {
  UndirectedGraph g(n);
  for (int i = 0; i < n; ++i) g.add_edge(i, (i + 1) % n);
  return g;
}

bool running_intersection(const JunctionTree& t) {
  NodeSet seen = t.cliques.empty() ? NodeSet{} : t.cliques[0];
  for (std::size_t i = 1; i < t.cliques.size(); ++i) {
    const NodeSet sep = set_intersection(t.cliques[i], seen);
    if (sep != t.separators[i - 1]) return false;
    if (!is_subset(sep, t.cliques[t.parents[i - 1]])) return false;
    if (t.parents[i - 1] >= static_cast<int>(i)) return false;
    seen = set_union(seen, t.cliques[i]);
  }
  return true;
}

}  // namespace

TEST_CASE("adjacency basics") {
  UndirectedGraph g(4, {{0, 1}, {1, 2}});
  CHECK(g.has_edge(1, 0));
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK(g.edge_count() == 2);
  CHECK(g.neighbors(1) == NodeSet{0, 2});
  g.remove_edge(0, 1);
  CHECK(g.edge_count() == 1);
  CHECK_THROWS(g.add_edge(2, 2));
  CHECK_THROWS(g.add_edge(0, 7));
}

TEST_CASE("separation examples") {
  const UndirectedGraph path(3, {{0, 1}, {1, 2}});
  CHECK(separates(path, {0}, {2}, {1}));
  CHECK_FALSE(separates(path, {0}, {2}, {}));
  const UndirectedGraph empty(3);
  CHECK(separates(empty, {0}, {1}, {}));
  CHECK_THROWS_AS(separates(path, {}, {2}, {1}), std::invalid_argument);
  CHECK_THROWS_AS(separates(path, {0, 1}, {1, 2}, {}), std::invalid_argument);
}

TEST_CASE("chordality examples") {
  CHECK_FALSE(is_decomposable(cycle(4)));
  UndirectedGraph chorded = cycle(4);
  chorded.add_edge(0, 2);
  CHECK(is_decomposable(chorded));
  CHECK(is_decomposable(UndirectedGraph(6)));
  CHECK_THROWS_AS(maximal_cliques(cycle(5)), UnsupportedModelError);
  CHECK_FALSE(chordal_cliques(cycle(5)).has_value());
}

TEST_CASE("maximal cliques of the five-node example") {
  const UndirectedGraph g(5, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}, {3, 4}});
  const std::vector<NodeSet> expected{{0, 1, 2}, {1, 2, 3}, {3, 4}};
  CHECK(maximal_cliques(g) == expected);
  const auto t = junction_tree(g);
  CHECK(t.cliques.size() == 3);
  CHECK(running_intersection(t));
}

TEST_CASE("random graphs agree with brute force") {
  std::mt19937_64 rng(11);
  int chordal = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const double p = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
    const UndirectedGraph g = oracle::random_graph(n, p, rng);
    const bool dec = is_decomposable(g);
    REQUIRE(dec == !oracle::has_chordless_cycle(g));
    if (!dec) continue;
    ++chordal;
    REQUIRE(maximal_cliques(g) == oracle::maximal_cliques(g));
    const auto t = junction_tree(g);
    REQUIRE(running_intersection(t));
    auto seps = t.separators;
    auto ref = oracle::separators(oracle::maximal_cliques(g));
    std::sort(seps.begin(), seps.end());
    std::sort(ref.begin(), ref.end());
    REQUIRE(seps == ref);
    for (std::size_t r = 0; r < t.cliques.size(); ++r) REQUIRE(running_intersection(reroot(t, static_cast<int>(r))));
  }
  CHECK(chordal > 100);
}

TEST_CASE("separates agrees with path enumeration") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 600; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 7);
    const UndirectedGraph g = oracle::random_graph(n, 0.35, rng);
    NodeSet a, b, s;
    for (int v = 0; v < n; ++v) {
      switch (rng() % 4) {
        case 0:
          a.push_back(v);
          break;
        case 1:
          b.push_back(v);
          break;
        case 2:
          s.push_back(v);
          break;
        default:
          break;
      }
    }
    if (a.empty() || b.empty()) continue;
    REQUIRE(separates(g, a, b, s) == !oracle::path_avoiding(g, a, b, s));
  }
}

TEST_CASE("perfect elimination ordering property") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const UndirectedGraph g = oracle::random_graph(7, 0.5, rng);
    if (!is_decomposable(g)) continue;
    const auto order = maximum_cardinality_search(g);
    std::vector<int> pos(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    for (Node v : order) {
      NodeSet earlier;
      for (Node u : g.neighbors(v)) {
        if (pos[u] < pos[v]) earlier.push_back(u);
      }
      REQUIRE(g.is_complete(earlier));
    }
  }
}
