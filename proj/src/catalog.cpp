#include "sgmc/catalog.hpp"

namespace sgmc::catalog {

namespace {

ConditionalTable binary_table(Node node, std::vector<Node> parents, std::initializer_list<double> p_one) {
  ConditionalTable t;
  t.node = node;
  t.parents = std::move(parents);
  t.probabilities.resize(static_cast<Eigen::Index>(p_one.size()), 2);
  Eigen::Index r = 0;
  for (double p : p_one) {
    t.probabilities(r, 0) = 1.0 - p;
    t.probabilities(r, 1) = p;
    ++r;
  }
  return t;
}

StratifiedGraph with_strata(UndirectedGraph g, Strata strata) {
  StratifiedGraph sg{std::move(g)};
  sg.strata = std::move(strata);
  return sg;
}

}  // namespace

UndirectedGraph figure1_graph() { return UndirectedGraph(5, {{0, 1}, {0, 2}, {1, 2}, {1, 3}, {2, 3}, {3, 4}}); }

StratifiedGraph figure1_sg() {
  return with_strata(figure1_graph(), {{{0, 2}, {{1}}}, {{1, 3}, {{0}}}, {{2, 3}, {{0}}}});
}

StratifiedGraph table3_sg() { return with_strata(figure1_graph(), {{{1, 3}, {{0}}}, {{2, 3}, {{0}}}}); }

GeneratingModel table3_generating_model() {
  GeneratingModel gm;
  gm.sg = table3_sg();
  gm.space = OutcomeSpace::binary(5);
  gm.cliques.push_back({{0, 1, 2},
                        {},
                        {binary_table(0, {}, {0.5}), binary_table(1, {0}, {0.2, 0.8}),
                         binary_table(2, {0, 1}, {0.1, 0.6, 0.4, 0.9})}});
  gm.cliques.push_back({{1, 2, 3}, {1, 2}, {binary_table(3, {1, 2}, {0.25, 0.25, 0.25, 0.8})}});
  gm.cliques.push_back({{3, 4}, {3}, {binary_table(4, {3}, {0.3, 0.7})}});
  gm.validate();
  return gm;
}

std::vector<StratifiedGraph> synthetic_class_structures() {
  std::vector<StratifiedGraph> out;
  out.push_back(with_strata(UndirectedGraph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}), {}));
  out.push_back(with_strata(UndirectedGraph(5, {{0, 1}, {0, 2}, {1, 2}, {2, 3}, {3, 4}}), {{{0, 1}, {{0}}}}));
  out.push_back(figure1_sg());

  UndirectedGraph four(5, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}, {3, 4}});
  out.push_back(with_strata(four, {{{0, 3}, {{0, 0}, {1, 1}}}, {{1, 3}, {{0, 1}}}, {{2, 3}, {{0, 0}}}}));

  UndirectedGraph five(5);
  for (int a = 0; a < 5; ++a) {
    for (int b = a + 1; b < 5; ++b) five.add_edge(a, b);
  }
  out.push_back(with_strata(five, {{{0, 4}, {{0, 0, 0}, {1, 1, 1}, {0, 1, 0}}},
                                   {{1, 4}, {{0, 0, 0}, {1, 0, 1}}},
                                   {{2, 4}, {{0, 0, 0}, {1, 1, 0}}},
                                   {{3, 4}, {{0, 0, 0}, {0, 1, 1}, {1, 0, 0}}}}));
  return out;
}

}  // namespace sgmc::catalog
