#include <cmath>

#include "doctest.h"
#include "sgmc/catalog.hpp"
#include "sgmc/errors.hpp"
#include "sgmc/generator.hpp"

using namespace sgmc;

TEST_CASE("uniform independent model gives fair coins") {
  GeneratingModel gm = random_generating_model(StratifiedGraph{UndirectedGraph(3)}, OutcomeSpace::binary(3), 1);
  for (auto& cc : gm.cliques) {
    for (auto& t : cc.variables) t.probabilities.setConstant(0.5);
  }
  const int n = 10000;
  const DataMatrix d = sample(gm, n, 9);
  const double sigma = std::sqrt(0.25 / n);
  for (int c = 0; c < 3; ++c) CHECK(std::abs(d.values.col(c).cast<double>().mean() - 0.5) < 3 * sigma);
  CHECK(sample(gm, 50, 4) == sample(gm, 50, 4));
}

TEST_CASE("the CPT example model honors its strata empirically") {
  const auto gm = catalog::table3_generating_model();
  const int n = 100000;
  const DataMatrix d = sample(gm, n, 2);
  std::array<double, 4> ones{}, totals{};
  for (Eigen::Index r = 0; r < d.rows(); ++r) {
    const int p = d.values(r, 1) * 2 + d.values(r, 2);
    totals[p] += 1;
    ones[p] += d.values(r, 3);
  }
  for (int p = 0; p < 3; ++p) {
    const double f = ones[p] / totals[p];
    CHECK(std::abs(f - 0.25) < 3 * std::sqrt(0.25 * 0.75 / totals[p]));
  }
  CHECK(std::abs(ones[3] / totals[3] - 0.8) < 3 * std::sqrt(0.16 / totals[3]));
}

TEST_CASE("random models satisfy the invariants") {
  for (const auto& sg : catalog::synthetic_class_structures()) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto gm = random_generating_model(sg, OutcomeSpace::binary(5), seed, 0.7);
      CHECK_NOTHROW(gm.validate());
      CHECK(marginal_distribution(gm, {0, 1, 2, 3, 4}).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  auto gm = catalog::table3_generating_model();
  gm.cliques[1].variables[0].probabilities(0, 1) = 0.3;
  gm.cliques[1].variables[0].probabilities(0, 0) = 0.7;
  CHECK_THROWS_AS(gm.validate(), DataValidationError);
  gm.cliques[1].variables[0].probabilities(0, 0) = 0.6;
  CHECK_THROWS_AS(gm.validate(), DataValidationError);
}

TEST_CASE("clique frequencies converge to the model distribution") {
  const auto gm = random_generating_model(catalog::figure1_sg(), OutcomeSpace::binary(5), 5);
  const int n = 100000;
  const DataMatrix d = sample(gm, n, 6);
  for (const auto& clique : maximal_cliques(gm.sg.graph)) {
    const std::vector<Node> nodes(clique.begin(), clique.end());
    const auto p = marginal_distribution(gm, nodes);
    const auto h = make_histogram(d, nodes);
    double chi2 = 0.0;
    for (Eigen::Index c = 0; c < p.size(); ++c) {
      const double e = n * p(c);
      if (e > 0) chi2 += (h.counts(c) - e) * (h.counts(c) - e) / e;
    }
    const double dof = static_cast<double>(p.size() - 1);
    CHECK(chi2 < dof + 5 * std::sqrt(2 * dof));
  }
}

TEST_CASE("rerooting keeps stratified nodes out of separators") {
  StratifiedGraph sg{UndirectedGraph(4, {{0, 1}, {1, 2}, {1, 3}, {2, 3}})};
  sg.strata[{1, 2}] = {{0}};
  sg.strata[{1, 3}] = {{1}};
  REQUIRE(is_decomposable_sg(sg));
  CHECK(junction_tree(sg.graph).cliques.front() == NodeSet{0, 1});
  const auto layout = generator_layout(sg);
  CHECK(layout.tree.cliques.front() == NodeSet{1, 2, 3});
  CHECK(layout.orderings.front().back() == 1);
  const auto gm = random_generating_model(sg, OutcomeSpace::binary(4), 3);
  CHECK_NOTHROW(gm.validate());
}

TEST_CASE("synthetic data shape and replication") {
  SyntheticSpec spec;
  spec.class_structures = catalog::synthetic_class_structures();
  spec.components = 4;
  spec.seed = 3;
  CHECK(spec.feature_count() == 20);
  const auto ld = build_synthetic(spec, 30);
  CHECK(ld.data.cols() == 20);
  CHECK(ld.data.rows() == 150);
  CHECK(ld.labels.front() == 1);
  CHECK(ld.labels.back() == 5);
  spec.components = 10;
  CHECK(build_synthetic(spec, 2).data.cols() == 50);

  const auto rep = replicate(catalog::figure1_sg(), 3);
  CHECK(rep.node_count() == 15);
  CHECK(rep.graph.edge_count() == 18);
  CHECK(rep.strata.count({10, 12}) == 1);

  // Each component follows the same law.
  spec.components = 3;
  spec.class_structures = {catalog::figure1_sg()};
  const auto models = draw_class_models(spec);
  const auto big = sample_synthetic(models, 3, 60000, 8);
  const auto law = marginal_distribution(models[0], {0, 1, 2});
  for (int c = 0; c < 3; ++c) {
    const auto h = make_histogram(big.data, {5 * c, 5 * c + 1, 5 * c + 2});
    for (Eigen::Index i = 0; i < law.size(); ++i) {
      const double f = static_cast<double>(h.counts(i)) / 60000.0;
      CHECK(std::abs(f - law(i)) < 4 * std::sqrt(law(i) * (1 - law(i)) / 60000.0) + 1e-9);
    }
  }
}
