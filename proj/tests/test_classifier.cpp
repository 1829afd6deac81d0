#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "sgmc/catalog.hpp"
#include "sgmc/classifier.hpp"
#include "sgmc/generator.hpp"

using namespace sgmc;

namespace {

struct Instance {
  std::vector<ClassModel> models;
  DataMatrix test;
  LabelVector truth;
};

Instance random_instance(std::mt19937_64& rng, int classes, int train_rows, int test_rows) {
  SyntheticSpec spec;
  auto structures = catalog::synthetic_class_structures();
  for (int k = 0; k < classes; ++k) spec.class_structures.push_back(structures[k % structures.size()]);
  spec.components = 1;
  spec.seed = rng();
  const auto gms = draw_class_models(spec);
  const auto train = sample_synthetic(gms, 1, train_rows, rng());
  const auto test = sample_synthetic(gms, 1, test_rows, rng());
  Instance out;
  const auto by_class = rows_by_class(train.labels, classes);
  for (int k = 0; k < classes; ++k) {
    out.models.push_back(ClassModel::fit(k + 1, spec.class_structures[k], {}, train.data, by_class[k]));
  }
  out.test = test.data;
  out.truth = test.labels;
  return out;
}

}  // namespace

TEST_CASE("row predictive equals the graph-level predictive") {
  std::mt19937_64 rng(1);
  const auto inst = random_instance(rng, 3, 15, 4);
  for (const auto& m : inst.models) {
    const std::vector<int> all{0, 1, 2, 3};
    for (int r = 0; r < 4; ++r) {
      const std::span<const int> row(inst.test.values.row(r).data(), 5);
      const std::vector<int> one{r};
      CHECK(m.row_log_predictive(row) == doctest::Approx(m.log_predictive(inst.test, one)).epsilon(1e-12));
    }
  }
}

TEST_CASE("model predictive matches the scoring module") {
  std::mt19937_64 rng(2);
  const OutcomeSpace space = OutcomeSpace::binary(5);
  const auto sg = catalog::figure1_sg();
  const auto train = oracle::random_data(30, space, rng);
  const auto test = oracle::random_data(6, space, rng);
  const auto model = ClassModel::fit(1, sg, HyperParams{2.0}, train);
  std::vector<int> rows{0, 1, 2, 3, 4, 5};
  CHECK(model.log_predictive(test, rows) ==
        doctest::Approx(graph_posterior_predictive(test, train, sg, HyperParams{2.0})).epsilon(1e-10));
}

TEST_CASE("leave-one-out updates are reversible") {
  std::mt19937_64 rng(3);
  const OutcomeSpace space = OutcomeSpace::binary(5);
  const auto train = oracle::random_data(20, space, rng);
  auto model = ClassModel::fit(1, catalog::figure1_sg(), {}, train);
  const auto before = model.clique_counts();
  const std::span<const int> row(train.values.row(4).data(), 5);
  const double p = model.row_log_predictive(row);
  model.update_training(row, -1);
  std::vector<int> keep;
  for (int r = 0; r < 20; ++r) {
    if (r != 4) keep.push_back(r);
  }
  const auto refit = ClassModel::fit(1, catalog::figure1_sg(), {}, train, keep);
  CHECK(model.row_log_predictive(row) == doctest::Approx(refit.row_log_predictive(row)).epsilon(1e-12));
  model.update_training(row, +1);
  CHECK(model.clique_counts() == before);
  CHECK(model.row_log_predictive(row) == doctest::Approx(p).epsilon(1e-12));
  auto empty = ClassModel::fit(1, catalog::figure1_sg(), {}, DataMatrix(CategoryMatrix(0, 5), space));
  CHECK_THROWS(empty.update_training(row, -1));
}

TEST_CASE("marginal classifier takes the row-wise maximum") {
  std::mt19937_64 rng(4);
  const auto inst = random_instance(rng, 4, 20, 10);
  const auto result = classify_marginal(inst.test, inst.models);
  REQUIRE(result.labels.size() == 40);
  CHECK(result.iterations == 1);
  for (int r = 0; r < 40; ++r) {
    const std::span<const int> row(inst.test.values.row(r).data(), 5);
    int best = 1;
    double best_score = -INFINITY;
    for (const auto& m : inst.models) {
      const double s = m.row_log_predictive(row);
      if (s > best_score) {
        best_score = s;
        best = m.class_id();
      }
    }
    REQUIRE(result.labels[r] == best);
    REQUIRE(result.log_posteriors.row(r).array().exp().sum() == doctest::Approx(1.0));
  }
  CHECK(result.log_score == doctest::Approx(marginal_score(result.labels, inst.test, inst.models)).epsilon(1e-12));
}

TEST_CASE("ties go to the smallest class id") {
  const OutcomeSpace space = OutcomeSpace::binary(2);
  const DataMatrix empty(CategoryMatrix(0, 2), space);
  std::vector<ClassModel> models{ClassModel::fit(1, StratifiedGraph{UndirectedGraph(2)}, {}, empty),
                                 ClassModel::fit(2, StratifiedGraph{UndirectedGraph(2)}, {}, empty)};
  CategoryMatrix v(3, 2);
  v << 0, 1, 0, 1, 0, 1;
  const DataMatrix test(v, space);
  CHECK(classify_marginal(test, models).labels == LabelVector{1, 1, 1});
  CHECK(classify_simultaneous(test, models).labels == LabelVector{1, 1, 1});
}

TEST_CASE("simultaneous classifier mechanics") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = random_instance(rng, 2 + static_cast<int>(rng() % 3), 3 + static_cast<int>(rng() % 20),
                                      1 + static_cast<int>(rng() % 8));
    const InitKind kind = trial % 2 ? InitKind::Random : InitKind::Marginal;
    const auto result = classify_simultaneous(inst.test, inst.models, {kind, {}}, rng());
    REQUIRE(result.iterations <= kMaxSweeps);
    for (std::size_t i = 1; i < result.score_trace.size(); ++i) REQUIRE(result.score_trace[i] > result.score_trace[i - 1]);
    const double rescored = simultaneous_score(result.labels, inst.test, inst.models);
    REQUIRE(result.log_score == doctest::Approx(rescored).epsilon(1e-9));
    REQUIRE(result.score_trace.back() == doctest::Approx(rescored).epsilon(1e-9));
    // Coordinate-wise optimal at termination.
    for (std::size_t r = 0; r < result.labels.size(); ++r) {
      for (std::size_t k = 1; k <= inst.models.size(); ++k) {
        LabelVector moved = result.labels;
        moved[r] = static_cast<int>(k);
        REQUIRE(simultaneous_score(moved, inst.test, inst.models) <= rescored + 1e-9);
      }
    }
  }
}

TEST_CASE("a single test row gives identical marginal and simultaneous results") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = random_instance(rng, 3, 10, 1);
    const std::vector<int> first{0};
    const DataMatrix one = select_rows(inst.test, first);
    const auto mar = classify_marginal(one, inst.models);
    const auto sim = classify_simultaneous(one, inst.models);
    REQUIRE(mar.labels == sim.labels);
    REQUIRE(mar.log_score == sim.log_score);
    for (int k = 1; k <= 3; ++k) {
      const LabelVector l{k};
      REQUIRE(marginal_score(l, one, inst.models) == simultaneous_score(l, one, inst.models));
    }
  }
}

TEST_CASE("simultaneous score is the chain of row predictives") {
  std::mt19937_64 rng(7);
  const auto inst = random_instance(rng, 2, 10, 5);
  const auto& truth = inst.truth;
  double chain = 0.0;
  std::vector<ClassModel> models = inst.models;
  for (std::size_t r = 0; r < truth.size(); ++r) {
    const std::span<const int> row(inst.test.values.row(static_cast<Eigen::Index>(r)).data(), 5);
    chain += models[truth[r] - 1].row_log_predictive(row);
    models[truth[r] - 1].update_training(row, +1);
  }
  CHECK(simultaneous_score(truth, inst.test, inst.models) == doctest::Approx(chain).epsilon(1e-12));
  const auto by_class = rows_by_class(truth, 2);
  const double joint = inst.models[0].log_predictive(inst.test, by_class[0]) +
                       inst.models[1].log_predictive(inst.test, by_class[1]);
  CHECK(simultaneous_score(truth, inst.test, inst.models) == doctest::Approx(joint).epsilon(1e-10));
}

TEST_CASE("confusion matrix orientation") {
  const LabelVector truth{1, 1, 2, 2, 2, 3};
  const LabelVector got{1, 2, 2, 2, 3, 3};
  const auto m = confusion_matrix(truth, got, 3);
  CHECK(m(0, 1) == 1);
  CHECK(m(1, 2) == 1);
  CHECK(m.row(1).sum() == 3);
  CHECK(success_rate(truth, got) == doctest::Approx(4.0 / 6.0));
}
