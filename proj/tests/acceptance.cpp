// One line per acceptance criterion; exit status is non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "oracles.hpp"
#include "sgmc/catalog.hpp"
#include "sgmc/classifier.hpp"
#include "sgmc/experiments.hpp"
#include "sgmc/generator.hpp"
#include "sgmc/learning.hpp"
#include "sgmc/scoring.hpp"
#include "sgmc/seeding.hpp"

using namespace sgmc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

StratifiedGraph random_decomposable_sg(int n, std::mt19937_64& rng, const OutcomeSpace& space) {
  while (true) {
    const UndirectedGraph g = oracle::random_graph(n, 0.6, rng);
    if (!is_decomposable(g)) continue;
    StratifiedGraph sg{g};
    for (const auto& e : g.edges()) {
      if (rng() % 2) continue;
      const NodeSet common = common_neighbors(g, e);
      if (common.empty()) continue;
      const auto contexts = enumerate_contexts(common, space);
      ContextSet chosen;
      for (const auto& c : contexts) {
        if (rng() % 2) chosen.insert(c);
      }
      if (chosen.empty() || chosen.size() == contexts.size()) continue;
      sg.strata[e] = chosen;
      if (!is_decomposable_sg(sg)) sg.strata.erase(e);
    }
    return sg;
  }
}

Outcome normalization() {
  const OutcomeSpace space = OutcomeSpace::binary(3);
  std::vector<StratifiedGraph> models;
  for (int mask = 0; mask < 8; ++mask) {
    UndirectedGraph g(3);
    if (mask & 1) g.add_edge(0, 1);
    if (mask & 2) g.add_edge(0, 2);
    if (mask & 4) g.add_edge(1, 2);
    models.push_back(StratifiedGraph{g});
    if (mask != 7) continue;
    for (const auto& e : g.edges()) {
      for (int v = 0; v < 2; ++v) {
        StratifiedGraph sg{g};
        sg.strata[e] = {{v}};
        models.push_back(sg);
      }
    }
  }
  double worst = 0.0;
  for (const auto& sg : models) {
    const Factorization f = Factorization::build(sg, space, {});
    double total = 0.0;
    for (int d = 0; d < 64; ++d) {
      CategoryMatrix v(2, 3);
      for (int r = 0; r < 2; ++r) {
        const int x = (d >> (3 * r)) & 7;
        for (int c = 0; c < 3; ++c) v(r, c) = (x >> (2 - c)) & 1;
      }
      total += std::exp(graph_marginal_likelihood(DataMatrix(v, space), f));
    }
    worst = std::max(worst, std::abs(total - 1.0));
  }
  return {worst <= 1e-9, fmt("%zu models, max |sum - 1| = %.2e", models.size(), worst)};
}

Outcome chain_rule() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);
    OutcomeSpace space;
    for (int c = 0; c < n; ++c) space.cardinalities.push_back(2 + static_cast<int>(rng() % 2));
    const auto sg = random_decomposable_sg(n, rng, space);
    const auto train = oracle::random_data(static_cast<int>(rng() % 25), space, rng);
    const auto test = oracle::random_data(1 + static_cast<int>(rng() % 10), space, rng);
    const HyperParams hp{std::uniform_real_distribution<double>(0.2, 4.0)(rng)};
    const double lhs = graph_marginal_likelihood(concat_rows(train, test), sg, hp) - graph_marginal_likelihood(train, sg, hp);
    worst = std::max(worst, std::abs(lhs - graph_posterior_predictive(test, train, sg, hp)));
  }
  return {worst <= 1e-9, fmt("500 instances, max deviation %.2e", worst)};
}

Outcome gm_equals_sgm() {
  std::mt19937_64 rng(102);
  int equal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const OutcomeSpace space = OutcomeSpace::binary(5);
    UndirectedGraph g(5);
    do {
      g = oracle::random_graph(5, 0.5, rng);
    } while (!is_decomposable(g));
    const auto data = oracle::random_data(30, space, rng);
    const auto test = oracle::random_data(5, space, rng);
    const Factorization f = Factorization::build(StratifiedGraph{g}, space, {});
    double classical = 0.0;
    double classical_pred = 0.0;
    for (const auto& c : f.tree.cliques) {
      const auto pg = singleton_grouping(std::vector<Node>(c.begin(), c.end()), space);
      const auto alpha = derive_alpha({}, pg, space);
      classical += log_marginal(count_stats(data, pg), alpha);
      classical_pred += posterior_predictive(count_stats(test, pg), count_stats(data, pg), alpha);
    }
    for (const auto& s : f.tree.separators) {
      if (s.empty()) continue;
      const auto pg = singleton_grouping(std::vector<Node>(s.begin(), s.end()), space);
      const auto alpha = derive_alpha({}, pg, space);
      classical -= log_marginal(count_stats(data, pg), alpha);
      classical_pred -= posterior_predictive(count_stats(test, pg), count_stats(data, pg), alpha);
    }
    const StratifiedGraph sg{g};
    equal += graph_marginal_likelihood(data, sg, {}) == classical &&
             graph_posterior_predictive(test, data, sg, {}) == classical_pred;
  }
  return {equal == 100, fmt("%d/100 bit-exact", equal)};
}

Outcome table3_grouping() {
  const auto pg = parent_grouping(catalog::table3_sg(), {1, 2, 3}, OutcomeSpace::binary(5));
  const auto& v = pg.variables.back();
  const bool ok = v.group_of == std::vector<int>{0, 0, 0, 1} && v.group_size == std::vector<std::int64_t>{3, 1};
  return {ok, fmt("q=%d, lambda=(%lld,%lld)", v.groups(), static_cast<long long>(v.group_size.at(0)),
                  static_cast<long long>(v.group_size.size() > 1 ? v.group_size[1] : 0))};
}

Outcome graph_oracles() {
  std::mt19937_64 rng(103);
  int agree_dec = 0;
  int agree_sep = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    const auto g = oracle::random_graph(n, std::uniform_real_distribution<double>(0.1, 0.9)(rng), rng);
    agree_dec += is_decomposable(g) == !oracle::has_chordless_cycle(g);
    NodeSet a, b, s;
    a.push_back(static_cast<Node>(rng() % n));
    for (int v = 0; v < n; ++v) {
      if (v == a[0]) continue;
      const auto r = rng() % 3;
      if (r == 0) b.push_back(v);
      if (r == 1) s.push_back(v);
    }
    if (b.empty()) {
      agree_sep += 1;
      continue;
    }
    agree_sep += separates(g, a, b, s) == !oracle::path_avoiding(g, a, b, s);
  }
  return {agree_dec == 1000 && agree_sep == 1000, fmt("decomposable %d/1000, separates %d/1000", agree_dec, agree_sep)};
}

ConvergeReport& converge_report() {
  static ConvergeReport report = [] {
    ConvergePlan plan;
    plan.seeds = 50;
    plan.seed = 2024;
    return run_converge(plan);
  }();
  return report;
}

Outcome theorem1() {
  const auto s = converge_report().summary;
  const bool ok = s.theorem1_decreasing >= 0.9 && s.theorem1_final < 0.1 * s.theorem1_initial;
  return {ok, fmt("decreasing in %.0f%% of seeds, mean gap %.3g -> %.3g", 100 * s.theorem1_decreasing,
                  s.theorem1_initial, s.theorem1_final)};
}

Outcome theorem2() {
  const auto s = converge_report().summary;
  const bool ok = s.theorem2_decreasing >= 0.9 && s.theorem2_final < 0.1 * s.theorem2_initial;
  return {ok, fmt("decreasing in %.0f%% of seeds, mean gap %.3g -> %.3g", 100 * s.theorem2_decreasing,
                  s.theorem2_initial, s.theorem2_final)};
}

Outcome figure3() {
  ExperimentPlan plan;
  plan.classifiers = default_classifiers(StructureSource::Known);
  plan.sweep_values = {10, 50, 100, 250};
  plan.fixed_rows = 20;
  plan.replicates = 50;
  plan.components = 4;
  plan.seed = 3003;
  const auto report = run_sweep(plan);
  bool ok = true;
  std::string detail;
  for (const char* mode : {"marginal", "simultaneous"}) {
    for (int v : plan.sweep_values) {
      const double sgm = report.at(std::string("sgm-known-") + mode, v).mean;
      const double gm = report.at(std::string("gm-known-") + mode, v).mean;
      const double nb = report.at(std::string("naive-bayes-") + mode, v).mean;
      ok = ok && sgm >= gm && gm >= nb;
      detail += fmt("%s@%d %.3f/%.3f/%.3f; ", mode, v, sgm, gm, nb);
    }
    const double gap = report.at(std::string("sgm-known-") + mode, 250).mean -
                       report.at(std::string("naive-bayes-") + mode, 250).mean;
    ok = ok && gap >= 0.05;
  }
  return {ok, "SGM/GM/NB " + detail};
}

Outcome figure4() {
  ExperimentPlan plan;
  plan.classifiers = default_classifiers(StructureSource::Known);
  plan.sweep = SweepVariable::TestRows;
  plan.sweep_values = {10, 50, 100};
  plan.fixed_rows = 20;
  plan.replicates = 50;
  plan.components = 10;
  plan.seed = 4004;
  const auto report = run_sweep(plan);
  bool ok = true;
  std::string detail;
  for (int v : plan.sweep_values) {
    const double ss = report.at("sgm-known-simultaneous", v).mean;
    const double sm = report.at("sgm-known-marginal", v).mean;
    const double gs = report.at("gm-known-simultaneous", v).mean;
    const double gmm = report.at("gm-known-marginal", v).mean;
    ok = ok && ss >= sm && gs >= gmm;
    detail += fmt("test=%d sgm %.3f>=%.3f gm %.3f>=%.3f; ", v, ss, sm, gs, gmm);
  }
  return {ok, detail};
}

Outcome figure5() {
  ExperimentPlan plan;
  plan.mode = StructureSource::Learned;
  plan.classifiers = {ClassifierSpec::parse("sgm-known-marginal"), ClassifierSpec::parse("sgm-learned-marginal"),
                      ClassifierSpec::parse("gm-known-marginal"), ClassifierSpec::parse("gm-learned-marginal")};
  plan.sweep_values = {50, 200, 1000};
  plan.fixed_rows = 20;
  plan.replicates = 20;
  plan.components = 4;
  plan.seed = 5005;
  const auto report = run_sweep(plan);
  auto gap = [&](const char* s, int v) {
    return std::abs(report.at(std::string(s) + "-known-marginal", v).mean -
                    report.at(std::string(s) + "-learned-marginal", v).mean);
  };
  const bool ok = gap("sgm", 1000) < 0.5 * gap("sgm", 50) && gap("gm", 1000) < 0.5 * gap("gm", 50);
  return {ok, fmt("sgm gap %.3f/%.3f/%.3f, gm gap %.3f/%.3f/%.3f", gap("sgm", 50), gap("sgm", 200), gap("sgm", 1000),
                  gap("gm", 50), gap("gm", 200), gap("gm", 1000))};
}

Outcome classifier_mechanics() {
  std::mt19937_64 rng(111);
  const auto structures = catalog::synthetic_class_structures();
  int monotone = 0;
  int single = 0;
  int rescored = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int classes = 2 + static_cast<int>(rng() % 4);
    SyntheticSpec spec;
    for (int k = 0; k < classes; ++k) spec.class_structures.push_back(structures[rng() % structures.size()]);
    spec.components = 1;
    spec.seed = rng();
    const auto gms = draw_class_models(spec);
    const auto train = sample_synthetic(gms, 1, 2 + static_cast<int>(rng() % 30), rng());
    const auto test = sample_synthetic(gms, 1, 1 + static_cast<int>(rng() % 8), rng());
    std::vector<ClassModel> models;
    const auto by_class = rows_by_class(train.labels, classes);
    for (int k = 0; k < classes; ++k) {
      models.push_back(ClassModel::fit(k + 1, spec.class_structures[k], {}, train.data, by_class[k]));
    }
    const auto result = classify_simultaneous(test.data, models, {trial % 2 ? InitKind::Random : InitKind::Marginal, {}},
                                              rng());
    bool inc = result.iterations <= kMaxSweeps;
    for (std::size_t i = 1; i < result.score_trace.size(); ++i) inc = inc && result.score_trace[i] > result.score_trace[i - 1];
    monotone += inc;
    rescored += std::abs(result.log_score - simultaneous_score(result.labels, test.data, models)) <= 1e-9;
    const std::vector<int> first{0};
    const DataMatrix one = select_rows(test.data, first);
    const auto mar = classify_marginal(one, models);
    const auto sim = classify_simultaneous(one, models);
    single += mar.labels == sim.labels && mar.log_score == sim.log_score;
  }
  return {monotone == 1000 && single == 1000 && rescored == 1000,
          fmt("increasing+terminating %d/1000, single-row identical %d/1000, rescore %d/1000", monotone, single,
              rescored)};
}

Outcome structure_recovery() {
  int empty = 0;
  int pair = 0;
  int strata = 0;
  const auto gm = catalog::table3_generating_model();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(derive_seed(12, {seed}));
    empty += learn_graph(oracle::random_data(5000, OutcomeSpace::binary(4), rng), {}).sg.graph.edge_count() == 0;
    DataMatrix dep = oracle::random_data(5000, OutcomeSpace::binary(3), rng);
    dep.values.col(1) = dep.values.col(0);
    const auto g = learn_graph(dep, {}).sg.graph;
    pair += g.edge_count() == 1 && g.has_edge(0, 1);
    const auto learned = learn_strata(sample(gm, 10000, derive_seed(13, {seed})), catalog::figure1_graph(), {});
    strata += learned.sg.strata == catalog::table3_sg().strata;
  }
  return {empty >= 95 && pair >= 95 && strata >= 90,
          fmt("empty graph %d/100, dependent pair %d/100, strata %d/100", empty, pair, strata)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"normalization", normalization},
      {"chain rule", chain_rule},
      {"empty strata equal GM", gm_equals_sgm},
      {"CPT merging", table3_grouping},
      {"graph oracles", graph_oracles},
      {"sim/mar gap shrinks", theorem1},
      {"SGM/GM gap shrinks", theorem2},
      {"fixed-structure ordering, 20 features", figure3},
      {"simultaneous beats marginal, 50 features", figure4},
      {"learned approaches known structure", figure5},
      {"classifier mechanics", classifier_mechanics},
      {"structure recovery", structure_recovery},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    const Outcome o = criteria[i].second();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2zu %-42s %s  %s (%.1fs)\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
