#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sgmc/data.hpp"
#include "sgmc/stratified.hpp"

namespace sgmc {

// Natural-log probability.
using LogScore = double;

struct HyperParams {
  double equivalent_sample_size = 1.0;

  void validate() const;
  bool operator==(const HyperParams& other) const = default;
};

// Per ordered variable: a groups x categories array of Dirichlet parameters.
using DirichletTable = std::vector<Eigen::ArrayXXd>;

using CountArray = Eigen::Array<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Sufficient statistics of one clique or separator under a grouping:
/// joint[j](l, i) = n(x_j = i | parents of j in group l).
struct CountTable {
  std::vector<CountArray> joint;

  // n(pi_j^l)
  std::int64_t parent_count(std::size_t j, int group) const { return joint[j].row(group).sum(); }
  // Observation count (taken from the first variable; 0 for an empty table).
  std::int64_t total() const { return joint.empty() ? 0 : joint.front().sum(); }

  CountTable& operator+=(const CountTable& other);
  CountTable& operator-=(const CountTable& other);
  bool operator==(const CountTable& other) const;
};

// Location of one observation in a variable's count array.
struct CellIndex {
  int group = 0;
  int value = 0;
};

// alpha_jil = N * lambda_jl / (pi_j * k_j), with lambda only for the last variable.
DirichletTable derive_alpha(const HyperParams& hp, const ParentGrouping& grouping,
                            const OutcomeSpace& space);

CountTable empty_counts(const ParentGrouping& grouping);
CountTable count_stats(const DataMatrix& data, const ParentGrouping& grouping);
CountTable count_stats(const DataMatrix& data, const ParentGrouping& grouping, std::span<const int> rows);
CountTable count_stats(const Histogram& hist, const ParentGrouping& grouping);

// `row` is a full observation indexed by node; `out` receives one cell per
// ordered variable.
void locate_cells(const ParentGrouping& grouping, std::span<const int> row, std::span<CellIndex> out);
void add_observation(CountTable& counts, const ParentGrouping& grouping, std::span<const int> row,
                     std::int64_t weight = 1);

// Dirichlet-multinomial log marginal likelihood of the counts under `prior`.
LogScore log_marginal(const CountTable& counts, const DirichletTable& prior);

LogScore clique_marginal_likelihood(const CountTable& counts, const DirichletTable& alphas);

// Marginal likelihood of `test` with the prior updated by `train`
// (beta = alpha + train counts).
LogScore posterior_predictive(const CountTable& test_counts, const CountTable& train_counts,
                              const DirichletTable& alphas);

DirichletTable updated_prior(const DirichletTable& alphas, const CountTable& train_counts);

// One clique or separator of the factorization with its prepared prior.
struct FactorTerm {
  ParentGrouping grouping;
  DirichletTable alpha;
};

/// Eq.-(1)-style factorization of a decomposable stratified graph: cliques in
/// junction-tree order with their stratum-induced groupings, and the
/// non-empty separators with singleton groupings.
struct Factorization {
  JunctionTree tree;
  std::vector<FactorTerm> cliques;
  std::vector<FactorTerm> separators;

  // Throws UnsupportedModelError unless sg is a decomposable SG.
  static Factorization build(const StratifiedGraph& sg, const OutcomeSpace& space, const HyperParams& hp);
  // Same factorization with an explicit ordering for each clique.
  static Factorization build(const StratifiedGraph& sg, const OutcomeSpace& space, const HyperParams& hp,
                             const std::vector<std::vector<Node>>& clique_orderings);
};

LogScore graph_marginal_likelihood(const DataMatrix& data, const StratifiedGraph& sg, const HyperParams& hp);
LogScore graph_marginal_likelihood(const DataMatrix& data, const Factorization& f);
LogScore graph_marginal_likelihood(const DataMatrix& data, const Factorization& f, std::span<const int> rows);

// Sum over cliques minus separators of posterior_predictive(test | train).
LogScore graph_posterior_predictive(const DataMatrix& test, const DataMatrix& train,
                                    const StratifiedGraph& sg, const HyperParams& hp);

}  // namespace sgmc
