#include "sgmc/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sgmc/errors.hpp"

namespace sgmc {

void HyperParams::validate() const {
  if (!(equivalent_sample_size > 0.0) || !std::isfinite(equivalent_sample_size)) {
    throw std::invalid_argument("equivalent sample size must be positive");
  }
}

CountTable& CountTable::operator+=(const CountTable& other) {
  if (joint.size() != other.joint.size()) throw std::invalid_argument("count table shape mismatch");
  for (std::size_t j = 0; j < joint.size(); ++j) joint[j] += other.joint[j];
  return *this;
}

CountTable& CountTable::operator-=(const CountTable& other) {
  if (joint.size() != other.joint.size()) throw std::invalid_argument("count table shape mismatch");
  for (std::size_t j = 0; j < joint.size(); ++j) joint[j] -= other.joint[j];
  return *this;
}

bool CountTable::operator==(const CountTable& other) const {
  if (joint.size() != other.joint.size()) return false;
  for (std::size_t j = 0; j < joint.size(); ++j) {
    if (joint[j].rows() != other.joint[j].rows() || joint[j].cols() != other.joint[j].cols()) return false;
    if (!(joint[j] == other.joint[j]).all()) return false;
  }
  return true;
}

DirichletTable derive_alpha(const HyperParams& hp, const ParentGrouping& grouping,
                            const OutcomeSpace& space) {
  hp.validate();
  DirichletTable out;
  out.reserve(grouping.variables.size());
  for (const auto& var : grouping.variables) {
    if (space.cardinality(var.node) != var.cardinality) {
      throw std::invalid_argument("derive_alpha: grouping and outcome space disagree");
    }
    Eigen::ArrayXXd alpha(var.groups(), var.cardinality);
    const double denom = static_cast<double>(var.parent_outcomes) * var.cardinality;
    for (int l = 0; l < var.groups(); ++l) {
      alpha.row(l).setConstant(hp.equivalent_sample_size * static_cast<double>(var.group_size[l]) / denom);
    }
    out.push_back(std::move(alpha));
  }
  return out;
}

CountTable empty_counts(const ParentGrouping& grouping) {
  CountTable out;
  for (const auto& var : grouping.variables) out.joint.push_back(CountArray::Zero(var.groups(), var.cardinality));
  return out;
}

void locate_cells(const ParentGrouping& grouping, std::span<const int> row, std::span<CellIndex> out) {
  std::int64_t parent = 0;
  for (std::size_t j = 0; j < grouping.variables.size(); ++j) {
    const auto& var = grouping.variables[j];
    const int v = row[var.node];
    if (v < 0 || v >= var.cardinality) {
      throw DataValidationError("column " + std::to_string(var.node + 1) + ": value " + std::to_string(v) +
                                " outside cardinality " + std::to_string(var.cardinality));
    }
    out[j] = CellIndex{var.group_of[static_cast<std::size_t>(parent)], v};
    parent = parent * var.cardinality + v;
  }
}

void add_observation(CountTable& counts, const ParentGrouping& grouping, std::span<const int> row,
                     std::int64_t weight) {
  std::vector<CellIndex> cells(grouping.variables.size());
  locate_cells(grouping, row, cells);
  for (std::size_t j = 0; j < cells.size(); ++j) counts.joint[j](cells[j].group, cells[j].value) += weight;
}

namespace {

std::span<const int> row_span(const DataMatrix& data, Eigen::Index r) {
  return {data.values.data() + r * data.cols(), static_cast<std::size_t>(data.cols())};
}

}  // namespace

CountTable count_stats(const DataMatrix& data, const ParentGrouping& grouping) {
  CountTable out = empty_counts(grouping);
  std::vector<CellIndex> cells(grouping.variables.size());
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    locate_cells(grouping, row_span(data, r), cells);
    for (std::size_t j = 0; j < cells.size(); ++j) ++out.joint[j](cells[j].group, cells[j].value);
  }
  return out;
}

CountTable count_stats(const DataMatrix& data, const ParentGrouping& grouping, std::span<const int> rows) {
  CountTable out = empty_counts(grouping);
  std::vector<CellIndex> cells(grouping.variables.size());
  for (int r : rows) {
    locate_cells(grouping, row_span(data, r), cells);
    for (std::size_t j = 0; j < cells.size(); ++j) ++out.joint[j](cells[j].group, cells[j].value);
  }
  return out;
}

CountTable count_stats(const Histogram& hist, const ParentGrouping& grouping) {
  CountTable out = empty_counts(grouping);
  // Node-indexed scratch row so locate_cells can read values directly.
  Node max_node = 0;
  for (Node v : hist.nodes) max_node = std::max(max_node, v);
  for (const auto& var : grouping.variables) max_node = std::max(max_node, var.node);
  std::vector<int> row(static_cast<std::size_t>(max_node) + 1, 0);
  std::vector<int> values(hist.nodes.size(), 0);
  std::vector<CellIndex> cells(grouping.variables.size());
  for (const auto& var : grouping.variables) {
    if (std::find(hist.nodes.begin(), hist.nodes.end(), var.node) == hist.nodes.end()) {
      throw std::invalid_argument("count_stats: grouping variable missing from histogram");
    }
  }
  for (Eigen::Index cell = 0; cell < hist.counts.size(); ++cell) {
    if (hist.counts[cell] != 0) {
      for (std::size_t i = 0; i < values.size(); ++i) row[hist.nodes[i]] = values[i];
      locate_cells(grouping, row, cells);
      for (std::size_t j = 0; j < cells.size(); ++j) out.joint[j](cells[j].group, cells[j].value) += hist.counts[cell];
    }
    for (std::size_t i = values.size(); i-- > 0;) {
      if (++values[i] < hist.cardinalities[i]) break;
      values[i] = 0;
    }
  }
  return out;
}

LogScore log_marginal(const CountTable& counts, const DirichletTable& prior) {
  if (counts.joint.size() != prior.size()) throw std::invalid_argument("log_marginal: shape mismatch");
  LogScore total = 0.0;
  for (std::size_t j = 0; j < prior.size(); ++j) {
    const auto& n = counts.joint[j];
    const auto& a = prior[j];
    if (n.rows() != a.rows() || n.cols() != a.cols()) throw std::invalid_argument("log_marginal: shape mismatch");
    for (Eigen::Index l = 0; l < a.rows(); ++l) {
      const std::int64_t parent_count = n.row(l).sum();
      if (parent_count == 0) continue;
      const double a_sum = a.row(l).sum();
      total += std::lgamma(a_sum) - std::lgamma(static_cast<double>(parent_count) + a_sum);
      for (Eigen::Index i = 0; i < a.cols(); ++i) {
        if (n(l, i) == 0) continue;
        total += std::lgamma(static_cast<double>(n(l, i)) + a(l, i)) - std::lgamma(a(l, i));
      }
    }
  }
  return total;
}

LogScore clique_marginal_likelihood(const CountTable& counts, const DirichletTable& alphas) {
  return log_marginal(counts, alphas);
}

DirichletTable updated_prior(const DirichletTable& alphas, const CountTable& train_counts) {
  if (train_counts.joint.size() != alphas.size()) throw std::invalid_argument("updated_prior: shape mismatch");
  DirichletTable beta = alphas;
  for (std::size_t j = 0; j < beta.size(); ++j) beta[j] += train_counts.joint[j].cast<double>();
  return beta;
}

LogScore posterior_predictive(const CountTable& test_counts, const CountTable& train_counts,
                              const DirichletTable& alphas) {
  return log_marginal(test_counts, updated_prior(alphas, train_counts));
}

Factorization Factorization::build(const StratifiedGraph& sg, const OutcomeSpace& space, const HyperParams& hp) {
  if (!is_decomposable(sg.graph)) throw UnsupportedModelError("graph is not decomposable");
  const JunctionTree tree = junction_tree(sg.graph);
  if (!is_decomposable_sg(sg, tree)) throw UnsupportedModelError("stratified graph is not decomposable");
  std::vector<std::vector<Node>> orderings;
  for (const auto& c : tree.cliques) orderings.push_back(clique_ordering(sg, c));
  return build(sg, space, hp, orderings);
}

Factorization Factorization::build(const StratifiedGraph& sg, const OutcomeSpace& space, const HyperParams& hp,
                                   const std::vector<std::vector<Node>>& clique_orderings) {
  hp.validate();
  if (space.size() != sg.node_count()) throw std::invalid_argument("outcome space size does not match graph");
  if (!is_decomposable(sg.graph)) throw UnsupportedModelError("graph is not decomposable");
  Factorization f;
  f.tree = junction_tree(sg.graph);
  if (!is_decomposable_sg(sg, f.tree)) throw UnsupportedModelError("stratified graph is not decomposable");
  if (clique_orderings.size() != f.tree.cliques.size()) throw std::invalid_argument("one ordering per clique required");
  validate_strata(sg, space);
  for (std::size_t c = 0; c < f.tree.cliques.size(); ++c) {
    FactorTerm term;
    term.grouping = parent_grouping(sg, f.tree.cliques[c], clique_orderings[c], space);
    term.alpha = derive_alpha(hp, term.grouping, space);
    f.cliques.push_back(std::move(term));
  }
  for (const auto& sep : f.tree.separators) {
    if (sep.empty()) continue;
    FactorTerm term;
    term.grouping = singleton_grouping(sep, space);
    term.alpha = derive_alpha(hp, term.grouping, space);
    f.separators.push_back(std::move(term));
  }
  return f;
}

LogScore graph_marginal_likelihood(const DataMatrix& data, const StratifiedGraph& sg, const HyperParams& hp) {
  if (data.cols() != sg.node_count()) throw std::invalid_argument("data column count does not match graph");
  return graph_marginal_likelihood(data, Factorization::build(sg, data.space, hp));
}

LogScore graph_marginal_likelihood(const DataMatrix& data, const Factorization& f) {
  LogScore total = 0.0;
  for (const auto& t : f.cliques) total += log_marginal(count_stats(data, t.grouping), t.alpha);
  for (const auto& t : f.separators) total -= log_marginal(count_stats(data, t.grouping), t.alpha);
  return total;
}

LogScore graph_marginal_likelihood(const DataMatrix& data, const Factorization& f, std::span<const int> rows) {
  LogScore total = 0.0;
  for (const auto& t : f.cliques) total += log_marginal(count_stats(data, t.grouping, rows), t.alpha);
  for (const auto& t : f.separators) total -= log_marginal(count_stats(data, t.grouping, rows), t.alpha);
  return total;
}

LogScore graph_posterior_predictive(const DataMatrix& test, const DataMatrix& train,
                                    const StratifiedGraph& sg, const HyperParams& hp) {
  const Factorization f = Factorization::build(sg, train.space, hp);
  LogScore total = 0.0;
  for (const auto& t : f.cliques) {
    total += posterior_predictive(count_stats(test, t.grouping), count_stats(train, t.grouping), t.alpha);
  }
  for (const auto& t : f.separators) {
    total -= posterior_predictive(count_stats(test, t.grouping), count_stats(train, t.grouping), t.alpha);
  }
  return total;
}

}  // namespace sgmc
