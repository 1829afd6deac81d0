#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sgmc/data.hpp"
#include "sgmc/stratified.hpp"

namespace sgmc {

/// P(node | parents), one row per parent outcome (mixed radix over
/// `parents`, first most significant).
struct ConditionalTable {
  Node node = 0;
  std::vector<Node> parents;
  Eigen::ArrayXXd probabilities;

  bool operator==(const ConditionalTable& other) const {
    return node == other.node && parents == other.parents &&
           probabilities.rows() == other.probabilities.rows() &&
           probabilities.cols() == other.probabilities.cols() && (probabilities == other.probabilities).all();
  }
};

/// Conditional of a clique's residual variables given its separator, as a
/// chain: each variable is conditioned on the separator and the residual
/// variables before it.
struct CliqueConditional {
  NodeSet clique;
  NodeSet separator;
  std::vector<ConditionalTable> variables;

  bool operator==(const CliqueConditional& other) const = default;
};

/// Joint distribution factorized along a junction tree of `sg.graph`. The
/// cliques are stored in sampling order (every separator is sampled before
/// the clique that conditions on it).
struct GeneratingModel {
  StratifiedGraph sg;
  OutcomeSpace space;
  std::vector<CliqueConditional> cliques;

  // Row sums, shapes, coverage and stratum honesty. Throws
  // DataValidationError on the first violation.
  void validate() const;

  bool operator==(const GeneratingModel& other) const = default;
};

// Junction tree the generator uses for `sg`: every stratified clique's last
// variable must be residual (not in the clique's parent separator), so the
// default tree is rerooted when needed. Throws UnsupportedModelError when no
// root works.
struct GeneratorLayout {
  JunctionTree tree;
  // Per clique: separator nodes first, then residual nodes, stratified node last.
  std::vector<std::vector<Node>> orderings;
};
GeneratorLayout generator_layout(const StratifiedGraph& sg);

// Conditionals drawn from a symmetric Dirichlet; the stratified variable gets
// one shared distribution per merged parent group.
GeneratingModel random_generating_model(const StratifiedGraph& sg, const OutcomeSpace& space, std::uint64_t seed,
                                        double concentration = 1.0);

DataMatrix sample(const GeneratingModel& gm, int n, std::uint64_t seed);

// Exact probability of a full observation.
double probability(const GeneratingModel& gm, std::span<const int> row);

// Exact joint distribution over `nodes` (table indexed mixed radix, first node
// most significant). Enumerates every outcome of the model, so keep it small.
Eigen::ArrayXd marginal_distribution(const GeneratingModel& gm, const std::vector<Node>& nodes);

// Block-diagonal copies of a component graph, component c occupying nodes
// c*n .. c*n+n-1.
StratifiedGraph replicate(const StratifiedGraph& component, int components);

struct SyntheticSpec {
  // One stratified graph over a five-variable chain component per class.
  std::vector<StratifiedGraph> class_structures;
  int components = 4;
  std::uint64_t seed = 0;
  double concentration = 1.0;

  void validate() const;
  int feature_count() const { return 5 * components; }
};

struct LabeledData {
  DataMatrix data;
  LabelVector labels;
};

// Per class, one random five-variable generating model shared by every component.
std::vector<GeneratingModel> draw_class_models(const SyntheticSpec& spec);

// rows_per_class rows for each class, grouped by class in id order. Each
// component is sampled independently from the class's component model.
LabeledData sample_synthetic(const std::vector<GeneratingModel>& class_models, int components, int rows_per_class,
                             std::uint64_t seed);

LabeledData build_synthetic(const SyntheticSpec& spec, int rows_per_class);

}  // namespace sgmc
