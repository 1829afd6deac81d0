#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgmc/classifier.hpp"
#include "sgmc/data.hpp"
#include "sgmc/scoring.hpp"
#include "sgmc/stratified.hpp"

namespace sgmc {

struct SearchConfig {
  int max_clique_size = 5;
  int restarts = 0;
  std::uint64_t seed = 0;
  bool stratum_search_enabled = true;
  // When false the graph stays empty (predictive naive Bayes).
  bool graph_search_enabled = true;
  HyperParams hp;

  void validate() const;
};

struct SearchStep {
  int iteration = 0;
  std::string move;
  LogScore score = 0.0;
};

struct LearnedModel {
  StratifiedGraph sg;
  LogScore train_log_score = 0.0;
  std::vector<SearchStep> search_trace;
};

/// Greedy hill-climbing over single edge additions and removals that keep the
/// graph chordal and within the clique cap. Each iteration takes the best
/// strictly improving move (ties to the smallest (u, v)). Restarts begin from
/// random chordal graphs; the best local optimum wins.
LearnedModel learn_graph(const DataMatrix& data, const SearchConfig& cfg);

/// Greedy search over stratum contexts on a fixed chordal graph: each move
/// adds or removes one context on an edge outside every separator, keeping
/// the stratified graph decomposable.
LearnedModel learn_strata(const DataMatrix& data, const UndirectedGraph& g, const SearchConfig& cfg);

// Disjoint column groups; searched independently, no edges between groups.
using FeaturePartition = std::vector<std::vector<int>>;

FeaturePartition contiguous_groups(int feature_count, int group_size);

// Graph and (optionally) strata learned on the rows given.
LearnedModel learn_structure(const DataMatrix& data, std::span<const int> rows, const SearchConfig& cfg,
                             const std::optional<FeaturePartition>& groups = std::nullopt);

struct ClassLearningResult {
  std::vector<ClassModel> models;
  std::vector<LearnedModel> learned;
};

// One model per class id 1..K. Throws std::invalid_argument for a class
// without training rows.
ClassLearningResult learn_class_models(const DataMatrix& training, const LabelVector& labels,
                                       const SearchConfig& cfg,
                                       const std::optional<FeaturePartition>& groups = std::nullopt);

}  // namespace sgmc
