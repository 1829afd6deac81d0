#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sgmc/data.hpp"
#include "sgmc/scoring.hpp"
#include "sgmc/stratified.hpp"

namespace sgmc {

/// Per-class stratified graph together with the sufficient statistics of the
/// class's training rows. Training data is kept as one joint histogram per
/// clique; every count table (cliques and separators) is derived from those.
class ClassModel {
 public:
  ClassModel() = default;

  static ClassModel fit(int class_id, const StratifiedGraph& sg, const HyperParams& hp, const DataMatrix& data);
  static ClassModel fit(int class_id, const StratifiedGraph& sg, const HyperParams& hp, const DataMatrix& data,
                        std::span<const int> rows);
  // `clique_histograms[c]` must range over the c-th junction-tree clique in
  // ascending node order.
  static ClassModel from_histograms(int class_id, const StratifiedGraph& sg, const OutcomeSpace& space,
                                    const HyperParams& hp, std::vector<Histogram> clique_histograms);

  int class_id() const { return class_id_; }
  void set_class_id(int id) { class_id_ = id; }
  const StratifiedGraph& graph() const { return sg_; }
  const OutcomeSpace& space() const { return space_; }
  const HyperParams& hyper_params() const { return hp_; }
  const Factorization& factorization() const { return factorization_; }
  const std::vector<Histogram>& clique_histograms() const { return histograms_; }
  const std::vector<CountTable>& clique_counts() const { return clique_counts_; }
  const std::vector<CountTable>& separator_counts() const { return separator_counts_; }
  std::int64_t training_rows() const { return training_rows_; }

  // Adds (weight > 0) or removes (weight < 0) one training observation.
  void update_training(std::span<const int> row, std::int64_t weight);

  // log P(row | training data of this class).
  LogScore row_log_predictive(std::span<const int> row) const;
  // Joint posterior predictive of the given test rows.
  LogScore log_predictive(const DataMatrix& test, std::span<const int> rows) const;

  // Total number of ordered variables over all cliques and separators.
  std::size_t term_variable_count() const { return term_vars_; }

  // beta and its per-group sums for each term variable, cliques first.
  const std::vector<Eigen::ArrayXXd>& beta() const { return beta_; }
  const std::vector<Eigen::ArrayXd>& beta_sum() const { return beta_sum_; }
  // +1 for clique variables, -1 for separator variables.
  const std::vector<int>& term_sign() const { return sign_; }
  // Cells of `row` for every term variable, cliques first.
  void locate(std::span<const int> row, std::span<CellIndex> out) const;

 private:
  void refresh();

  int class_id_ = 1;
  StratifiedGraph sg_;
  OutcomeSpace space_;
  HyperParams hp_;
  Factorization factorization_;
  std::vector<Histogram> histograms_;
  std::vector<CountTable> clique_counts_;
  std::vector<CountTable> separator_counts_;
  std::int64_t training_rows_ = 0;

  std::size_t term_vars_ = 0;
  std::vector<Eigen::ArrayXXd> beta_;
  std::vector<Eigen::ArrayXd> beta_sum_;
  std::vector<Eigen::ArrayXXd> log_pred_;
  std::vector<int> sign_;
};

struct ClassificationResult {
  LabelVector labels;
  LogScore log_score = 0.0;
  // n x K row-normalized log posteriors (marginal mode only).
  Eigen::MatrixXd log_posteriors;
  // Full sweeps performed (simultaneous mode).
  int iterations = 0;
  // Score after the initial labeling and after every accepted change.
  std::vector<LogScore> score_trace;
};

LogScore marginal_score(const LabelVector& labels, const DataMatrix& test, std::span<const ClassModel> models);
LogScore simultaneous_score(const LabelVector& labels, const DataMatrix& test, std::span<const ClassModel> models);

// Per-row terms of the two scores. Simultaneous terms follow the chain rule in
// row order: each row given the training data and the earlier rows of its class.
std::vector<LogScore> marginal_row_terms(const LabelVector& labels, const DataMatrix& test,
                                         std::span<const ClassModel> models);
std::vector<LogScore> simultaneous_row_terms(const LabelVector& labels, const DataMatrix& test,
                                             std::span<const ClassModel> models);

// Per-row argmax of the predictive score; ties go to the smallest class id.
ClassificationResult classify_marginal(const DataMatrix& test, std::span<const ClassModel> models);

enum class InitKind { Marginal, Random, Given };

struct SimultaneousInit {
  InitKind kind = InitKind::Marginal;
  LabelVector labels;  // used when kind == Given
};

inline constexpr int kMaxSweeps = 1000;

/// Coordinate ascent on the simultaneous score: each row in turn moves to the
/// class maximizing the score with all other labels fixed, only on strict
/// improvement. Stops after a sweep without changes.
ClassificationResult classify_simultaneous(const DataMatrix& test, std::span<const ClassModel> models,
                                           const SimultaneousInit& init = {}, std::uint64_t seed = 0);

// Table-2 orientation: rows are true classes, columns assigned classes.
Eigen::MatrixXi confusion_matrix(const LabelVector& truth, const LabelVector& assigned, int classes);
double success_rate(const LabelVector& truth, const LabelVector& assigned);

}  // namespace sgmc
