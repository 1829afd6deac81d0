#include "sgmc/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "sgmc/errors.hpp"

namespace sgmc {

namespace {

std::span<const int> row_span(const DataMatrix& data, Eigen::Index r) {
  return {data.values.data() + r * data.cols(), static_cast<std::size_t>(data.cols())};
}

// Shared by the marginal lookup tables and the incremental simultaneous
// updates so both classifiers produce bit-identical row scores.
inline double log_ratio(double beta, double beta_sum, std::int64_t extra, std::int64_t extra_sum) {
  return std::log(beta + static_cast<double>(extra)) - std::log(beta_sum + static_cast<double>(extra_sum));
}

void check_models(const DataMatrix& test, std::span<const ClassModel> models) {
  if (models.empty()) throw std::invalid_argument("at least one class model is required");
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (models[k].class_id() != static_cast<int>(k) + 1) {
      throw std::invalid_argument("class models must be ordered by class id 1..K");
    }
    if (!(models[k].space() == test.space)) {
      throw DataValidationError("test data does not match the outcome space of class " + std::to_string(k + 1));
    }
  }
}

void check_labels(const LabelVector& labels, const DataMatrix& test, std::size_t classes) {
  if (labels.size() != static_cast<std::size_t>(test.rows())) {
    throw std::invalid_argument("label vector length does not match test rows");
  }
  for (int k : labels) {
    if (k < 1 || k > static_cast<int>(classes)) {
      throw std::invalid_argument("label " + std::to_string(k) + " out of range");
    }
  }
}

}  // namespace

ClassModel ClassModel::fit(int class_id, const StratifiedGraph& sg, const HyperParams& hp, const DataMatrix& data) {
  std::vector<int> rows(static_cast<std::size_t>(data.rows()));
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  return fit(class_id, sg, hp, data, rows);
}

ClassModel ClassModel::fit(int class_id, const StratifiedGraph& sg, const HyperParams& hp, const DataMatrix& data,
                           std::span<const int> rows) {
  if (data.cols() != sg.node_count()) throw std::invalid_argument("data column count does not match graph");
  const JunctionTree tree = junction_tree(sg.graph);
  std::vector<Histogram> hists;
  for (const auto& c : tree.cliques) hists.push_back(make_histogram(data, c, rows));
  return from_histograms(class_id, sg, data.space, hp, std::move(hists));
}

ClassModel ClassModel::from_histograms(int class_id, const StratifiedGraph& sg, const OutcomeSpace& space,
                                       const HyperParams& hp, std::vector<Histogram> clique_histograms) {
  ClassModel m;
  m.class_id_ = class_id;
  m.sg_ = sg;
  m.space_ = space;
  m.hp_ = hp;
  m.factorization_ = Factorization::build(sg, space, hp);
  const auto& cliques = m.factorization_.tree.cliques;
  if (clique_histograms.size() != cliques.size()) {
    throw DataValidationError("expected " + std::to_string(cliques.size()) + " clique histograms");
  }
  for (std::size_t c = 0; c < cliques.size(); ++c) {
    const auto& h = clique_histograms[c];
    if (h.nodes != cliques[c] || h.counts.size() != space.outcome_count(cliques[c])) {
      throw DataValidationError("clique histogram " + std::to_string(c + 1) + " does not match its clique");
    }
    if ((h.counts < 0).any()) throw DataValidationError("negative training count");
  }
  m.histograms_ = std::move(clique_histograms);
  m.training_rows_ = m.histograms_.empty() ? 0 : m.histograms_.front().total();
  for (const auto& h : m.histograms_) {
    if (h.total() != m.training_rows_) throw DataValidationError("clique histograms disagree on row count");
  }
  m.refresh();
  return m;
}

void ClassModel::refresh() {
  const auto& f = factorization_;
  clique_counts_.clear();
  separator_counts_.clear();
  for (std::size_t c = 0; c < f.cliques.size(); ++c) {
    clique_counts_.push_back(count_stats(histograms_[c], f.cliques[c].grouping));
  }
  // Each separator is contained in the child clique it was derived from.
  std::size_t s = 0;
  for (std::size_t i = 0; i < f.tree.separators.size(); ++i) {
    if (f.tree.separators[i].empty()) continue;
    const auto marg = marginalize(histograms_[i + 1], f.tree.separators[i]);
    separator_counts_.push_back(count_stats(marg, f.separators[s].grouping));
    ++s;
  }

  beta_.clear();
  beta_sum_.clear();
  log_pred_.clear();
  sign_.clear();
  auto push_term = [&](const FactorTerm& term, const CountTable& counts, int sign) {
    const auto beta = updated_prior(term.alpha, counts);
    for (const auto& b : beta) {
      Eigen::ArrayXd sum = b.rowwise().sum();
      Eigen::ArrayXXd lp(b.rows(), b.cols());
      for (Eigen::Index l = 0; l < b.rows(); ++l) {
        for (Eigen::Index i = 0; i < b.cols(); ++i) lp(l, i) = log_ratio(b(l, i), sum(l), 0, 0);
      }
      beta_.push_back(b);
      beta_sum_.push_back(std::move(sum));
      log_pred_.push_back(std::move(lp));
      sign_.push_back(sign);
    }
  };
  for (std::size_t c = 0; c < f.cliques.size(); ++c) push_term(f.cliques[c], clique_counts_[c], +1);
  for (std::size_t t = 0; t < f.separators.size(); ++t) push_term(f.separators[t], separator_counts_[t], -1);
  term_vars_ = beta_.size();
}

void ClassModel::update_training(std::span<const int> row, std::int64_t weight) {
  for (auto& h : histograms_) {
    std::int64_t cell = 0;
    for (std::size_t i = 0; i < h.nodes.size(); ++i) {
      const int v = row[h.nodes[i]];
      if (v < 0 || v >= h.cardinalities[i]) throw DataValidationError("value outside cardinality");
      cell = cell * h.cardinalities[i] + v;
    }
    if (h.counts[cell] + weight < 0) throw DataValidationError("removing an observation not in the training data");
  }
  for (auto& h : histograms_) {
    std::int64_t cell = 0;
    for (std::size_t i = 0; i < h.nodes.size(); ++i) cell = cell * h.cardinalities[i] + row[h.nodes[i]];
    h.counts[cell] += weight;
  }
  training_rows_ += weight;
  refresh();
}

void ClassModel::locate(std::span<const int> row, std::span<CellIndex> out) const {
  std::size_t offset = 0;
  for (const auto& t : factorization_.cliques) {
    locate_cells(t.grouping, row, out.subspan(offset, t.grouping.variables.size()));
    offset += t.grouping.variables.size();
  }
  for (const auto& t : factorization_.separators) {
    locate_cells(t.grouping, row, out.subspan(offset, t.grouping.variables.size()));
    offset += t.grouping.variables.size();
  }
}

LogScore ClassModel::row_log_predictive(std::span<const int> row) const {
  std::vector<CellIndex> cells(term_vars_);
  locate(row, cells);
  LogScore total = 0.0;
  for (std::size_t v = 0; v < term_vars_; ++v) total += sign_[v] * log_pred_[v](cells[v].group, cells[v].value);
  return total;
}

LogScore ClassModel::log_predictive(const DataMatrix& test, std::span<const int> rows) const {
  const auto& f = factorization_;
  LogScore total = 0.0;
  for (std::size_t c = 0; c < f.cliques.size(); ++c) {
    total += posterior_predictive(count_stats(test, f.cliques[c].grouping, rows), clique_counts_[c], f.cliques[c].alpha);
  }
  for (std::size_t s = 0; s < f.separators.size(); ++s) {
    total -= posterior_predictive(count_stats(test, f.separators[s].grouping, rows), separator_counts_[s],
                                  f.separators[s].alpha);
  }
  return total;
}

namespace {

/// Test rows currently assigned to each class, as counts per term variable.
class AssignmentState {
 public:
  AssignmentState(const DataMatrix& test, std::span<const ClassModel> models) : models_(models) {
    const auto n = static_cast<std::size_t>(test.rows());
    cells_.resize(models.size());
    counts_.resize(models.size());
    sums_.resize(models.size());
    for (std::size_t k = 0; k < models.size(); ++k) {
      const auto& m = models[k];
      const std::size_t vars = m.term_variable_count();
      cells_[k].resize(n * vars);
      for (std::size_t r = 0; r < n; ++r) {
        m.locate(row_span(test, static_cast<Eigen::Index>(r)), std::span<CellIndex>(cells_[k].data() + r * vars, vars));
      }
      for (std::size_t v = 0; v < vars; ++v) {
        counts_[k].push_back(CountArray::Zero(m.beta()[v].rows(), m.beta()[v].cols()));
        sums_[k].push_back(Eigen::Array<std::int64_t, Eigen::Dynamic, 1>::Zero(m.beta()[v].rows()));
      }
    }
  }

  void move(std::size_t row, int klass, std::int64_t delta) {
    const auto k = static_cast<std::size_t>(klass - 1);
    const std::size_t vars = models_[k].term_variable_count();
    const CellIndex* cells = cells_[k].data() + row * vars;
    for (std::size_t v = 0; v < vars; ++v) {
      counts_[k][v](cells[v].group, cells[v].value) += delta;
      sums_[k][v](cells[v].group) += delta;
    }
  }

  // log P(row | class training rows and the other test rows assigned to it).
  LogScore predictive(std::size_t row, int klass, bool row_is_assigned_here) const {
    const auto k = static_cast<std::size_t>(klass - 1);
    const auto& m = models_[k];
    const std::size_t vars = m.term_variable_count();
    const CellIndex* cells = cells_[k].data() + row * vars;
    const std::int64_t self = row_is_assigned_here ? 1 : 0;
    LogScore total = 0.0;
    for (std::size_t v = 0; v < vars; ++v) {
      const auto [g, i] = cells[v];
      total += m.term_sign()[v] * log_ratio(m.beta()[v](g, i), m.beta_sum()[v](g), counts_[k][v](g, i) - self,
                                            sums_[k][v](g) - self);
    }
    return total;
  }

 private:
  std::span<const ClassModel> models_;
  std::vector<std::vector<CellIndex>> cells_;
  std::vector<std::vector<CountArray>> counts_;
  std::vector<std::vector<Eigen::Array<std::int64_t, Eigen::Dynamic, 1>>> sums_;
};

}  // namespace

LogScore marginal_score(const LabelVector& labels, const DataMatrix& test, std::span<const ClassModel> models) {
  LogScore total = 0.0;
  for (LogScore t : marginal_row_terms(labels, test, models)) total += t;
  return total;
}

std::vector<LogScore> marginal_row_terms(const LabelVector& labels, const DataMatrix& test,
                                         std::span<const ClassModel> models) {
  check_models(test, models);
  check_labels(labels, test, models.size());
  std::vector<LogScore> out(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out[r] = models[labels[r] - 1].row_log_predictive(row_span(test, static_cast<Eigen::Index>(r)));
  }
  return out;
}

std::vector<LogScore> simultaneous_row_terms(const LabelVector& labels, const DataMatrix& test,
                                             std::span<const ClassModel> models) {
  check_models(test, models);
  check_labels(labels, test, models.size());
  AssignmentState state(test, models);
  std::vector<LogScore> out(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    out[r] = state.predictive(r, labels[r], false);
    state.move(r, labels[r], +1);
  }
  return out;
}

LogScore simultaneous_score(const LabelVector& labels, const DataMatrix& test, std::span<const ClassModel> models) {
  LogScore total = 0.0;
  for (LogScore t : simultaneous_row_terms(labels, test, models)) total += t;
  return total;
}

ClassificationResult classify_marginal(const DataMatrix& test, std::span<const ClassModel> models) {
  check_models(test, models);
  const auto n = test.rows();
  const auto classes = static_cast<Eigen::Index>(models.size());
  ClassificationResult out;
  out.labels.assign(static_cast<std::size_t>(n), 1);
  out.log_posteriors.resize(n, classes);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto row = row_span(test, r);
    Eigen::VectorXd scores(classes);
    int best = 0;
    for (Eigen::Index k = 0; k < classes; ++k) {
      scores(k) = models[k].row_log_predictive(row);
      if (scores(k) > scores(best)) best = static_cast<int>(k);
    }
    out.labels[r] = best + 1;
    out.log_score += scores(best);
    const double log_norm = scores(best) + std::log((scores.array() - scores(best)).exp().sum());
    out.log_posteriors.row(r) = (scores.array() - log_norm).matrix().transpose();
  }
  out.iterations = 1;
  out.score_trace.push_back(out.log_score);
  return out;
}


ClassificationResult classify_simultaneous(const DataMatrix& test, std::span<const ClassModel> models,
                                           const SimultaneousInit& init, std::uint64_t seed) {
  check_models(test, models);
  const auto n = static_cast<std::size_t>(test.rows());
  const int classes = static_cast<int>(models.size());

  LabelVector labels;
  switch (init.kind) {
    case InitKind::Marginal:
      labels = classify_marginal(test, models).labels;
      break;
    case InitKind::Random: {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> pick(1, classes);
      labels.resize(n);
      for (auto& k : labels) k = pick(rng);
      break;
    }
    case InitKind::Given:
      check_labels(init.labels, test, models.size());
      labels = init.labels;
      break;
  }

  AssignmentState state(test, models);
  for (std::size_t r = 0; r < n; ++r) state.move(r, labels[r], +1);

  ClassificationResult out;
  LogScore score = n == 0 ? 0.0 : simultaneous_score(labels, test, models);
  out.score_trace.push_back(score);
  constexpr double kMinGain = 1e-10;
  bool changed = true;
  while (changed) {
    if (out.iterations >= kMaxSweeps) {
      throw std::runtime_error("simultaneous classifier did not converge within " + std::to_string(kMaxSweeps) +
                               " sweeps");
    }
    changed = false;
    ++out.iterations;
    for (std::size_t r = 0; r < n; ++r) {
      const int current = labels[r];
      const LogScore stay = state.predictive(r, current, true);
      int best = 0;
      LogScore best_score = 0.0;
      for (int k = 1; k <= classes; ++k) {
        const LogScore s = k == current ? stay : state.predictive(r, k, false);
        if (best == 0 || s > best_score) {
          best = k;
          best_score = s;
        }
      }
      if (best != current && best_score > stay + kMinGain) {
        state.move(r, current, -1);
        state.move(r, best, +1);
        labels[r] = best;
        score += best_score - stay;
        out.score_trace.push_back(score);
        changed = true;
      }
    }
  }
  out.labels = std::move(labels);
  out.log_score = n == 0 ? 0.0 : simultaneous_score(out.labels, test, models);
  return out;
}

Eigen::MatrixXi confusion_matrix(const LabelVector& truth, const LabelVector& assigned, int classes) {
  if (truth.size() != assigned.size()) throw std::invalid_argument("confusion_matrix: length mismatch");
  Eigen::MatrixXi out = Eigen::MatrixXi::Zero(classes, classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 1 || truth[i] > classes || assigned[i] < 1 || assigned[i] > classes) {
      throw std::invalid_argument("confusion_matrix: label out of range");
    }
    ++out(truth[i] - 1, assigned[i] - 1);
  }
  return out;
}

double success_rate(const LabelVector& truth, const LabelVector& assigned) {
  if (truth.size() != assigned.size()) throw std::invalid_argument("success_rate: length mismatch");
  if (truth.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == assigned[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace sgmc
