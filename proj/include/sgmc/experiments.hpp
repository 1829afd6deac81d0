#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sgmc/classifier.hpp"
#include "sgmc/data.hpp"
#include "sgmc/generator.hpp"
#include "sgmc/learning.hpp"

namespace sgmc {

enum class Structure { NaiveBayes, GM, SGM };
enum class StructureSource { Known, Learned };
enum class Mode { Marginal, Simultaneous };

// Written as e.g. "sgm-known-simultaneous" or "naive-bayes-marginal".
struct ClassifierSpec {
  Structure structure = Structure::SGM;
  StructureSource source = StructureSource::Known;
  Mode mode = Mode::Marginal;

  std::string name() const;
  static ClassifierSpec parse(const std::string& text);

  bool operator==(const ClassifierSpec& other) const = default;
};

enum class SweepVariable { TrainRows, TestRows };

struct ExperimentPlan {
  // Known: the generating structures are handed to the classifiers.
  // Learned: structures are searched from the training data.
  StructureSource mode = StructureSource::Known;
  std::vector<ClassifierSpec> classifiers;
  SweepVariable sweep = SweepVariable::TrainRows;
  std::vector<int> sweep_values;
  // Rows per class of the dimension that is not swept.
  int fixed_rows = 20;
  int replicates = 50;
  std::uint64_t seed = 0;
  int components = 4;
  double concentration = 1.0;
  std::vector<StratifiedGraph> class_structures;
  SearchConfig search;
  int threads = 0;

  void validate() const;
};

// The six curves of a fixed-structure run, or the learned/known marginal set.
std::vector<ClassifierSpec> default_classifiers(StructureSource mode);

struct ReplicateResult {
  std::string classifier;
  int sweep_value = 0;
  int replicate = 0;
  double success = 0.0;
  LabelVector truth;
  LabelVector assigned;
};

struct SweepPoint {
  std::string classifier;
  int sweep_value = 0;
  double mean = 0.0;
  double standard_error = 0.0;
  int replicates = 0;
};

struct SweepReport {
  std::vector<SweepPoint> points;
  std::vector<ReplicateResult> replicates;

  const SweepPoint& at(const std::string& classifier, int sweep_value) const;
};

SweepReport run_sweep(const ExperimentPlan& plan);
SweepReport aggregate(std::vector<ReplicateResult> results);

// Per-class models of the requested structure. `known` holds the true class
// structures; learned structures come from `train`.
std::vector<ClassModel> build_models(const ClassifierSpec& spec, const std::vector<StratifiedGraph>& known,
                                     const DataMatrix& train, const LabelVector& labels, const SearchConfig& search);

LabelVector run_classifier(Mode mode, const DataMatrix& test, const std::vector<ClassModel>& models);

enum class ConvergeGenerator { Synthetic, Table3, Independent };

struct ConvergePlan {
  ConvergeGenerator generator = ConvergeGenerator::Synthetic;
  // Training rows per class, strictly increasing.
  std::vector<int> m_values{100, 1000, 10000};
  int seeds = 50;
  std::uint64_t seed = 0;
  int components = 4;
  int test_per_class = 20;
  double concentration = 1.0;
  HyperParams hp;
  int threads = 0;

  void validate() const;
};

struct ConvergeRow {
  int seed_index = 0;
  int m = 0;
  // Per observation |log P_sim - log P_mar| at the true labels.
  double theorem1_gap = 0.0;
  // Per observation |log P_SGM - log P_GM| (simultaneous score, true labels).
  double theorem2_gap = 0.0;
};

struct ConvergeSummary {
  // Fraction of seeds whose gap decreases strictly over every m step.
  double theorem1_decreasing = 0.0;
  double theorem2_decreasing = 0.0;
  // Means over seeds at the first and last m.
  double theorem1_initial = 0.0;
  double theorem1_final = 0.0;
  double theorem2_initial = 0.0;
  double theorem2_final = 0.0;
};

struct ConvergeReport {
  std::vector<ConvergeRow> rows;
  ConvergeSummary summary;
};

ConvergeReport run_converge(const ConvergePlan& plan);

struct GroupsPlan {
  int group_size = 100;
  int test_per_class = 10;
  std::uint64_t seed = 0;
  SearchConfig search;
  std::vector<ClassifierSpec> classifiers;
  int threads = 0;
};

struct GroupResult {
  int group = 0;
  int first_feature = 0;
  int feature_count = 0;
  std::string classifier;
  double success = 0.0;
};

struct GroupsReport {
  std::vector<GroupResult> groups;
  // Mean over groups, per classifier in plan order.
  std::vector<std::pair<std::string, double>> means;
};

// Random per-class split of `test_per_class` rows, then per feature group
// learn-and-classify with every classifier.
GroupsReport run_groups(const DataMatrix& data, const LabelVector& labels, const GroupsPlan& plan);

// Each labeled row is classified with its own observation removed from the
// training counts of its class; structures stay fixed.
LabelVector leave_one_out(const DataMatrix& data, const LabelVector& labels, std::vector<ClassModel> models);

}  // namespace sgmc
