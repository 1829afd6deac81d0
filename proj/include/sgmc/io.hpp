#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sgmc/classifier.hpp"
#include "sgmc/data.hpp"
#include "sgmc/generator.hpp"
#include "sgmc/learning.hpp"
#include "sgmc/scoring.hpp"
#include "sgmc/stratified.hpp"

namespace sgmc {

// CSV dataset: optional "#cardinalities:" comment, a header row, one row per
// observation and an optional trailing `class` column of 1-based labels.
struct Dataset {
  DataMatrix data;
  std::optional<LabelVector> labels;

  bool operator==(const Dataset& other) const = default;
};

Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const DataMatrix& data, const LabelVector* labels = nullptr);
void save_dataset(const std::filesystem::path& path, const DataMatrix& data, const LabelVector* labels = nullptr);

/// Contents of a model file. `counts` holds one training histogram per
/// junction-tree clique when the file describes a fitted class model;
/// `tables` holds generating-model conditionals.
struct ModelFile {
  std::vector<std::string> names;
  StratifiedGraph sg;
  OutcomeSpace space;
  HyperParams hp;
  std::optional<int> class_id;
  std::vector<Histogram> counts;
  std::vector<CliqueConditional> tables;

  bool operator==(const ModelFile& other) const = default;
};

ModelFile parse_model(const std::string& text);
std::string format_model(const ModelFile& model);
ModelFile load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const ModelFile& model);

ModelFile to_model_file(const ClassModel& model, const std::vector<std::string>& names);
ModelFile to_model_file(const GeneratingModel& model, const std::vector<std::string>& names);
ModelFile to_model_file(const StratifiedGraph& sg, const OutcomeSpace& space, const HyperParams& hp,
                        const std::vector<std::string>& names);
// Requires `counts`; a file without them yields a model with no training data.
ClassModel to_class_model(const ModelFile& file);
// Requires `tables`.
GeneratingModel to_generating_model(const ModelFile& file);

// Search traces as CSV: iteration,move,log_score.
void write_trace(std::ostream& out, const std::vector<SearchStep>& trace);

}  // namespace sgmc
