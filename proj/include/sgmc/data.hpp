#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgmc/stratified.hpp"

namespace sgmc {

using CategoryMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Class ids are 1-based.
using LabelVector = std::vector<int>;

/// Rows are observations, columns are variables; every entry is a category
/// index below its column's cardinality.
struct DataMatrix {
  CategoryMatrix values;
  std::vector<std::string> names;
  OutcomeSpace space;

  DataMatrix() = default;
  DataMatrix(CategoryMatrix v, OutcomeSpace s);
  DataMatrix(CategoryMatrix v, std::vector<std::string> n, OutcomeSpace s);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  // Throws DataValidationError on shape or range violations.
  void validate() const;

  bool operator==(const DataMatrix& other) const {
    return values == other.values && names == other.names && space == other.space;
  }
};

std::vector<std::string> default_names(int count);

DataMatrix select_rows(const DataMatrix& data, std::span<const int> rows);
DataMatrix select_columns(const DataMatrix& data, std::span<const int> columns);
DataMatrix concat_rows(const DataMatrix& top, const DataMatrix& bottom);

// Row indices carrying each class id, indexed by id - 1.
std::vector<std::vector<int>> rows_by_class(const LabelVector& labels, int classes);
int class_count(const LabelVector& labels);

/// Joint counts over `nodes` (in the order given), cells indexed mixed-radix
/// with the first node most significant.
struct Histogram {
  std::vector<Node> nodes;
  std::vector<int> cardinalities;
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> counts;

  std::int64_t total() const { return counts.sum(); }
  bool operator==(const Histogram& other) const {
    return nodes == other.nodes && cardinalities == other.cardinalities &&
           counts.size() == other.counts.size() && (counts == other.counts).all();
  }
};

Histogram make_histogram(const DataMatrix& data, const std::vector<Node>& nodes);
Histogram make_histogram(const DataMatrix& data, const std::vector<Node>& nodes,
                         std::span<const int> rows);
// Sums a histogram down to a subset of its nodes, in the subset's order.
Histogram marginalize(const Histogram& hist, const std::vector<Node>& nodes);

}  // namespace sgmc
