#include "sgmc/data.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "sgmc/errors.hpp"

namespace sgmc {

DataMatrix::DataMatrix(CategoryMatrix v, OutcomeSpace s)
    : values(std::move(v)), names(default_names(static_cast<int>(values.cols()))), space(std::move(s)) {
  validate();
}

DataMatrix::DataMatrix(CategoryMatrix v, std::vector<std::string> n, OutcomeSpace s)
    : values(std::move(v)), names(std::move(n)), space(std::move(s)) {
  validate();
}

void DataMatrix::validate() const {
  if (space.size() != values.cols()) {
    throw DataValidationError("data has " + std::to_string(values.cols()) + " columns but " +
                              std::to_string(space.size()) + " cardinalities");
  }
  if (static_cast<Eigen::Index>(names.size()) != values.cols()) {
    throw DataValidationError("column name count does not match column count");
  }
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    if (space.cardinalities[c] < 1) throw DataValidationError("cardinality must be positive");
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
      const int v = values(r, c);
      if (v < 0 || v >= space.cardinalities[c]) {
        throw DataValidationError("row " + std::to_string(r + 1) + ", column " + names[c] +
                                  ": value " + std::to_string(v) + " outside cardinality " +
                                  std::to_string(space.cardinalities[c]));
      }
    }
  }
}

std::vector<std::string> default_names(int count) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) out.push_back("X" + std::to_string(i + 1));
  return out;
}

DataMatrix select_rows(const DataMatrix& data, std::span<const int> rows) {
  DataMatrix out;
  out.names = data.names;
  out.space = data.space;
  out.values.resize(static_cast<Eigen::Index>(rows.size()), data.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.values.row(i) = data.values.row(rows[i]);
  return out;
}

DataMatrix select_columns(const DataMatrix& data, std::span<const int> columns) {
  DataMatrix out;
  out.values.resize(data.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.values.col(j) = data.values.col(columns[j]);
    out.names.push_back(data.names.at(columns[j]));
    out.space.cardinalities.push_back(data.space.cardinality(columns[j]));
  }
  return out;
}

DataMatrix concat_rows(const DataMatrix& top, const DataMatrix& bottom) {
  if (top.cols() != bottom.cols() || !(top.space == bottom.space)) {
    throw DataValidationError("concat_rows: incompatible data matrices");
  }
  DataMatrix out;
  out.names = top.names;
  out.space = top.space;
  out.values.resize(top.rows() + bottom.rows(), top.cols());
  out.values.topRows(top.rows()) = top.values;
  out.values.bottomRows(bottom.rows()) = bottom.values;
  return out;
}

std::vector<std::vector<int>> rows_by_class(const LabelVector& labels, int classes) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(classes));
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int k = labels[r];
    if (k < 1 || k > classes) {
      throw std::invalid_argument("label " + std::to_string(k) + " outside 1.." + std::to_string(classes));
    }
    out[k - 1].push_back(static_cast<int>(r));
  }
  return out;
}

int class_count(const LabelVector& labels) {
  return labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
}

namespace {

Histogram empty_histogram(const DataMatrix& data, const std::vector<Node>& nodes) {
  Histogram h;
  h.nodes = nodes;
  std::int64_t cells = 1;
  for (Node v : nodes) {
    if (v < 0 || v >= data.cols()) throw std::invalid_argument("histogram node out of range");
    h.cardinalities.push_back(data.space.cardinality(v));
    cells *= data.space.cardinality(v);
  }
  h.counts = Eigen::Array<std::int64_t, Eigen::Dynamic, 1>::Zero(cells);
  return h;
}

void add_row(Histogram& h, const DataMatrix& data, Eigen::Index r) {
  std::int64_t cell = 0;
  for (std::size_t i = 0; i < h.nodes.size(); ++i) {
    const int v = data.values(r, h.nodes[i]);
    if (v < 0 || v >= h.cardinalities[i]) {
      throw DataValidationError("row " + std::to_string(r + 1) + ", column " +
                                std::to_string(h.nodes[i] + 1) + ": value " + std::to_string(v) +
                                " outside cardinality " + std::to_string(h.cardinalities[i]));
    }
    cell = cell * h.cardinalities[i] + v;
  }
  ++h.counts[cell];
}

}  // namespace

Histogram make_histogram(const DataMatrix& data, const std::vector<Node>& nodes) {
  Histogram h = empty_histogram(data, nodes);
  for (Eigen::Index r = 0; r < data.rows(); ++r) add_row(h, data, r);
  return h;
}

Histogram make_histogram(const DataMatrix& data, const std::vector<Node>& nodes,
                         std::span<const int> rows) {
  Histogram h = empty_histogram(data, nodes);
  for (int r : rows) add_row(h, data, r);
  return h;
}

Histogram marginalize(const Histogram& hist, const std::vector<Node>& nodes) {
  Histogram out;
  out.nodes = nodes;
  std::vector<std::size_t> source;
  std::int64_t cells = 1;
  for (Node v : nodes) {
    auto it = std::find(hist.nodes.begin(), hist.nodes.end(), v);
    if (it == hist.nodes.end()) throw std::invalid_argument("marginalize: node not in histogram");
    source.push_back(static_cast<std::size_t>(it - hist.nodes.begin()));
    out.cardinalities.push_back(hist.cardinalities[source.back()]);
    cells *= out.cardinalities.back();
  }
  out.counts = Eigen::Array<std::int64_t, Eigen::Dynamic, 1>::Zero(cells);
  std::vector<int> values(hist.nodes.size(), 0);
  for (Eigen::Index cell = 0; cell < hist.counts.size(); ++cell) {
    if (hist.counts[cell] != 0) {
      std::int64_t target = 0;
      for (std::size_t i = 0; i < source.size(); ++i) {
        target = target * out.cardinalities[i] + values[source[i]];
      }
      out.counts[target] += hist.counts[cell];
    }
    for (std::size_t i = values.size(); i-- > 0;) {
      if (++values[i] < hist.cardinalities[i]) break;
      values[i] = 0;
    }
  }
  return out;
}

}  // namespace sgmc
