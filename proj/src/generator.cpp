#include "sgmc/generator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "sgmc/errors.hpp"
#include "sgmc/seeding.hpp"

namespace sgmc {

namespace {

std::int64_t parent_index(const std::vector<Node>& parents, const OutcomeSpace& space, std::span<const int> row) {
  std::int64_t p = 0;
  for (Node v : parents) p = p * space.cardinality(v) + row[v];
  return p;
}

NodeSet stratified_common_nodes(const StratifiedGraph& sg, const NodeSet& clique, bool& any) {
  NodeSet common;
  any = false;
  for (const auto& [e, ctx] : sg.strata) {
    if (ctx.empty() || !contains(clique, e.first) || !contains(clique, e.second)) continue;
    NodeSet ends{e.first, e.second};
    common = any ? set_intersection(common, ends) : ends;
    any = true;
  }
  return common;
}

std::optional<GeneratorLayout> try_layout(const StratifiedGraph& sg, JunctionTree tree) {
  GeneratorLayout layout;
  for (std::size_t c = 0; c < tree.cliques.size(); ++c) {
    const NodeSet& clique = tree.cliques[c];
    const NodeSet sep = c == 0 ? NodeSet{} : tree.separators[c - 1];
    bool stratified = false;
    const NodeSet candidates = set_difference(stratified_common_nodes(sg, clique, stratified), sep);
    if (stratified && candidates.empty()) return std::nullopt;
    std::vector<Node> ordering(sep.begin(), sep.end());
    NodeSet residual = set_difference(clique, sep);
    if (stratified) residual = set_difference(residual, NodeSet{candidates.back()});
    ordering.insert(ordering.end(), residual.begin(), residual.end());
    if (stratified) ordering.push_back(candidates.back());
    layout.orderings.push_back(std::move(ordering));
  }
  layout.tree = std::move(tree);
  return layout;
}

Eigen::ArrayXd dirichlet(int k, double concentration, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  Eigen::ArrayXd out(k);
  for (int attempt = 0;; ++attempt) {
    for (int i = 0; i < k; ++i) out(i) = gamma(rng);
    const double total = out.sum();
    if (total > 0.0 && std::isfinite(total)) return out / total;
    if (attempt > 100) return Eigen::ArrayXd::Constant(k, 1.0 / k);
  }
}

}  // namespace

GeneratorLayout generator_layout(const StratifiedGraph& sg) {
  if (!is_decomposable_sg(sg)) throw UnsupportedModelError("generator: stratified graph is not decomposable");
  const JunctionTree base = junction_tree(sg.graph);
  for (std::size_t root = 0; root < base.cliques.size(); ++root) {
    auto layout = try_layout(sg, root == 0 ? base : reroot(base, static_cast<int>(root)));
    if (layout) return std::move(*layout);
  }
  if (base.cliques.empty()) return GeneratorLayout{};
  throw UnsupportedModelError("generator: no junction-tree root keeps every stratified node out of its separator");
}

GeneratingModel random_generating_model(const StratifiedGraph& sg, const OutcomeSpace& space, std::uint64_t seed,
                                        double concentration) {
  if (!(concentration > 0.0)) throw std::invalid_argument("concentration must be positive");
  validate_strata(sg, space);
  const GeneratorLayout layout = generator_layout(sg);
  std::mt19937_64 rng(seed);
  GeneratingModel gm;
  gm.sg = sg;
  gm.space = space;
  for (std::size_t c = 0; c < layout.tree.cliques.size(); ++c) {
    CliqueConditional cc;
    cc.clique = layout.tree.cliques[c];
    cc.separator = c == 0 ? NodeSet{} : layout.tree.separators[c - 1];
    const auto& ordering = layout.orderings[c];
    const ParentGrouping grouping = parent_grouping(sg, cc.clique, ordering, space);
    for (std::size_t j = cc.separator.size(); j < ordering.size(); ++j) {
      const auto& var = grouping.variables[j];
      ConditionalTable table;
      table.node = ordering[j];
      table.parents.assign(ordering.begin(), ordering.begin() + static_cast<std::ptrdiff_t>(j));
      table.probabilities.resize(var.parent_outcomes, var.cardinality);
      std::vector<Eigen::ArrayXd> shared;
      for (int g = 0; g < var.groups(); ++g) shared.push_back(dirichlet(var.cardinality, concentration, rng));
      for (std::int64_t p = 0; p < var.parent_outcomes; ++p) {
        table.probabilities.row(p) = shared[var.group_of[p]].transpose();
      }
      cc.variables.push_back(std::move(table));
    }
    gm.cliques.push_back(std::move(cc));
  }
  gm.validate();
  return gm;
}

void GeneratingModel::validate() const {
  const int n = sg.node_count();
  if (space.size() != n) throw DataValidationError("generating model: outcome space size mismatch");
  std::vector<char> sampled(static_cast<std::size_t>(n), 0);
  for (const auto& cc : cliques) {
    for (Node v : cc.separator) {
      if (!sampled.at(v)) throw DataValidationError("generating model: separator sampled out of order");
    }
    NodeSet available = cc.separator;
    for (const auto& t : cc.variables) {
      if (t.node < 0 || t.node >= n || sampled[t.node]) {
        throw DataValidationError("generating model: node sampled twice or out of range");
      }
      for (Node p : t.parents) {
        if (!contains(available, p)) throw DataValidationError("generating model: parent not yet sampled");
      }
      std::int64_t rows = 1;
      for (Node p : t.parents) rows *= space.cardinality(p);
      if (t.probabilities.rows() != rows || t.probabilities.cols() != space.cardinality(t.node)) {
        throw DataValidationError("generating model: table shape mismatch for node " + std::to_string(t.node + 1));
      }
      if ((t.probabilities < 0.0).any()) throw DataValidationError("generating model: negative probability");
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (std::abs(t.probabilities.row(r).sum() - 1.0) > 1e-12) {
          throw DataValidationError("generating model: conditional row does not sum to 1");
        }
      }
      sampled[t.node] = 1;
      available = set_union(available, NodeSet{t.node});
    }
    if (available != cc.clique) throw DataValidationError("generating model: clique not covered by its tables");

    bool stratified = false;
    const NodeSet common = stratified_common_nodes(sg, cc.clique, stratified);
    if (!stratified) continue;
    const ConditionalTable& last = cc.variables.back();
    if (!contains(common, last.node) || last.parents.size() + 1 != cc.clique.size()) {
      throw DataValidationError("generating model: stratified variable is not last in its clique");
    }
    std::vector<Node> ordering = last.parents;
    ordering.push_back(last.node);
    const ParentGrouping grouping = parent_grouping(sg, cc.clique, ordering, space);
    const auto& var = grouping.variables.back();
    std::vector<Eigen::Index> first_of(static_cast<std::size_t>(var.groups()), -1);
    for (std::int64_t p = 0; p < var.parent_outcomes; ++p) {
      auto& first = first_of[var.group_of[p]];
      if (first < 0) {
        first = p;
      } else if (!(last.probabilities.row(p) == last.probabilities.row(first)).all()) {
        throw DataValidationError("generating model: merged parent outcomes have different conditionals");
      }
    }
  }
  if (std::find(sampled.begin(), sampled.end(), 0) != sampled.end()) {
    throw DataValidationError("generating model: some node has no table");
  }
}

DataMatrix sample(const GeneratingModel& gm, int n, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("sample: negative row count");
  const int cols = gm.sg.node_count();
  CategoryMatrix values(n, cols);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> row(static_cast<std::size_t>(cols), 0);
  for (int r = 0; r < n; ++r) {
    for (const auto& cc : gm.cliques) {
      for (const auto& t : cc.variables) {
        const auto probs = t.probabilities.row(parent_index(t.parents, gm.space, row));
        const double u = unit(rng);
        double acc = 0.0;
        int v = static_cast<int>(probs.size()) - 1;
        for (Eigen::Index i = 0; i < probs.size(); ++i) {
          acc += probs(i);
          if (u < acc) {
            v = static_cast<int>(i);
            break;
          }
        }
        row[t.node] = v;
      }
    }
    for (int c = 0; c < cols; ++c) values(r, c) = row[c];
  }
  return DataMatrix(std::move(values), gm.space);
}

double probability(const GeneratingModel& gm, std::span<const int> row) {
  double p = 1.0;
  for (const auto& cc : gm.cliques) {
    for (const auto& t : cc.variables) p *= t.probabilities(parent_index(t.parents, gm.space, row), row[t.node]);
  }
  return p;
}

Eigen::ArrayXd marginal_distribution(const GeneratingModel& gm, const std::vector<Node>& nodes) {
  const int n = gm.sg.node_count();
  NodeSet all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[i] = i;
  std::int64_t cells = 1;
  for (Node v : nodes) cells *= gm.space.cardinality(v);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(cells);
  std::vector<int> row(static_cast<std::size_t>(n), 0);
  const std::int64_t total = gm.space.outcome_count(all);
  for (std::int64_t k = 0; k < total; ++k) {
    std::int64_t cell = 0;
    for (Node v : nodes) cell = cell * gm.space.cardinality(v) + row[v];
    out(cell) += probability(gm, row);
    for (int i = n; i-- > 0;) {
      if (++row[i] < gm.space.cardinality(i)) break;
      row[i] = 0;
    }
  }
  return out;
}

StratifiedGraph replicate(const StratifiedGraph& component, int components) {
  if (components < 1) throw std::invalid_argument("replicate: components must be positive");
  const int n = component.node_count();
  StratifiedGraph out{UndirectedGraph(n * components)};
  for (int c = 0; c < components; ++c) {
    const int offset = c * n;
    for (const auto& [a, b] : component.graph.edges()) out.graph.add_edge(a + offset, b + offset);
    for (const auto& [e, ctx] : component.strata) out.strata[{e.first + offset, e.second + offset}] = ctx;
  }
  return out;
}

void SyntheticSpec::validate() const {
  if (class_structures.empty()) throw std::invalid_argument("synthetic spec needs at least one class");
  if (components < 1) throw std::invalid_argument("synthetic spec needs at least one component");
  if (!(concentration > 0.0)) throw std::invalid_argument("concentration must be positive");
  for (const auto& sg : class_structures) {
    if (sg.node_count() != 5) throw std::invalid_argument("class structures must have five nodes");
  }
}

std::vector<GeneratingModel> draw_class_models(const SyntheticSpec& spec) {
  spec.validate();
  std::vector<GeneratingModel> out;
  for (std::size_t k = 0; k < spec.class_structures.size(); ++k) {
    out.push_back(random_generating_model(spec.class_structures[k], OutcomeSpace::binary(5),
                                          derive_seed(spec.seed, {0, k}), spec.concentration));
  }
  return out;
}

LabeledData sample_synthetic(const std::vector<GeneratingModel>& class_models, int components, int rows_per_class,
                             std::uint64_t seed) {
  if (class_models.empty()) throw std::invalid_argument("sample_synthetic: no class models");
  const int width = class_models.front().sg.node_count();
  const int classes = static_cast<int>(class_models.size());
  OutcomeSpace space;
  for (int c = 0; c < components; ++c) {
    space.cardinalities.insert(space.cardinalities.end(), class_models.front().space.cardinalities.begin(),
                               class_models.front().space.cardinalities.end());
  }
  CategoryMatrix values(static_cast<Eigen::Index>(classes) * rows_per_class, width * components);
  LabeledData out;
  for (int k = 0; k < classes; ++k) {
    if (class_models[k].sg.node_count() != width) throw std::invalid_argument("class models differ in width");
    for (int c = 0; c < components; ++c) {
      const DataMatrix block = sample(class_models[k], rows_per_class,
                                      derive_seed(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(c)}));
      values.block(static_cast<Eigen::Index>(k) * rows_per_class, c * width, rows_per_class, width) = block.values;
    }
    out.labels.insert(out.labels.end(), static_cast<std::size_t>(rows_per_class), k + 1);
  }
  out.data = DataMatrix(std::move(values), std::move(space));
  return out;
}

LabeledData build_synthetic(const SyntheticSpec& spec, int rows_per_class) {
  return sample_synthetic(draw_class_models(spec), spec.components, rows_per_class, derive_seed(spec.seed, {1}));
}

}  // namespace sgmc
