#include "sgmc/learning.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "sgmc/errors.hpp"
#include "sgmc/seeding.hpp"

namespace sgmc {

void SearchConfig::validate() const {
  if (max_clique_size < 2) throw std::invalid_argument("max_clique_size must be at least 2");
  if (restarts < 0) throw std::invalid_argument("restarts must be non-negative");
  hp.validate();
}

namespace {

std::string edge_text(Node a, Node b) { return "(" + std::to_string(a) + " " + std::to_string(b) + ")"; }

std::string context_text(const Context& ctx) {
  std::string out = "[";
  for (std::size_t i = 0; i < ctx.size(); ++i) out += (i ? " " : "") + std::to_string(ctx[i]);
  return out + "]";
}

/// Memoized GM marginal likelihood of node subsets. With singleton groupings
/// the score of a set does not depend on which clique or separator it is.
class SubsetScorer {
 public:
  SubsetScorer(const DataMatrix& data, const HyperParams& hp) : data_(data), hp_(hp) {}

  LogScore operator()(const NodeSet& nodes) {
    if (nodes.empty()) return 0.0;
    auto it = cache_.find(nodes);
    if (it != cache_.end()) return it->second;
    const auto grouping = singleton_grouping(nodes, data_.space);
    const LogScore s = log_marginal(count_stats(data_, grouping), derive_alpha(hp_, grouping, data_.space));
    cache_.emplace(nodes, s);
    return s;
  }

  LogScore graph_score(const std::vector<NodeSet>& cliques) {
    const JunctionTree tree = junction_tree(cliques);
    LogScore total = 0.0;
    for (const auto& c : tree.cliques) total += (*this)(c);
    for (const auto& s : tree.separators) total -= (*this)(s);
    return total;
  }

 private:
  const DataMatrix& data_;
  HyperParams hp_;
  std::map<NodeSet, LogScore> cache_;
};

// Score of g if it is chordal and within the clique cap.
std::optional<LogScore> legal_score(const UndirectedGraph& g, int cap, SubsetScorer& scorer) {
  const auto cliques = chordal_cliques(g);
  if (!cliques || max_clique_size(*cliques) > static_cast<std::size_t>(cap)) return std::nullopt;
  return scorer.graph_score(*cliques);
}

UndirectedGraph random_chordal_graph(int n, int cap, std::mt19937_64& rng) {
  UndirectedGraph g(n);
  std::vector<Edge> pairs;
  for (Node a = 0; a < n; ++a) {
    for (Node b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::bernoulli_distribution coin(0.5);
  for (const auto& [a, b] : pairs) {
    if (!coin(rng)) continue;
    g.add_edge(a, b);
    const auto cliques = chordal_cliques(g);
    if (!cliques || max_clique_size(*cliques) > static_cast<std::size_t>(cap)) g.remove_edge(a, b);
  }
  return g;
}

LearnedModel hill_climb(UndirectedGraph g, const SearchConfig& cfg, SubsetScorer& scorer) {
  LearnedModel out;
  auto start = legal_score(g, cfg.max_clique_size, scorer);
  if (!start) throw std::invalid_argument("search must start from a chordal graph within the clique cap");
  LogScore current = *start;
  out.search_trace.push_back({0, "start", current});
  const int n = g.node_count();
  constexpr double kMinGain = 1e-9;
  for (int iteration = 1;; ++iteration) {
    Edge best_move{-1, -1};
    LogScore best_score = current + kMinGain;
    for (Node a = 0; a < n; ++a) {
      for (Node b = a + 1; b < n; ++b) {
        const bool present = g.has_edge(a, b);
        present ? g.remove_edge(a, b) : g.add_edge(a, b);
        const auto s = legal_score(g, cfg.max_clique_size, scorer);
        present ? g.add_edge(a, b) : g.remove_edge(a, b);
        if (s && *s > best_score) {
          best_score = *s;
          best_move = {a, b};
        }
      }
    }
    if (best_move.first < 0) break;
    const auto [a, b] = best_move;
    const bool present = g.has_edge(a, b);
    present ? g.remove_edge(a, b) : g.add_edge(a, b);
    current = best_score;
    out.search_trace.push_back({iteration, (present ? "remove" : "add") + edge_text(a, b), current});
  }
  out.sg = StratifiedGraph(std::move(g));
  out.train_log_score = current;
  return out;
}

// Stratified edges inside `clique` share a common node.
bool clique_strata_ok(const Strata& strata, const NodeSet& clique) {
  NodeSet common;
  bool first = true;
  for (const auto& [e, ctx] : strata) {
    if (ctx.empty() || !contains(clique, e.first) || !contains(clique, e.second)) continue;
    NodeSet ends{e.first, e.second};
    common = first ? ends : set_intersection(common, ends);
    first = false;
  }
  return first || !common.empty();
}

// Returns true when the context was added, false when it was removed.
bool toggle_context(Strata& strata, Edge edge, const Context& ctx) {
  ContextSet& set = strata[edge];
  const bool added = set.insert(ctx).second;
  if (!added) set.erase(ctx);
  if (set.empty()) strata.erase(edge);
  return added;
}

}  // namespace

LearnedModel learn_graph(const DataMatrix& data, const SearchConfig& cfg) {
  cfg.validate();
  if (data.rows() == 0) throw std::invalid_argument("learn_graph: empty data");
  const int n = static_cast<int>(data.cols());
  SubsetScorer scorer(data, cfg.hp);
  if (!cfg.graph_search_enabled) {
    LearnedModel empty;
    empty.sg = StratifiedGraph(UndirectedGraph(n));
    empty.train_log_score = scorer.graph_score(maximal_cliques(empty.sg.graph));
    empty.search_trace.push_back({0, "start", empty.train_log_score});
    return empty;
  }
  LearnedModel best = hill_climb(UndirectedGraph(n), cfg, scorer);
  for (int r = 1; r <= cfg.restarts; ++r) {
    std::mt19937_64 rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)}));
    LearnedModel candidate = hill_climb(random_chordal_graph(n, cfg.max_clique_size, rng), cfg, scorer);
    if (candidate.train_log_score > best.train_log_score) best = std::move(candidate);
  }
  return best;
}

LearnedModel learn_strata(const DataMatrix& data, const UndirectedGraph& g, const SearchConfig& cfg) {
  cfg.validate();
  if (data.cols() != g.node_count()) throw std::invalid_argument("learn_strata: data does not match graph");
  if (!is_decomposable(g)) throw UnsupportedModelError("learn_strata: graph is not chordal");
  const JunctionTree tree = junction_tree(g);
  const OutcomeSpace& space = data.space;

  std::vector<Histogram> hists;
  for (const auto& c : tree.cliques) hists.push_back(make_histogram(data, c));

  StratifiedGraph sg(g);
  auto clique_score = [&](std::size_t c) {
    const auto grouping = parent_grouping(sg, tree.cliques[c], space);
    return log_marginal(count_stats(hists[c], grouping), derive_alpha(cfg.hp, grouping, space));
  };

  std::vector<LogScore> scores(tree.cliques.size());
  LogScore total = 0.0;
  for (std::size_t c = 0; c < tree.cliques.size(); ++c) total += scores[c] = clique_score(c);
  for (const auto& s : tree.separators) {
    if (s.empty()) continue;
    const auto grouping = singleton_grouping(s, space);
    total -= log_marginal(count_stats(data, grouping), derive_alpha(cfg.hp, grouping, space));
  }

  struct Eligible {
    Edge edge;
    std::size_t clique;
    std::vector<Context> contexts;
  };
  std::vector<Eligible> eligible;
  for (const auto& e : g.edges()) {
    const NodeSet l = common_neighbors(g, e);
    if (l.empty()) continue;
    bool in_separator = false;
    for (const auto& s : tree.separators) in_separator |= contains(s, e.first) && contains(s, e.second);
    if (in_separator) continue;
    std::size_t home = 0;
    while (!(contains(tree.cliques[home], e.first) && contains(tree.cliques[home], e.second))) ++home;
    eligible.push_back({e, home, enumerate_contexts(l, space)});
  }

  LearnedModel out;
  out.search_trace.push_back({0, "start", total});
  constexpr double kMinGain = 1e-9;
  for (int iteration = 1;; ++iteration) {
    const Eligible* best_edge = nullptr;
    const Context* best_ctx = nullptr;
    LogScore best_total = total + kMinGain;
    LogScore best_clique = 0.0;
    for (const auto& el : eligible) {
      for (const auto& ctx : el.contexts) {
        toggle_context(sg.strata, el.edge, ctx);
        const auto it = sg.strata.find(el.edge);
        const bool full = it != sg.strata.end() && it->second.size() == el.contexts.size();
        if (!full && clique_strata_ok(sg.strata, tree.cliques[el.clique])) {
          const LogScore s = clique_score(el.clique);
          const LogScore candidate = total - scores[el.clique] + s;
          if (candidate > best_total) {
            best_total = candidate;
            best_clique = s;
            best_edge = &el;
            best_ctx = &ctx;
          }
        }
        toggle_context(sg.strata, el.edge, ctx);
      }
    }
    if (!best_edge) break;
    const bool present = !toggle_context(sg.strata, best_edge->edge, *best_ctx);
    scores[best_edge->clique] = best_clique;
    total = best_total;
    out.search_trace.push_back({iteration,
                                std::string(present ? "remove-context" : "add-context") +
                                    edge_text(best_edge->edge.first, best_edge->edge.second) + context_text(*best_ctx),
                                total});
  }
  out.sg = std::move(sg);
  out.train_log_score = total;
  return out;
}

FeaturePartition contiguous_groups(int feature_count, int group_size) {
  if (group_size < 1) throw std::invalid_argument("group size must be positive");
  if (group_size > feature_count) throw std::invalid_argument("group size exceeds feature count");
  FeaturePartition out;
  for (int start = 0; start < feature_count; start += group_size) {
    std::vector<int> group;
    for (int j = start; j < std::min(feature_count, start + group_size); ++j) group.push_back(j);
    out.push_back(std::move(group));
  }
  return out;
}

LearnedModel learn_structure(const DataMatrix& data, std::span<const int> rows, const SearchConfig& cfg,
                             const std::optional<FeaturePartition>& groups) {
  cfg.validate();
  if (rows.empty()) throw std::invalid_argument("learn_structure: no training rows");
  const int n = static_cast<int>(data.cols());
  FeaturePartition parts = groups ? *groups : contiguous_groups(n, std::max(n, 1));
  std::vector<int> owner(static_cast<std::size_t>(n), -1);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    std::sort(parts[p].begin(), parts[p].end());
    for (int j : parts[p]) {
      if (j < 0 || j >= n || owner[j] >= 0) throw std::invalid_argument("feature partition is not a partition");
      owner[j] = static_cast<int>(p);
    }
  }
  if (std::find(owner.begin(), owner.end(), -1) != owner.end()) {
    throw std::invalid_argument("feature partition does not cover every feature");
  }

  const DataMatrix subset = select_rows(data, rows);
  LearnedModel out;
  out.sg = StratifiedGraph(UndirectedGraph(n));
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const auto& cols = parts[p];
    const DataMatrix local = select_columns(subset, cols);
    SearchConfig local_cfg = cfg;
    local_cfg.seed = derive_seed(cfg.seed, {p});
    LearnedModel part = learn_graph(local, local_cfg);
    if (cfg.graph_search_enabled && cfg.stratum_search_enabled) {
      LearnedModel strata = learn_strata(local, part.sg.graph, local_cfg);
      for (auto& step : strata.search_trace) part.search_trace.push_back(step);
      part.sg = std::move(strata.sg);
      part.train_log_score = strata.train_log_score;
    }
    for (const auto& [a, b] : part.sg.graph.edges()) out.sg.graph.add_edge(cols[a], cols[b]);
    for (const auto& [e, ctx] : part.sg.strata) out.sg.strata[make_edge(cols[e.first], cols[e.second])] = ctx;
    out.train_log_score += part.train_log_score;
    for (auto& step : part.search_trace) {
      if (parts.size() > 1) step.move = "group" + std::to_string(p + 1) + ":" + step.move;
      out.search_trace.push_back(std::move(step));
    }
  }
  return out;
}

ClassLearningResult learn_class_models(const DataMatrix& training, const LabelVector& labels,
                                       const SearchConfig& cfg, const std::optional<FeaturePartition>& groups) {
  if (labels.size() != static_cast<std::size_t>(training.rows())) {
    throw std::invalid_argument("label vector length does not match training rows");
  }
  const int classes = class_count(labels);
  const auto by_class = rows_by_class(labels, classes);
  ClassLearningResult out;
  for (int k = 1; k <= classes; ++k) {
    const auto& rows = by_class[k - 1];
    if (rows.empty()) throw std::invalid_argument("class " + std::to_string(k) + " has no training rows");
    SearchConfig class_cfg = cfg;
    class_cfg.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(k)});
    LearnedModel learned = learn_structure(training, rows, class_cfg, groups);
    out.models.push_back(ClassModel::fit(k, learned.sg, cfg.hp, training, rows));
    out.learned.push_back(std::move(learned));
  }
  return out;
}

}  // namespace sgmc
