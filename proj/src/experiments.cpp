#include "sgmc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "sgmc/catalog.hpp"
#include "sgmc/seeding.hpp"

namespace sgmc {

namespace {

template <class F>
void parallel_for(int count, int threads, F&& body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

StratifiedGraph strip_strata(StratifiedGraph sg) {
  sg.strata.clear();
  return sg;
}

std::vector<ClassModel> fit_models(const std::vector<StratifiedGraph>& structures, const HyperParams& hp,
                                   const DataMatrix& train, const LabelVector& labels) {
  const auto by_class = rows_by_class(labels, static_cast<int>(structures.size()));
  std::vector<ClassModel> out;
  for (std::size_t k = 0; k < structures.size(); ++k) {
    out.push_back(ClassModel::fit(static_cast<int>(k + 1), structures[k], hp, train, by_class[k]));
  }
  return out;
}

std::vector<StratifiedGraph> structures_for(Structure s, const std::vector<StratifiedGraph>& sgs) {
  std::vector<StratifiedGraph> out;
  for (const auto& sg : sgs) {
    if (s == Structure::NaiveBayes) {
      out.push_back(StratifiedGraph{UndirectedGraph(sg.node_count())});
    } else {
      out.push_back(s == Structure::GM ? strip_strata(sg) : sg);
    }
  }
  return out;
}

std::vector<StratifiedGraph> learned_structures(const DataMatrix& train, const LabelVector& labels,
                                                const SearchConfig& search) {
  SearchConfig cfg = search;
  cfg.graph_search_enabled = true;
  cfg.stratum_search_enabled = true;
  const auto result = learn_class_models(train, labels, cfg);
  std::vector<StratifiedGraph> out;
  for (const auto& l : result.learned) out.push_back(l.sg);
  return out;
}

// Learned graphs are shared between the learned GM and SGM classifiers.
struct ModelCache {
  const std::vector<StratifiedGraph>* known = nullptr;
  const DataMatrix* train = nullptr;
  const LabelVector* labels = nullptr;
  const SearchConfig* search = nullptr;
  std::optional<std::vector<StratifiedGraph>> learned;

  std::vector<ClassModel> models(const ClassifierSpec& spec) {
    const std::vector<StratifiedGraph>* base = known;
    if (spec.structure != Structure::NaiveBayes && spec.source == StructureSource::Learned) {
      if (!learned) learned = learned_structures(*train, *labels, *search);
      base = &*learned;
    }
    return fit_models(structures_for(spec.structure, *base), search->hp, *train, *labels);
  }
};

bool strictly_increasing(const std::vector<int>& v) {
  return std::adjacent_find(v.begin(), v.end(), [](int a, int b) { return a >= b; }) == v.end();
}

}  // namespace

std::string ClassifierSpec::name() const {
  std::string out;
  switch (structure) {
    case Structure::NaiveBayes:
      out = "naive-bayes";
      break;
    case Structure::GM:
      out = "gm";
      break;
    case Structure::SGM:
      out = "sgm";
      break;
  }
  if (structure != Structure::NaiveBayes) out += source == StructureSource::Known ? "-known" : "-learned";
  return out + (mode == Mode::Marginal ? "-marginal" : "-simultaneous");
}

ClassifierSpec ClassifierSpec::parse(const std::string& text) {
  ClassifierSpec spec;
  std::string rest = text;
  auto take = [&rest](const std::string& prefix) {
    if (rest.rfind(prefix, 0) != 0) return false;
    rest = rest.substr(prefix.size());
    return true;
  };
  if (take("naive-bayes")) {
    spec.structure = Structure::NaiveBayes;
  } else if (take("sgm")) {
    spec.structure = Structure::SGM;
  } else if (take("gm")) {
    spec.structure = Structure::GM;
  } else {
    throw std::invalid_argument("unknown classifier '" + text + "'");
  }
  if (take("-known")) {
    spec.source = StructureSource::Known;
  } else if (take("-learned")) {
    spec.source = StructureSource::Learned;
  }
  if (rest.empty() || rest == "-marginal") {
    spec.mode = Mode::Marginal;
  } else if (rest == "-simultaneous") {
    spec.mode = Mode::Simultaneous;
  } else {
    throw std::invalid_argument("unknown classifier '" + text + "'");
  }
  return spec;
}

std::vector<ClassifierSpec> default_classifiers(StructureSource mode) {
  using S = Structure;
  if (mode == StructureSource::Known) {
    std::vector<ClassifierSpec> out;
    for (S s : {S::NaiveBayes, S::GM, S::SGM}) {
      for (Mode m : {Mode::Marginal, Mode::Simultaneous}) out.push_back({s, StructureSource::Known, m});
    }
    return out;
  }
  return {{S::NaiveBayes, StructureSource::Known, Mode::Marginal},
          {S::GM, StructureSource::Known, Mode::Marginal},
          {S::SGM, StructureSource::Known, Mode::Marginal},
          {S::GM, StructureSource::Learned, Mode::Marginal},
          {S::SGM, StructureSource::Learned, Mode::Marginal}};
}

void ExperimentPlan::validate() const {
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  if (sweep_values.empty() || !strictly_increasing(sweep_values)) {
    throw std::invalid_argument("sweep values must be non-empty and strictly increasing");
  }
  if (sweep_values.front() < 1 || fixed_rows < 1) throw std::invalid_argument("row counts must be positive");
  if (components < 1) throw std::invalid_argument("components must be positive");
  if (classifiers.empty()) throw std::invalid_argument("no classifiers requested");
  if (mode == StructureSource::Known) {
    for (const auto& c : classifiers) {
      if (c.source == StructureSource::Learned && c.structure != Structure::NaiveBayes) {
        throw std::invalid_argument("fixed-structure plans cannot run learned classifiers");
      }
    }
  }
  search.validate();
}

const SweepPoint& SweepReport::at(const std::string& classifier, int sweep_value) const {
  for (const auto& p : points) {
    if (p.classifier == classifier && p.sweep_value == sweep_value) return p;
  }
  throw std::out_of_range("no sweep point for " + classifier + " at " + std::to_string(sweep_value));
}

SweepReport aggregate(std::vector<ReplicateResult> results) {
  SweepReport report;
  std::vector<std::pair<std::string, int>> keys;
  std::map<std::pair<std::string, int>, std::vector<double>> groups;
  for (const auto& r : results) {
    auto key = std::make_pair(r.classifier, r.sweep_value);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(r.success);
  }
  for (const auto& key : keys) {
    const auto& v = groups[key];
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double se = v.size() > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
    report.points.push_back({key.first, key.second, mean, se, static_cast<int>(v.size())});
  }
  report.replicates = std::move(results);
  return report;
}

std::vector<ClassModel> build_models(const ClassifierSpec& spec, const std::vector<StratifiedGraph>& known,
                                     const DataMatrix& train, const LabelVector& labels, const SearchConfig& search) {
  ModelCache cache{&known, &train, &labels, &search, std::nullopt};
  return cache.models(spec);
}

LabelVector run_classifier(Mode mode, const DataMatrix& test, const std::vector<ClassModel>& models) {
  return mode == Mode::Marginal ? classify_marginal(test, models).labels : classify_simultaneous(test, models).labels;
}

SweepReport run_sweep(const ExperimentPlan& plan) {
  plan.validate();
  SyntheticSpec spec;
  spec.class_structures = plan.class_structures.empty() ? catalog::synthetic_class_structures() : plan.class_structures;
  spec.components = plan.components;
  spec.concentration = plan.concentration;
  std::vector<StratifiedGraph> known;
  for (const auto& sg : spec.class_structures) known.push_back(replicate(sg, plan.components));

  const int points = static_cast<int>(plan.sweep_values.size());
  const int tasks = plan.replicates * points;
  const std::size_t per_task = plan.classifiers.size();
  std::vector<ReplicateResult> results(static_cast<std::size_t>(tasks) * per_task);
  parallel_for(tasks, plan.threads, [&](int task) {
    const int r = task / points;
    const int p = task % points;
    const auto ur = static_cast<std::uint64_t>(r);
    const auto up = static_cast<std::uint64_t>(p);
    SyntheticSpec local = spec;
    local.seed = derive_seed(plan.seed, {ur, 0});
    const auto gms = draw_class_models(local);
    const int value = plan.sweep_values[p];
    const int train_rows = plan.sweep == SweepVariable::TrainRows ? value : plan.fixed_rows;
    const int test_rows = plan.sweep == SweepVariable::TestRows ? value : plan.fixed_rows;
    const LabeledData train = sample_synthetic(gms, plan.components, train_rows, derive_seed(plan.seed, {ur, 1, up}));
    const LabeledData test = sample_synthetic(gms, plan.components, test_rows, derive_seed(plan.seed, {ur, 2, up}));
    SearchConfig search = plan.search;
    search.seed = derive_seed(plan.seed, {ur, 3, up});
    ModelCache cache{&known, &train.data, &train.labels, &search, std::nullopt};
    for (std::size_t c = 0; c < per_task; ++c) {
      const auto& cs = plan.classifiers[c];
      const auto models = cache.models(cs);
      ReplicateResult rr;
      rr.classifier = cs.name();
      rr.sweep_value = value;
      rr.replicate = r;
      rr.truth = test.labels;
      rr.assigned = run_classifier(cs.mode, test.data, models);
      rr.success = success_rate(rr.truth, rr.assigned);
      results[static_cast<std::size_t>(task) * per_task + c] = std::move(rr);
    }
  });
  // Deterministic order: sweep point, classifier, replicate.
  std::vector<ReplicateResult> ordered;
  for (int value : plan.sweep_values) {
    for (const auto& cs : plan.classifiers) {
      const std::string name = cs.name();
      for (auto& r : results) {
        if (r.sweep_value == value && r.classifier == name) ordered.push_back(std::move(r));
      }
    }
  }
  return aggregate(std::move(ordered));
}

void ConvergePlan::validate() const {
  if (m_values.empty() || !strictly_increasing(m_values) || m_values.front() < 1) {
    throw std::invalid_argument("m values must be positive and strictly increasing");
  }
  if (seeds < 1) throw std::invalid_argument("seeds must be at least 1");
  if (test_per_class < 1) throw std::invalid_argument("test rows per class must be positive");
  if (components < 1) throw std::invalid_argument("components must be positive");
  hp.validate();
}

ConvergeReport run_converge(const ConvergePlan& plan) {
  plan.validate();
  const int steps = static_cast<int>(plan.m_values.size());
  const int m_max = plan.m_values.back();
  std::vector<ConvergeRow> rows(static_cast<std::size_t>(plan.seeds) * steps);
  parallel_for(plan.seeds, plan.threads, [&](int s) {
    const auto us = static_cast<std::uint64_t>(s);
    std::vector<GeneratingModel> gms;
    switch (plan.generator) {
      case ConvergeGenerator::Synthetic: {
        SyntheticSpec spec;
        spec.class_structures = catalog::synthetic_class_structures();
        spec.components = plan.components;
        spec.concentration = plan.concentration;
        spec.seed = derive_seed(plan.seed, {us, 0});
        gms = draw_class_models(spec);
        break;
      }
      case ConvergeGenerator::Table3:
        gms.push_back(catalog::table3_generating_model());
        break;
      case ConvergeGenerator::Independent:
        for (std::uint64_t k = 0; k < 5; ++k) {
          gms.push_back(random_generating_model(StratifiedGraph{UndirectedGraph(5)}, OutcomeSpace::binary(5),
                                                derive_seed(plan.seed, {us, 0, k}), plan.concentration));
        }
        break;
    }
    const int classes = static_cast<int>(gms.size());
    std::vector<StratifiedGraph> sgm;
    for (const auto& gm : gms) sgm.push_back(replicate(gm.sg, plan.components));
    const auto gm_structs = structures_for(Structure::GM, sgm);
    const LabeledData train = sample_synthetic(gms, plan.components, m_max, derive_seed(plan.seed, {us, 1}));
    const LabeledData test = sample_synthetic(gms, plan.components, plan.test_per_class, derive_seed(plan.seed, {us, 2}));
    const double n = static_cast<double>(test.labels.size());
    for (int i = 0; i < steps; ++i) {
      const int m = plan.m_values[i];
      std::vector<int> prefix;
      for (int k = 0; k < classes; ++k) {
        for (int r = 0; r < m; ++r) prefix.push_back(k * m_max + r);
      }
      const DataMatrix sub = select_rows(train.data, prefix);
      LabelVector sub_labels;
      for (int idx : prefix) sub_labels.push_back(train.labels[idx]);
      const auto sgm_models = fit_models(sgm, plan.hp, sub, sub_labels);
      const auto gm_models = fit_models(gm_structs, plan.hp, sub, sub_labels);
      const auto sim = simultaneous_row_terms(test.labels, test.data, sgm_models);
      const auto mar = marginal_row_terms(test.labels, test.data, sgm_models);
      const auto sim_gm = simultaneous_row_terms(test.labels, test.data, gm_models);
      double gap1 = 0.0;
      double gap2 = 0.0;
      for (std::size_t r = 0; r < sim.size(); ++r) {
        gap1 += std::abs(sim[r] - mar[r]);
        gap2 += std::abs(sim[r] - sim_gm[r]);
      }
      rows[static_cast<std::size_t>(s) * steps + i] = {s, m, gap1 / n, gap2 / n};
    }
  });

  ConvergeReport report;
  report.rows = rows;
  int dec1 = 0;
  int dec2 = 0;
  auto& sum = report.summary;
  for (int s = 0; s < plan.seeds; ++s) {
    const ConvergeRow* r = &rows[static_cast<std::size_t>(s) * steps];
    bool d1 = true;
    bool d2 = true;
    for (int i = 1; i < steps; ++i) {
      d1 = d1 && r[i].theorem1_gap < r[i - 1].theorem1_gap;
      d2 = d2 && r[i].theorem2_gap < r[i - 1].theorem2_gap;
    }
    dec1 += d1;
    dec2 += d2;
    sum.theorem1_initial += r[0].theorem1_gap;
    sum.theorem1_final += r[steps - 1].theorem1_gap;
    sum.theorem2_initial += r[0].theorem2_gap;
    sum.theorem2_final += r[steps - 1].theorem2_gap;
  }
  const double seeds = plan.seeds;
  sum.theorem1_decreasing = dec1 / seeds;
  sum.theorem2_decreasing = dec2 / seeds;
  sum.theorem1_initial /= seeds;
  sum.theorem1_final /= seeds;
  sum.theorem2_initial /= seeds;
  sum.theorem2_final /= seeds;
  return report;
}

GroupsReport run_groups(const DataMatrix& data, const LabelVector& labels, const GroupsPlan& plan) {
  if (static_cast<Eigen::Index>(labels.size()) != data.rows()) {
    throw std::invalid_argument("label count does not match row count");
  }
  if (plan.test_per_class < 1) throw std::invalid_argument("test rows per class must be positive");
  const int classes = class_count(labels);
  const auto partition = contiguous_groups(static_cast<int>(data.cols()), plan.group_size);
  std::vector<ClassifierSpec> classifiers = plan.classifiers;
  if (classifiers.empty()) {
    classifiers = {{Structure::NaiveBayes, StructureSource::Learned, Mode::Marginal},
                   {Structure::GM, StructureSource::Learned, Mode::Marginal},
                   {Structure::SGM, StructureSource::Learned, Mode::Marginal}};
  }
  for (const auto& c : classifiers) {
    if (c.structure != Structure::NaiveBayes && c.source == StructureSource::Known) {
      throw std::invalid_argument("feature groups have no known structure; use learned classifiers");
    }
  }

  std::mt19937_64 rng(derive_seed(plan.seed, {0}));
  std::vector<int> train_rows;
  std::vector<int> test_rows;
  for (auto rows : rows_by_class(labels, classes)) {
    if (static_cast<int>(rows.size()) <= plan.test_per_class) {
      throw std::invalid_argument("every class needs more rows than test_per_class");
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + plan.test_per_class);
    train_rows.insert(train_rows.end(), rows.begin() + plan.test_per_class, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  LabelVector train_labels;
  LabelVector test_labels;
  for (int r : train_rows) train_labels.push_back(labels[r]);
  for (int r : test_rows) test_labels.push_back(labels[r]);

  const int groups = static_cast<int>(partition.size());
  GroupsReport report;
  report.groups.resize(static_cast<std::size_t>(groups) * classifiers.size());
  parallel_for(groups, plan.threads, [&](int g) {
    const auto& cols = partition[g];
    const DataMatrix local = select_columns(data, cols);
    const DataMatrix train = select_rows(local, train_rows);
    const DataMatrix test = select_rows(local, test_rows);
    SearchConfig search = plan.search;
    search.seed = derive_seed(plan.seed, {1, static_cast<std::uint64_t>(g)});
    const std::vector<StratifiedGraph> empty(static_cast<std::size_t>(classes),
                                             StratifiedGraph{UndirectedGraph(static_cast<int>(cols.size()))});
    ModelCache cache{&empty, &train, &train_labels, &search, std::nullopt};
    for (std::size_t c = 0; c < classifiers.size(); ++c) {
      const auto assigned = run_classifier(classifiers[c].mode, test, cache.models(classifiers[c]));
      report.groups[static_cast<std::size_t>(g) * classifiers.size() + c] = {
          g + 1, cols.front(), static_cast<int>(cols.size()), classifiers[c].name(), success_rate(test_labels, assigned)};
    }
  });
  for (std::size_t c = 0; c < classifiers.size(); ++c) {
    double total = 0.0;
    for (int g = 0; g < groups; ++g) total += report.groups[static_cast<std::size_t>(g) * classifiers.size() + c].success;
    report.means.emplace_back(classifiers[c].name(), total / groups);
  }
  return report;
}

LabelVector leave_one_out(const DataMatrix& data, const LabelVector& labels, std::vector<ClassModel> models) {
  if (static_cast<Eigen::Index>(labels.size()) != data.rows()) {
    throw std::invalid_argument("label count does not match row count");
  }
  LabelVector out(labels.size());
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    const int k = labels[r];
    if (k < 1 || k > static_cast<int>(models.size())) throw std::invalid_argument("label without a class model");
    const std::span<const int> row(data.values.row(r).data(), static_cast<std::size_t>(data.cols()));
    models[k - 1].update_training(row, -1);
    double best = -std::numeric_limits<double>::infinity();
    int best_k = 1;
    for (const auto& m : models) {
      const double score = m.row_log_predictive(row);
      if (score > best) {
        best = score;
        best_k = m.class_id();
      }
    }
    out[r] = best_k;
    models[k - 1].update_training(row, +1);
  }
  return out;
}

}  // namespace sgmc
