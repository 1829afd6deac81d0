#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "sgmc/catalog.hpp"
#include "sgmc/errors.hpp"
#include "sgmc/experiments.hpp"
#include "sgmc/io.hpp"
#include "sgmc/seeding.hpp"

namespace fs = std::filesystem;
using namespace sgmc;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes to a file, or to stdout for "-" or an empty path.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
      file_.open(path);
      if (!file_) throw DataValidationError("cannot write " + path);
    }
    stream().precision(17);
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

struct Common {
  std::uint64_t seed = 0;
  double esz = 1.0;
  int max_clique = 5;
  std::string strata = "on";
  std::string graph = "learn";
  int restarts = 0;
  int threads = 0;

  SearchConfig search() const {
    SearchConfig cfg;
    cfg.seed = seed;
    cfg.hp.equivalent_sample_size = esz;
    cfg.max_clique_size = max_clique;
    cfg.stratum_search_enabled = strata == "on";
    cfg.graph_search_enabled = graph == "learn";
    cfg.restarts = restarts;
    return cfg;
  }
};

void add_search_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--max-clique", c.max_clique, "Largest clique the graph search may create")->capture_default_str();
  cmd->add_option("--strata", c.strata, "Search strata on learned graphs")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  cmd->add_option("--graph", c.graph, "learn: search graphs; empty: naive Bayes structure")
      ->check(CLI::IsMember({"learn", "empty"}))
      ->capture_default_str();
  cmd->add_option("--restarts", c.restarts, "Random chordal restarts of the graph search")->capture_default_str();
}

void add_common_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Base seed; every random draw is derived from it")->capture_default_str();
  cmd->add_option("--esz", c.esz, "Equivalent sample size N of the Dirichlet prior")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
}

std::vector<int> parse_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("expected a comma-separated integer list, got '" + text + "'");
    }
  }
  return out;
}

std::vector<ModelFile> read_model_dir(const fs::path& dir) {
  std::vector<std::pair<int, ModelFile>> found;
  if (!fs::is_directory(dir)) throw UsageError("model directory " + dir.string() + " does not exist");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    auto mf = load_model(entry.path());
    if (!mf.class_id) continue;
    found.emplace_back(*mf.class_id, std::move(mf));
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<ModelFile> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    if (found[i].first != static_cast<int>(i + 1)) throw DataValidationError("class models must be numbered 1..K");
    out.push_back(std::move(found[i].second));
  }
  if (out.empty()) throw UsageError("no class model files in " + dir.string());
  return out;
}

void write_confusion(std::ostream& out, const Eigen::MatrixXi& m) {
  out << "true_class";
  for (Eigen::Index j = 0; j < m.cols(); ++j) out << ",assigned_" << j + 1;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << i + 1;
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << m(i, j);
    out << '\n';
  }
}

int cmd_learn(const std::string& input, const std::string& out_dir, const Common& c, int group_size) {
  const Dataset ds = load_dataset(input);
  if (!ds.labels) throw UsageError("training file " + input + " has no class column");
  std::optional<FeaturePartition> groups;
  if (group_size > 0) {
    try {
      groups = contiguous_groups(static_cast<int>(ds.data.cols()), group_size);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  const auto result = learn_class_models(ds.data, *ds.labels, c.search(), groups);
  fs::create_directories(out_dir);
  Output trace((fs::path(out_dir) / "trace.csv").string());
  trace.stream() << "class,iteration,move,log_score\n";
  for (std::size_t k = 0; k < result.models.size(); ++k) {
    save_model(fs::path(out_dir) / ("class_" + std::to_string(k + 1) + ".json"),
               to_model_file(result.models[k], ds.data.names));
    for (const auto& s : result.learned[k].search_trace) {
      trace.stream() << k + 1 << ',' << s.iteration << ',' << s.move << ',' << s.score << '\n';
    }
  }
  std::cout << "classes,features,rows\n" << result.models.size() << ',' << ds.data.cols() << ',' << ds.data.rows() << '\n';
  return 0;
}

int cmd_classify(const std::string& model_dir, const std::string& input, const std::string& mode, bool loo,
                 const std::string& out, const std::string& confusion, const Common& c) {
  const auto files = read_model_dir(model_dir);
  const Dataset ds = load_dataset(input);
  for (const auto& f : files) {
    if (f.names != ds.data.names) throw UsageError("test columns do not match the model variables");
    if (f.space != ds.data.space) throw UsageError("test cardinalities do not match the model");
  }
  std::vector<ClassModel> models;
  for (const auto& f : files) models.push_back(to_class_model(f));

  ClassificationResult result;
  if (loo) {
    if (!ds.labels) throw UsageError("--loo needs a class column in the input");
    std::vector<ClassModel> refit;
    const auto by_class = rows_by_class(*ds.labels, static_cast<int>(models.size()));
    for (std::size_t k = 0; k < models.size(); ++k) {
      refit.push_back(ClassModel::fit(static_cast<int>(k + 1), models[k].graph(), models[k].hyper_params(), ds.data,
                                      by_class[k]));
    }
    result.labels = leave_one_out(ds.data, *ds.labels, std::move(refit));
  } else if (mode == "marginal") {
    result = classify_marginal(ds.data, models);
  } else {
    result = classify_simultaneous(ds.data, models, {}, c.seed);
  }
  Output o(out);
  auto& s = o.stream();
  s << "row,assigned";
  if (ds.labels) s << ",true_class";
  const bool posteriors = result.log_posteriors.size() > 0;
  if (posteriors) {
    for (std::size_t k = 0; k < models.size(); ++k) s << ",log_posterior_" << k + 1;
  }
  s << '\n';
  for (std::size_t r = 0; r < result.labels.size(); ++r) {
    s << r + 1 << ',' << result.labels[r];
    if (ds.labels) s << ',' << (*ds.labels)[r];
    if (posteriors) {
      for (Eigen::Index k = 0; k < result.log_posteriors.cols(); ++k) s << ',' << result.log_posteriors(r, k);
    }
    s << '\n';
  }
  if (!confusion.empty()) {
    if (!ds.labels) throw UsageError("--confusion needs a class column in the input");
    Output co(confusion);
    write_confusion(co.stream(), confusion_matrix(*ds.labels, result.labels, static_cast<int>(models.size())));
  }
  if (!out.empty() && out != "-") {
    std::cout.precision(17);
    std::cout << "log_score,iterations";
    if (ds.labels) std::cout << ",success_rate";
    std::cout << '\n' << result.log_score << ',' << result.iterations;
    if (ds.labels) std::cout << ',' << success_rate(*ds.labels, result.labels);
    std::cout << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive classification with stratified graphical models"};
  app.require_subcommand(1);
  Common common;

  auto* learn = app.add_subcommand("learn", "Learn one model per class. Writes class_K.json files and trace.csv "
                                            "(class,iteration,move,log_score)");
  std::string learn_input, learn_out = "models";
  int learn_group = 0;
  learn->add_option("--input", learn_input, "Training CSV with a class column")->required();
  learn->add_option("--out", learn_out, "Output directory")->capture_default_str();
  learn->add_option("--group-size", learn_group, "Search contiguous feature groups of this size independently");
  add_search_flags(learn, common);
  add_common_flags(learn, common);

  auto* classify = app.add_subcommand("classify", "Classify a test CSV. Output columns: row,assigned[,true_class]"
                                                  "[,log_posterior_K...]; confusion CSV rows are true classes");
  std::string cls_models, cls_input, cls_mode = "marginal", cls_out, cls_confusion;
  bool cls_loo = false;
  classify->add_option("--models", cls_models, "Directory of class model files")->required();
  classify->add_option("--input", cls_input, "Test CSV")->required();
  classify->add_option("--mode", cls_mode, "Classifier")
      ->check(CLI::IsMember({"marginal", "simultaneous"}))
      ->capture_default_str();
  classify->add_flag("--loo", cls_loo, "Leave-one-out over a labeled input, refitting counts from it");
  classify->add_option("--out", cls_out, "Labels CSV (default stdout)");
  classify->add_option("--confusion", cls_confusion, "Confusion matrix CSV");
  add_common_flags(classify, common);

  auto* sweep = app.add_subcommand("sweep", "Success-rate sweep on synthetic data. Output columns: "
                                            "classifier,sweep_value,mean_success,standard_error,replicates");
  std::string sw_design, sw_variable = "train", sw_values, sw_structure = "known", sw_classifiers, sw_out,
                         sw_replicate_out;
  int sw_fixed = 20, sw_components = 4, sw_replicates = 50;
  double sw_concentration = 1.0;
  sweep->add_option("--design", sw_design, "Preset: fig3, fig4 or fig5")
      ->check(CLI::IsMember({"fig3", "fig4", "fig5"}));
  sweep->add_option("--sweep", sw_variable, "Swept dimension")
      ->check(CLI::IsMember({"train", "test"}))
      ->capture_default_str();
  sweep->add_option("--values", sw_values, "Rows per class at each sweep point, e.g. 10,50,100");
  sweep->add_option("--fixed", sw_fixed, "Rows per class of the other dimension")->capture_default_str();
  sweep->add_option("--components", sw_components, "Five-variable chain components")->capture_default_str();
  sweep->add_option("--structure", sw_structure, "known or learned")
      ->check(CLI::IsMember({"known", "learned"}))
      ->capture_default_str();
  sweep->add_option("--classifiers", sw_classifiers, "Comma-separated names such as sgm-known-simultaneous");
  sweep->add_option("--replicates", sw_replicates, "Replicates per sweep point")->capture_default_str();
  sweep->add_option("--concentration", sw_concentration, "Dirichlet concentration of the generating tables")
      ->capture_default_str();
  sweep->add_option("--out", sw_out, "Summary CSV (default stdout)");
  sweep->add_option("--replicate-out", sw_replicate_out,
                    "Per-replicate labels CSV: classifier,sweep_value,replicate,row,true_class,assigned");
  add_search_flags(sweep, common);
  add_common_flags(sweep, common);

  auto* converge = app.add_subcommand("converge", "Per-observation score gaps over training size. Output columns: "
                                                  "seed,m,theorem1_gap,theorem2_gap");
  std::string cv_generator = "synthetic", cv_m = "100,1000,10000", cv_out;
  int cv_seeds = 50, cv_test = 20, cv_components = 4;
  converge->add_option("--generator", cv_generator, "synthetic, table3 or independent")
      ->check(CLI::IsMember({"synthetic", "table3", "independent"}))
      ->capture_default_str();
  converge->add_option("--m", cv_m, "Training rows per class")->capture_default_str();
  converge->add_option("--replicates", cv_seeds, "Seeds")->capture_default_str();
  converge->add_option("--test-per-class", cv_test, "Test rows per class")->capture_default_str();
  converge->add_option("--components", cv_components, "Five-variable chain components")->capture_default_str();
  converge->add_option("--out", cv_out, "CSV (default stdout)");
  add_common_flags(converge, common);

  auto* groups = app.add_subcommand("groups", "Per feature-group learn and classify. Output columns: "
                                              "group,first_feature,features,classifier,success_rate");
  std::string gr_input, gr_out, gr_classifiers;
  int gr_size = 100, gr_test = 10;
  groups->add_option("--input", gr_input, "Labeled CSV")->required();
  groups->add_option("--group-size", gr_size, "Features per group; the last group may be smaller")
      ->capture_default_str();
  groups->add_option("--test-per-class", gr_test, "Held-out rows per class")->capture_default_str();
  groups->add_option("--classifiers", gr_classifiers, "Comma-separated learned classifier names");
  groups->add_option("--out", gr_out, "CSV (default stdout)");
  add_search_flags(groups, common);
  add_common_flags(groups, common);

  auto* simulate = app.add_subcommand("simulate", "Sample data from a generating model or the synthetic classes");
  std::string sim_model, sim_catalog = "synthetic", sim_out, sim_emit;
  int sim_rows = 100, sim_components = 4;
  double sim_concentration = 1.0;
  simulate->add_option("--model", sim_model, "Model file with tables; sampled without a class column");
  simulate->add_option("--catalog", sim_catalog, "Built-in generator when --model is absent: synthetic or table3")
      ->check(CLI::IsMember({"synthetic", "table3"}))
      ->capture_default_str();
  simulate->add_option("--rows", sim_rows, "Rows (per class for synthetic)")->capture_default_str();
  simulate->add_option("--components", sim_components, "Five-variable chain components")->capture_default_str();
  simulate->add_option("--concentration", sim_concentration, "Dirichlet concentration")->capture_default_str();
  simulate->add_option("--out", sim_out, "Dataset CSV (default stdout)");
  simulate->add_option("--emit-models", sim_emit, "Directory for the generating model files");
  add_common_flags(simulate, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*learn) return cmd_learn(learn_input, learn_out, common, learn_group);
    if (*classify) return cmd_classify(cls_models, cls_input, cls_mode, cls_loo, cls_out, cls_confusion, common);

    auto parse_classifiers = [](const std::string& text) {
      std::vector<ClassifierSpec> out;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(ClassifierSpec::parse(item));
      return out;
    };

    if (*sweep) {
      ExperimentPlan plan;
      plan.mode = sw_structure == "known" ? StructureSource::Known : StructureSource::Learned;
      plan.sweep = sw_variable == "train" ? SweepVariable::TrainRows : SweepVariable::TestRows;
      plan.fixed_rows = sw_fixed;
      plan.components = sw_components;
      if (sw_design == "fig3") {
        plan.mode = StructureSource::Known;
        plan.sweep = SweepVariable::TrainRows;
        plan.sweep_values = {10, 50, 100, 250};
        plan.fixed_rows = 20;
        plan.components = 4;
      } else if (sw_design == "fig4") {
        plan.mode = StructureSource::Known;
        plan.sweep = SweepVariable::TestRows;
        plan.sweep_values = {10, 50, 100};
        plan.fixed_rows = 20;
        plan.components = 10;
      } else if (sw_design == "fig5") {
        plan.mode = StructureSource::Learned;
        plan.sweep = SweepVariable::TrainRows;
        plan.sweep_values = {50, 200, 1000};
        plan.fixed_rows = 20;
        plan.components = 4;
      }
      if (!sw_values.empty()) plan.sweep_values = parse_list(sw_values);
      if (plan.sweep_values.empty()) throw UsageError("sweep needs --values or --design");
      plan.classifiers = sw_classifiers.empty() ? default_classifiers(plan.mode) : parse_classifiers(sw_classifiers);
      plan.replicates = sw_replicates;
      plan.seed = common.seed;
      plan.concentration = sw_concentration;
      plan.search = common.search();
      plan.threads = common.threads;
      const SweepReport report = run_sweep(plan);
      Output o(sw_out);
      o.stream() << "classifier,sweep_value,mean_success,standard_error,replicates\n";
      for (const auto& p : report.points) {
        o.stream() << p.classifier << ',' << p.sweep_value << ',' << p.mean << ',' << p.standard_error << ','
                   << p.replicates << '\n';
      }
      if (!sw_replicate_out.empty()) {
        Output r(sw_replicate_out);
        r.stream() << "classifier,sweep_value,replicate,row,true_class,assigned\n";
        for (const auto& rr : report.replicates) {
          for (std::size_t i = 0; i < rr.truth.size(); ++i) {
            r.stream() << rr.classifier << ',' << rr.sweep_value << ',' << rr.replicate << ',' << i + 1 << ','
                       << rr.truth[i] << ',' << rr.assigned[i] << '\n';
          }
        }
      }
      return 0;
    }

    if (*converge) {
      ConvergePlan plan;
      plan.generator = cv_generator == "synthetic" ? ConvergeGenerator::Synthetic
                       : cv_generator == "table3"  ? ConvergeGenerator::Table3
                                                   : ConvergeGenerator::Independent;
      plan.m_values = parse_list(cv_m);
      plan.seeds = cv_seeds;
      plan.seed = common.seed;
      plan.test_per_class = cv_test;
      plan.components = cv_components;
      plan.hp.equivalent_sample_size = common.esz;
      plan.threads = common.threads;
      const ConvergeReport report = run_converge(plan);
      Output o(cv_out);
      o.stream() << "seed,m,theorem1_gap,theorem2_gap\n";
      for (const auto& r : report.rows) {
        o.stream() << r.seed_index << ',' << r.m << ',' << r.theorem1_gap << ',' << r.theorem2_gap << '\n';
      }
      return 0;
    }

    if (*groups) {
      const Dataset ds = load_dataset(gr_input);
      if (!ds.labels) throw UsageError("groups needs a class column in the input");
      if (gr_size < 1 || gr_size > ds.data.cols()) throw UsageError("group size must be between 1 and the feature count");
      GroupsPlan plan;
      plan.group_size = gr_size;
      plan.test_per_class = gr_test;
      plan.seed = common.seed;
      plan.search = common.search();
      plan.threads = common.threads;
      if (!gr_classifiers.empty()) plan.classifiers = parse_classifiers(gr_classifiers);
      const GroupsReport report = run_groups(ds.data, *ds.labels, plan);
      Output o(gr_out);
      o.stream() << "group,first_feature,features,classifier,success_rate\n";
      for (const auto& g : report.groups) {
        o.stream() << g.group << ',' << g.first_feature + 1 << ',' << g.feature_count << ',' << g.classifier << ','
                   << g.success << '\n';
      }
      return 0;
    }

    if (*simulate) {
      if (sim_rows < 0) throw UsageError("--rows must be non-negative");
      if (!sim_model.empty() || sim_catalog == "table3") {
        const ModelFile mf = sim_model.empty() ? to_model_file(catalog::table3_generating_model(), {})
                                               : load_model(sim_model);
        const GeneratingModel gm = to_generating_model(mf);
        DataMatrix data = sample(gm, sim_rows, common.seed);
        data.names = mf.names;
        Output o(sim_out);
        write_dataset(o.stream(), data);
        if (!sim_emit.empty()) {
          fs::create_directories(sim_emit);
          save_model(fs::path(sim_emit) / "generator.json", mf);
        }
        return 0;
      }
      SyntheticSpec spec;
      spec.class_structures = catalog::synthetic_class_structures();
      spec.components = sim_components;
      spec.seed = common.seed;
      spec.concentration = sim_concentration;
      const auto gms = draw_class_models(spec);
      const LabeledData ld = sample_synthetic(gms, spec.components, sim_rows, derive_seed(spec.seed, {1}));
      Output o(sim_out);
      write_dataset(o.stream(), ld.data, &ld.labels);
      if (!sim_emit.empty()) {
        fs::create_directories(sim_emit);
        for (std::size_t k = 0; k < gms.size(); ++k) {
          ModelFile mf = to_model_file(gms[k], {});
          mf.class_id = static_cast<int>(k + 1);
          save_model(fs::path(sim_emit) / ("generator_" + std::to_string(k + 1) + ".json"), mf);
        }
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const DataValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const UnsupportedModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
