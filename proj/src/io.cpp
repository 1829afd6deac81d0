#include "sgmc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"

#include "sgmc/errors.hpp"

namespace sgmc {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int parse_int(const std::string& field, int line, int column, const char* what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(std::string("expected ") + what + ", got '" + field + "'", line, column);
  }
  return v;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  std::optional<std::vector<int>> declared;
  std::optional<std::vector<std::string>> header;
  bool has_class = false;
  std::vector<std::vector<int>> rows;
  LabelVector labels;
  std::string line;
  int line_no = 0;
  int cardinality_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      const std::string key = "#cardinalities:";
      if (text.rfind(key, 0) != 0) continue;
      if (declared) throw ParseError("duplicate #cardinalities line", line_no);
      if (!rows.empty()) throw ParseError("#cardinalities must precede the data rows", line_no);
      std::vector<int> cards;
      int field = 0;
      for (const auto& f : split_fields(trim(text.substr(key.size())))) {
        const int k = parse_int(f, line_no, ++field, "a cardinality");
        if (k < 1) throw ParseError("cardinality must be at least 1", line_no, field);
        cards.push_back(k);
      }
      declared = std::move(cards);
      cardinality_line = line_no;
      continue;
    }
    auto fields = split_fields(text);
    if (!header) {
      has_class = !fields.empty() && fields.back() == "class";
      if (has_class) fields.pop_back();
      for (std::size_t j = 0; j < fields.size(); ++j) {
        if (fields[j].empty()) throw ParseError("empty column name", line_no, static_cast<int>(j + 1));
      }
      header = std::move(fields);
      continue;
    }
    const std::size_t expected = header->size() + (has_class ? 1 : 0);
    if (fields.size() != expected) {
      throw ParseError("expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    std::vector<int> row(header->size());
    for (std::size_t j = 0; j < header->size(); ++j) {
      const int col = static_cast<int>(j + 1);
      const int v = parse_int(fields[j], line_no, col, "a category index");
      const int k = declared && j < declared->size() ? (*declared)[j] : 2;
      if (v < 0 || v >= k) {
        throw ParseError("value " + std::to_string(v) + " outside cardinality " + std::to_string(k) + " of column " +
                             (*header)[j],
                         line_no, col);
      }
      row[j] = v;
    }
    if (has_class) {
      const int col = static_cast<int>(expected);
      const int label = parse_int(fields.back(), line_no, col, "a class label");
      if (label < 1) throw ParseError("class labels are 1-based", line_no, col);
      labels.push_back(label);
    }
    rows.push_back(std::move(row));
  }
  if (!header) throw ParseError("missing header row", line_no);
  const int cols = static_cast<int>(header->size());
  if (declared && static_cast<int>(declared->size()) != cols) {
    throw ParseError("#cardinalities declares " + std::to_string(declared->size()) + " columns, header has " +
                         std::to_string(cols),
                     cardinality_line);
  }
  OutcomeSpace space;
  space.cardinalities = declared ? *declared : std::vector<int>(static_cast<std::size_t>(cols), 2);
  CategoryMatrix values(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < cols; ++c) values(static_cast<Eigen::Index>(r), c) = rows[r][c];
  }
  Dataset out;
  out.data = DataMatrix(std::move(values), std::move(*header), std::move(space));
  if (has_class) out.labels = std::move(labels);
  return out;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataValidationError("cannot open " + path.string());
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const DataMatrix& data, const LabelVector* labels) {
  data.validate();
  if (labels && static_cast<Eigen::Index>(labels->size()) != data.rows()) {
    throw DataValidationError("label count does not match row count");
  }
  const auto& names = data.names.empty() ? default_names(static_cast<int>(data.cols())) : data.names;
  out << "#cardinalities:";
  for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << data.space.cardinalities[j];
  out << '\n';
  for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << names[j];
  if (labels) out << (data.cols() ? "," : "") << "class";
  out << '\n';
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << data.values(r, j);
    if (labels) out << (data.cols() ? "," : "") << (*labels)[r];
    out << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const DataMatrix& data, const LabelVector* labels) {
  std::ofstream out(path);
  if (!out) throw DataValidationError("cannot write " + path.string());
  write_dataset(out, data, labels);
}

namespace {

struct NameIndex {
  std::map<std::string, Node> index;

  Node at(const std::string& name, const std::string& where) const {
    const auto it = index.find(name);
    if (it == index.end()) throw ParseError(where + ": unknown variable '" + name + "'");
    return it->second;
  }
};

std::vector<Node> node_list(const json& names, const NameIndex& idx, const std::string& where) {
  if (!names.is_array()) throw ParseError(where + ": expected an array of variable names");
  std::vector<Node> out;
  for (const auto& n : names) out.push_back(idx.at(n.get<std::string>(), where));
  return out;
}

json name_list(const std::vector<Node>& nodes, const std::vector<std::string>& names) {
  json out = json::array();
  for (Node v : nodes) out.push_back(names.at(v));
  return out;
}

// Assignments of `pattern` with wildcards (-1) expanded over each node's categories.
void expand_context(const NodeSet& nodes, const OutcomeSpace& space, std::vector<int>& pattern, std::size_t pos,
                    ContextSet& out) {
  if (pos == pattern.size()) {
    out.insert(pattern);
    return;
  }
  if (pattern[pos] >= 0) {
    expand_context(nodes, space, pattern, pos + 1, out);
    return;
  }
  for (int v = 0; v < space.cardinality(nodes[pos]); ++v) {
    pattern[pos] = v;
    expand_context(nodes, space, pattern, pos + 1, out);
  }
  pattern[pos] = -1;
}

ModelFile parse_model_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("model: top level must be an object");
  ModelFile mf;
  NameIndex idx;
  if (!doc.contains("nodes") || !doc["nodes"].is_array()) throw ParseError("model: missing 'nodes' array");
  for (std::size_t i = 0; i < doc["nodes"].size(); ++i) {
    const auto& n = doc["nodes"][i];
    const std::string where = "model: nodes[" + std::to_string(i) + "]";
    if (!n.is_object() || !n.contains("name")) throw ParseError(where + ": expected {name, cardinality}");
    const auto name = n["name"].get<std::string>();
    const int k = n.value("cardinality", 2);
    if (k < 1) throw ParseError(where + ": cardinality must be at least 1");
    if (!idx.index.emplace(name, static_cast<Node>(i)).second) throw ParseError(where + ": duplicate name " + name);
    mf.names.push_back(name);
    mf.space.cardinalities.push_back(k);
  }
  const int n = static_cast<int>(mf.names.size());
  mf.sg = StratifiedGraph{UndirectedGraph(n)};
  const json edges = doc.value("edges", json::array());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "model: edges[" + std::to_string(i) + "]";
    const auto pair = node_list(edges[i], idx, where);
    if (pair.size() != 2 || pair[0] == pair[1]) throw ParseError(where + ": expected two distinct names");
    mf.sg.graph.add_edge(pair[0], pair[1]);
  }
  const json strata = doc.value("strata", json::array());
  for (std::size_t i = 0; i < strata.size(); ++i) {
    const std::string where = "model: strata[" + std::to_string(i) + "]";
    const auto& s = strata[i];
    const auto pair = node_list(s.value("edge", json()), idx, where + ".edge");
    if (pair.size() != 2) throw ParseError(where + ".edge: expected two names");
    const Edge e = make_edge(pair[0], pair[1]);
    if (!mf.sg.graph.has_edge(e.first, e.second)) throw ParseError(where + ": stratum on a missing edge");
    const NodeSet common = common_neighbors(mf.sg.graph, e);
    ContextSet& contexts = mf.sg.strata[e];
    const json list = s.value("contexts", json::array());
    for (std::size_t c = 0; c < list.size(); ++c) {
      const std::string cw = where + ".contexts[" + std::to_string(c) + "]";
      const auto& obj = list[c];
      if (!obj.is_object() || obj.size() != common.size()) {
        throw ParseError(cw + ": must assign exactly the edge's common neighbors");
      }
      std::vector<int> pattern(common.size(), -1);
      for (const auto& [key, value] : obj.items()) {
        const Node v = idx.at(key, cw);
        const auto pos = std::find(common.begin(), common.end(), v);
        if (pos == common.end()) throw ParseError(cw + ": " + key + " is not a common neighbor of the edge");
        const auto slot = static_cast<std::size_t>(pos - common.begin());
        if (value.is_string() && value.get<std::string>() == "*") continue;
        if (!value.is_number_integer()) throw ParseError(cw + ": " + key + " must be an integer or \"*\"");
        const int x = value.get<int>();
        if (x < 0 || x >= mf.space.cardinality(v)) throw ParseError(cw + ": " + key + " value out of range");
        pattern[slot] = x;
      }
      expand_context(common, mf.space, pattern, 0, contexts);
    }
  }
  mf.hp.equivalent_sample_size = doc.value("N", 1.0);
  if (!(mf.hp.equivalent_sample_size > 0.0)) throw ParseError("model: N must be positive");
  if (doc.contains("class")) mf.class_id = doc["class"].get<int>();
  try {
    validate_strata(mf.sg, mf.space);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("model: ") + e.what());
  }

  const json counts = doc.value("counts", json::array());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const std::string where = "model: counts[" + std::to_string(i) + "]";
    Histogram h;
    h.nodes = node_list(counts[i].value("nodes", json()), idx, where + ".nodes");
    std::int64_t cells = 1;
    for (Node v : h.nodes) {
      h.cardinalities.push_back(mf.space.cardinality(v));
      cells *= h.cardinalities.back();
    }
    const auto values = counts[i].value("histogram", std::vector<std::int64_t>{});
    if (static_cast<std::int64_t>(values.size()) != cells) throw ParseError(where + ": histogram size mismatch");
    h.counts.resize(cells);
    for (std::int64_t c = 0; c < cells; ++c) {
      if (values[c] < 0) throw ParseError(where + ": negative count");
      h.counts(c) = values[c];
    }
    mf.counts.push_back(std::move(h));
  }

  const json tables = doc.value("tables", json::array());
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const std::string where = "model: tables[" + std::to_string(i) + "]";
    const auto& t = tables[i];
    CliqueConditional cc;
    auto clique = node_list(t.value("clique", json()), idx, where + ".clique");
    auto sep = node_list(t.value("separator", json::array()), idx, where + ".separator");
    std::sort(clique.begin(), clique.end());
    std::sort(sep.begin(), sep.end());
    cc.clique = clique;
    cc.separator = sep;
    const json vars = t.value("variables", json::array());
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const std::string vw = where + ".variables[" + std::to_string(j) + "]";
      ConditionalTable ct;
      ct.node = idx.at(vars[j].value("node", std::string()), vw);
      ct.parents = node_list(vars[j].value("parents", json::array()), idx, vw + ".parents");
      const auto probs = vars[j].value("probabilities", std::vector<std::vector<double>>{});
      std::int64_t rows = 1;
      for (Node p : ct.parents) rows *= mf.space.cardinality(p);
      const int k = mf.space.cardinality(ct.node);
      if (static_cast<std::int64_t>(probs.size()) != rows) throw ParseError(vw + ": expected one row per parent outcome");
      ct.probabilities.resize(rows, k);
      for (std::int64_t r = 0; r < rows; ++r) {
        if (static_cast<int>(probs[r].size()) != k) throw ParseError(vw + ": row width must equal the cardinality");
        for (int c = 0; c < k; ++c) ct.probabilities(r, c) = probs[r][c];
      }
      cc.variables.push_back(std::move(ct));
    }
    mf.tables.push_back(std::move(cc));
  }
  if (!mf.tables.empty()) to_generating_model(mf).validate();
  return mf;
}

}  // namespace

ModelFile parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
  try {
    return parse_model_json(doc);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

std::string format_model(const ModelFile& mf) {
  json doc;
  doc["nodes"] = json::array();
  for (std::size_t i = 0; i < mf.names.size(); ++i) {
    doc["nodes"].push_back({{"name", mf.names[i]}, {"cardinality", mf.space.cardinalities.at(i)}});
  }
  doc["edges"] = json::array();
  for (const auto& [a, b] : mf.sg.graph.edges()) doc["edges"].push_back({mf.names[a], mf.names[b]});
  doc["strata"] = json::array();
  for (const auto& [e, contexts] : mf.sg.strata) {
    const NodeSet common = common_neighbors(mf.sg.graph, e);
    json list = json::array();
    for (const auto& ctx : contexts) {
      json obj = json::object();
      for (std::size_t i = 0; i < common.size(); ++i) obj[mf.names[common[i]]] = ctx[i];
      list.push_back(std::move(obj));
    }
    doc["strata"].push_back({{"edge", {mf.names[e.first], mf.names[e.second]}}, {"contexts", std::move(list)}});
  }
  doc["N"] = mf.hp.equivalent_sample_size;
  if (mf.class_id) doc["class"] = *mf.class_id;
  if (!mf.counts.empty()) {
    doc["counts"] = json::array();
    for (const auto& h : mf.counts) {
      doc["counts"].push_back({{"nodes", name_list(h.nodes, mf.names)},
                               {"histogram", std::vector<std::int64_t>(h.counts.data(), h.counts.data() + h.counts.size())}});
    }
  }
  if (!mf.tables.empty()) {
    doc["tables"] = json::array();
    for (const auto& cc : mf.tables) {
      json vars = json::array();
      for (const auto& t : cc.variables) {
        json rows = json::array();
        for (Eigen::Index r = 0; r < t.probabilities.rows(); ++r) {
          json row = json::array();
          for (Eigen::Index c = 0; c < t.probabilities.cols(); ++c) row.push_back(t.probabilities(r, c));
          rows.push_back(std::move(row));
        }
        vars.push_back({{"node", mf.names[t.node]}, {"parents", name_list(t.parents, mf.names)}, {"probabilities", rows}});
      }
      doc["tables"].push_back({{"clique", name_list(cc.clique, mf.names)},
                               {"separator", name_list(cc.separator, mf.names)},
                               {"variables", std::move(vars)}});
    }
  }
  return doc.dump(2) + "\n";
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataValidationError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

void save_model(const std::filesystem::path& path, const ModelFile& model) {
  std::ofstream out(path);
  if (!out) throw DataValidationError("cannot write " + path.string());
  out << format_model(model);
}

ModelFile to_model_file(const StratifiedGraph& sg, const OutcomeSpace& space, const HyperParams& hp,
                        const std::vector<std::string>& names) {
  ModelFile mf;
  mf.names = names.empty() ? default_names(sg.node_count()) : names;
  if (static_cast<int>(mf.names.size()) != sg.node_count()) throw DataValidationError("model: name count mismatch");
  mf.sg = sg;
  mf.space = space;
  mf.hp = hp;
  return mf;
}

ModelFile to_model_file(const ClassModel& model, const std::vector<std::string>& names) {
  ModelFile mf = to_model_file(model.graph(), model.space(), model.hyper_params(), names);
  mf.class_id = model.class_id();
  mf.counts = model.clique_histograms();
  return mf;
}

ModelFile to_model_file(const GeneratingModel& model, const std::vector<std::string>& names) {
  ModelFile mf = to_model_file(model.sg, model.space, HyperParams{}, names);
  mf.tables = model.cliques;
  return mf;
}

ClassModel to_class_model(const ModelFile& file) {
  const JunctionTree tree = junction_tree(file.sg.graph);
  std::vector<Histogram> hists;
  for (const auto& clique : tree.cliques) {
    const std::vector<Node> nodes(clique.begin(), clique.end());
    const auto it = std::find_if(file.counts.begin(), file.counts.end(), [&](const Histogram& h) {
      NodeSet s(h.nodes.begin(), h.nodes.end());
      std::sort(s.begin(), s.end());
      return s == clique;
    });
    if (it == file.counts.end()) {
      if (!file.counts.empty()) throw DataValidationError("model: counts missing for a junction-tree clique");
      Histogram h;
      h.nodes = nodes;
      std::int64_t cells = 1;
      for (Node v : nodes) {
        h.cardinalities.push_back(file.space.cardinality(v));
        cells *= h.cardinalities.back();
      }
      h.counts = decltype(h.counts)::Zero(cells);
      hists.push_back(std::move(h));
    } else {
      hists.push_back(it->nodes == nodes ? *it : marginalize(*it, nodes));
    }
  }
  const std::int64_t total = hists.empty() ? 0 : hists.front().total();
  for (const auto& h : hists) {
    if (h.total() != total) throw DataValidationError("model: clique histograms disagree on the row count");
  }
  return ClassModel::from_histograms(file.class_id.value_or(1), file.sg, file.space, file.hp, std::move(hists));
}

GeneratingModel to_generating_model(const ModelFile& file) {
  if (file.tables.empty()) throw DataValidationError("model: no generating tables");
  GeneratingModel gm{file.sg, file.space, file.tables};
  gm.validate();
  return gm;
}

void write_trace(std::ostream& out, const std::vector<SearchStep>& trace) {
  out << "iteration,move,log_score\n";
  out.precision(17);
  for (const auto& s : trace) out << s.iteration << ',' << s.move << ',' << s.score << '\n';
}

}  // namespace sgmc
