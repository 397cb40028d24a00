#include "isingcut/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace isingcut {
namespace {

using nlohmann::json;

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  return out;
}

json model_json(const IsingModel& model, std::optional<std::uint64_t> seed) {
  json j;
  j["p"] = model.p();
  if (seed) j["seed"] = *seed;
  j["nodes"] = std::vector<double>(model.nodes().begin(), model.nodes().end());
  json edges = json::array();
  for (const auto& [e, value] : model.edges()) edges.push_back(json::array({e.u, e.v, value}));
  j["edges"] = std::move(edges);
  return j;
}

double finite_number(const json& j, const char* what) {
  if (!j.is_number()) throw FormatError(std::string(what) + " must be a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) throw FormatError(std::string(what) + " must be finite");
  return x;
}

json parse(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
}

ModelFile model_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("model file must hold a JSON object");
  if (!j.contains("p") || !j["p"].is_number_integer()) throw FormatError("model file needs an integer p");
  const int p = j["p"].get<int>();
  if (p < 1) throw FormatError("p must be positive");
  ModelFile mf{IsingModel(p), std::nullopt};
  if (j.contains("seed") && !j["seed"].is_null()) {
    if (!j["seed"].is_number_unsigned()) throw FormatError("seed must be a nonnegative integer");
    mf.seed = j["seed"].get<std::uint64_t>();
  }
  const json& nodes = j.value("nodes", json::array());
  if (!nodes.is_array() || (!nodes.empty() && static_cast<int>(nodes.size()) != p)) {
    throw FormatError("nodes must list one field per variable");
  }
  for (std::size_t v = 0; v < nodes.size(); ++v) mf.model.set_node(static_cast<int>(v), finite_number(nodes[v], "node field"));
  const json& edges = j.value("edges", json::array());
  if (!edges.is_array()) throw FormatError("edges must be a list");
  std::set<Edge> seen;
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
      throw FormatError("each edge must be [u, v, theta]");
    }
    const int u = e[0].get<int>();
    const int v = e[1].get<int>();
    if (u < 0 || v < 0 || u >= p || v >= p || u >= v) {
      throw FormatError("edge (" + std::to_string(u) + ", " + std::to_string(v) + ") out of range or not u < v");
    }
    if (!seen.insert({u, v}).second) {
      throw FormatError("duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    mf.model.set_edge(u, v, finite_number(e[2], "edge coupling"));
  }
  return mf;
}

json cut_json(const CycleInequality& c, std::optional<double> violation) {
  json j;
  j["cycle"] = c.cycle;
  json odd = json::array();
  for (const auto& e : c.odd_set) odd.push_back(json::array({e.u, e.v}));
  j["odd_set"] = std::move(odd);
  j["rhs"] = c.rhs;
  if (violation) j["violation"] = *violation;
  return j;
}

}  // namespace

void write_model(std::ostream& out, const IsingModel& model, std::optional<std::uint64_t> seed) {
  out << model_json(model, seed).dump(2) << "\n";
}

ModelFile read_model(std::istream& in) { return model_from_json(parse(in)); }

ModelFile read_model_file(const std::string& path) {
  auto in = open_in(path);
  return read_model(in);
}

void write_model_file(const std::string& path, const IsingModel& model, std::optional<std::uint64_t> seed) {
  auto out = open_out(path);
  write_model(out, model, seed);
}

void write_samples(std::ostream& out, const Dataset& data) {
  validate(data);
  out << "# p=" << data.p << " n=" << data.n << " seed=" << data.seed << "\n";
  std::string line;
  for (int i = 0; i < data.n; ++i) {
    line.clear();
    for (int v = 0; v < data.p; ++v) {
      if (v) line += ' ';
      line += data.at(i, v) > 0 ? "1" : "-1";
    }
    out << line << "\n";
  }
}

Dataset read_samples(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.empty() || header[0] != '#') {
    throw FormatError("samples file must start with '# p=<p> n=<n> seed=<seed>'");
  }
  Dataset data;
  bool has_p = false;
  bool has_n = false;
  std::istringstream hs(header.substr(1));
  std::string token;
  while (hs >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) throw FormatError("bad header token '" + token + "'");
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    try {
      std::size_t used = 0;
      if (key == "p") {
        data.p = std::stoi(value, &used);
        has_p = true;
      } else if (key == "n") {
        data.n = std::stoi(value, &used);
        has_n = true;
      } else if (key == "seed") {
        data.seed = std::stoull(value, &used);
      } else {
        used = value.size();
      }
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw FormatError("bad header value '" + token + "'");
    }
  }
  if (!has_p || !has_n || data.p < 1 || data.n < 0) throw FormatError("header needs positive p and n");

  data.values.reserve(static_cast<std::size_t>(data.p) * static_cast<std::size_t>(data.n));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    int count = 0;
    while (ls >> token) {
      std::int8_t x = 0;
      if (token == "1" || token == "+1") {
        x = 1;
      } else if (token == "-1") {
        x = -1;
      } else {
        throw FormatError("row " + std::to_string(rows + 1) + ": bad spin '" + token + "'");
      }
      data.values.push_back(x);
      ++count;
    }
    if (count == 0) continue;
    if (count != data.p) {
      throw FormatError("row " + std::to_string(rows + 1) + " has " + std::to_string(count) + " entries, expected " +
                        std::to_string(data.p));
    }
    ++rows;
  }
  if (rows != data.n) {
    throw FormatError("expected " + std::to_string(data.n) + " rows, found " + std::to_string(rows));
  }
  data.generator = "file";
  return data;
}

Dataset read_samples_file(const std::string& path) {
  auto in = open_in(path);
  return read_samples(in);
}

void write_samples_file(const std::string& path, const Dataset& data) {
  auto out = open_out(path);
  write_samples(out, data);
}

void write_fit(std::ostream& out, const IsingModel& model, const FitRecord& record) {
  json j = model_json(model, record.seed);
  j["method"] = record.method;
  j["lambda"] = record.lambda;
  j["rounds"] = record.rounds;
  j["objective"] = record.objective;
  j["round_objectives"] = record.round_objectives;
  j["converged"] = record.converged;
  if (record.fitted_means) {
    const auto& eta = *record.fitted_means;
    j["fitted_means"] = {{"nodes", std::vector<double>(eta.node_means().begin(), eta.node_means().end())},
                         {"pairs", std::vector<double>(eta.pair_means().begin(), eta.pair_means().end())}};
  }
  json cuts = json::array();
  for (std::size_t i = 0; i < record.cuts.size(); ++i) {
    cuts.push_back(cut_json(record.cuts[i], i < record.cut_violations.size()
                                                  ? std::optional<double>(record.cut_violations[i])
                                                  : std::nullopt));
  }
  j["cuts"] = std::move(cuts);
  j["config"] = record.config_json.empty() ? json::object() : json::parse(record.config_json);
  out << j.dump(2) << "\n";
}

void write_fit_file(const std::string& path, const IsingModel& model, const FitRecord& record) {
  auto out = open_out(path);
  write_fit(out, model, record);
}

std::vector<CycleInequality> read_fit_cuts(std::istream& in) {
  const json j = parse(in);
  if (!j.is_object() || !j.contains("p")) throw FormatError("fit file must hold a JSON object with p");
  const int p = j["p"].get<int>();
  std::vector<CycleInequality> cuts;
  for (const auto& c : j.value("cuts", json::array())) {
    try {
      std::vector<Edge> odd;
      for (const auto& e : c.at("odd_set")) odd.push_back(make_edge(e.at(0).get<int>(), e.at(1).get<int>()));
      cuts.push_back(cycle_to_matrix(c.at("cycle").get<std::vector<int>>(), odd, p));
    } catch (const json::exception& e) {
      throw FormatError(std::string("malformed cut: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("invalid cut: ") + e.what());
    }
  }
  return cuts;
}

std::vector<CycleInequality> read_fit_cuts_file(const std::string& path) {
  auto in = open_in(path);
  return read_fit_cuts(in);
}

void write_cuts(std::ostream& out, const std::vector<CycleInequality>& cuts, const std::vector<double>& violations) {
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const auto& c = cuts[i];
    out << "cycle=";
    for (std::size_t k = 0; k < c.cycle.size(); ++k) out << (k ? "," : "") << c.cycle[k];
    out << " F=";
    for (std::size_t k = 0; k < c.odd_set.size(); ++k) out << (k ? "," : "") << c.odd_set[k].u << "-" << c.odd_set[k].v;
    out << " b=" << c.rhs;
    if (i < violations.size()) out << " violation=" << violations[i];
    out << "\n";
  }
}

}  // namespace isingcut
