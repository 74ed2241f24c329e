#include "nsa/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nsa/errors.hpp"

namespace nsa::cli {
namespace {

using nlohmann::json;

const std::set<std::string> kExperiments{"model-spectrum", "check-potential", "eigs",
                                         "resolvent-map", "semigroup-decay", "verify-all"};

void reject_unknown_keys(const json& object, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& item : object.items())
    if (known.find(item.key()) == known.end())
      throw ConfigError("unknown key \"" + item.key() + "\" in " + where);
}

const json& require(const json& object, const std::string& key, const std::string& where) {
  auto it = object.find(key);
  if (it == object.end()) throw ConfigError("missing key \"" + key + "\" in " + where);
  return *it;
}

double as_number(const json& value, const std::string& where) {
  if (!value.is_number()) throw ConfigError(where + " must be a number");
  return value.get<double>();
}

std::int64_t as_integer(const json& value, const std::string& where) {
  if (!value.is_number_integer()) throw ConfigError(where + " must be an integer");
  return value.get<std::int64_t>();
}

Vec as_vector(const json& value, Index dim, const std::string& where) {
  if (!value.is_array() || Index(value.size()) != dim)
    throw ConfigError(where + " must be an array of " + std::to_string(dim) + " numbers");
  Vec v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = as_number(value[size_t(i)], where);
  return v;
}

Mat as_matrix(const json& value, Index dim, const std::string& where) {
  if (!value.is_array() || Index(value.size()) != dim)
    throw ConfigError(where + " must be an array of " + std::to_string(dim) + " rows");
  Mat m(dim, dim);
  for (Index i = 0; i < dim; ++i) m.row(i) = as_vector(value[size_t(i)], dim, where).transpose();
  return m;
}

// coefficients are written [re, im]; a bare number means a real one
Cplx as_complex(const json& value, const std::string& where) {
  if (value.is_number()) return Cplx(value.get<double>(), 0.0);
  if (value.is_array() && value.size() == 2)
    return Cplx(as_number(value[0], where), as_number(value[1], where));
  throw ConfigError(where + " must be a number or a [re, im] pair");
}

potential::PotentialSpec parse_potential(const json& object) {
  if (!object.is_object()) throw ConfigError("potential must be an object");
  reject_unknown_keys(object, {"dim", "a0", "b", "terms", "minima"}, "potential");
  Index dim = as_integer(require(object, "dim", "potential"), "potential.dim");
  if (dim < 1) throw ConfigError("potential.dim must be >= 1");

  Vec a0 = object.contains("a0") ? as_vector(object["a0"], dim, "potential.a0")
                                 : Vec::Zero(dim).eval();
  Mat b = object.contains("b") ? as_matrix(object["b"], dim, "potential.b")
                               : Mat::Zero(dim, dim).eval();

  const json& terms = require(object, "terms", "potential");
  if (!terms.is_array() || terms.empty())
    throw ConfigError("potential.terms must be a nonempty array");
  std::vector<potential::VTerm> v_terms;
  for (const auto& term : terms) {
    if (!term.is_object()) throw ConfigError("potential term must be an object");
    reject_unknown_keys(term, {"coeff", "alpha", "damp"}, "potential term");
    potential::VTerm out;
    out.coeff = as_complex(require(term, "coeff", "potential term"), "term coeff");
    const json& alpha = require(term, "alpha", "potential term");
    if (!alpha.is_array() || Index(alpha.size()) != dim)
      throw ConfigError("term alpha must list one exponent per dimension");
    for (const auto& e : alpha) out.alpha.push_back(int(as_integer(e, "term alpha entry")));
    out.damp = term.contains("damp") ? int(as_integer(term["damp"], "term damp")) : 0;
    v_terms.push_back(std::move(out));
  }

  std::vector<Vec> minima;
  if (object.contains("minima")) {
    if (!object["minima"].is_array()) throw ConfigError("potential.minima must be an array");
    for (const auto& point : object["minima"])
      minima.push_back(as_vector(point, dim, "potential minimum"));
  } else {
    minima.push_back(Vec::Zero(dim));
  }

  try {
    return potential::PotentialSpec(dim, a0, b, v_terms, minima);
  } catch (const Error& err) {
    throw ConfigError(std::string("invalid potential: ") + err.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("config is not valid JSON: ") + err.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown_keys(root,
                      {"experiment", "potential", "grid", "h", "window", "contour",
                       "output_dir", "seed"},
                      "config");

  RunConfig config;
  const json& kind = require(root, "experiment", "config");
  if (!kind.is_string() || kExperiments.find(kind.get<std::string>()) == kExperiments.end())
    throw ConfigError("experiment must be one of model-spectrum, check-potential, eigs, "
                      "resolvent-map, semigroup-decay, verify-all");
  config.experiment = kind.get<std::string>();

  if (config.experiment == "verify-all") {
    if (root.contains("potential")) config.spec = parse_potential(root["potential"]);
  } else {
    config.spec = parse_potential(require(root, "potential", "config"));
  }

  if (root.contains("grid")) {
    const json& grid = root["grid"];
    if (!grid.is_object()) throw ConfigError("grid must be an object");
    reject_unknown_keys(grid, {"L", "N"}, "grid");
    GridConfig g;
    g.half_width = as_number(require(grid, "L", "grid"), "grid.L");
    g.points = as_integer(require(grid, "N", "grid"), "grid.N");
    config.grid = g;
  }
  if (root.contains("h")) {
    if (!root["h"].is_array() || root["h"].empty())
      throw ConfigError("h must be a nonempty array of step values");
    for (const auto& value : root["h"]) {
      double h = as_number(value, "h entry");
      if (h <= 0.0) throw ConfigError("h entries must be positive");
      config.h_values.push_back(h);
    }
  }
  if (root.contains("window")) {
    const json& window = root["window"];
    if (!window.is_object()) throw ConfigError("window must be an object");
    reject_unknown_keys(window, {"C", "a", "delta"}, "window");
    if (window.contains("C")) config.window.search_bound = as_number(window["C"], "window.C");
    if (window.contains("a")) config.window.reference_a = as_number(window["a"], "window.a");
    if (window.contains("delta"))
      config.window.line_half_width = as_number(window["delta"], "window.delta");
  }
  if (root.contains("contour")) {
    const json& contour = root["contour"];
    if (!contour.is_object()) throw ConfigError("contour must be an object");
    reject_unknown_keys(contour, {"radius_factor", "nodes"}, "contour");
    if (contour.contains("radius_factor"))
      config.contour.radius_factor = as_number(contour["radius_factor"], "contour.radius_factor");
    if (contour.contains("nodes"))
      config.contour.nodes = int(as_integer(contour["nodes"], "contour.nodes"));
  }
  if (root.contains("output_dir")) {
    if (!root["output_dir"].is_string()) throw ConfigError("output_dir must be a string");
    config.output_dir = root["output_dir"].get<std::string>();
  }
  if (root.contains("seed")) {
    std::int64_t seed = as_integer(root["seed"], "seed");
    if (seed < 0) throw ConfigError("seed must be nonnegative");
    config.seed = std::uint64_t(seed);
  }

  bool needs_grid = config.experiment == "eigs" || config.experiment == "resolvent-map" ||
                    config.experiment == "semigroup-decay";
  if (needs_grid) {
    if (!config.grid)
      throw ConfigError("experiment " + config.experiment + " requires a grid section");
    if (config.h_values.empty())
      throw ConfigError("experiment " + config.experiment + " requires an h list");
  }
  if (config.grid) {
    if (config.grid->half_width <= 0.0) throw ConfigError("grid.L must be positive");
    if (config.grid->points < 2) throw ConfigError("grid.N must be at least 2");
  }
  if (config.window.search_bound <= 0.0) throw ConfigError("window.C must be positive");
  if (config.window.line_half_width <= 0.0) throw ConfigError("window.delta must be positive");
  if (config.contour.radius_factor <= 0.0)
    throw ConfigError("contour.radius_factor must be positive");
  if (config.contour.nodes < 4) throw ConfigError("contour.nodes must be at least 4");
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string resolved_config_json(const RunConfig& config) {
  json root;
  root["experiment"] = config.experiment;
  root["output_dir"] = config.output_dir;
  root["seed"] = config.seed;
  root["window"] = {{"C", config.window.search_bound},
                    {"a", config.window.reference_a},
                    {"delta", config.window.line_half_width}};
  root["contour"] = {{"radius_factor", config.contour.radius_factor},
                     {"nodes", config.contour.nodes}};
  if (config.grid)
    root["grid"] = {{"L", config.grid->half_width}, {"N", config.grid->points}};
  if (!config.h_values.empty()) root["h"] = config.h_values;
  if (config.spec) {
    const auto& spec = *config.spec;
    json pot;
    pot["dim"] = spec.dim;
    pot["a0"] = std::vector<double>(spec.a0.data(), spec.a0.data() + spec.dim);
    json rows = json::array();
    for (Index i = 0; i < spec.dim; ++i) {
      json row = json::array();
      for (Index j = 0; j < spec.dim; ++j) row.push_back(spec.b(i, j));
      rows.push_back(row);
    }
    pot["b"] = rows;
    json terms = json::array();
    for (const auto& term : spec.v_terms) {
      json t;
      t["coeff"] = {term.coeff.real(), term.coeff.imag()};
      t["alpha"] = term.alpha;
      t["damp"] = term.damp;
      terms.push_back(t);
    }
    pot["terms"] = terms;
    json minima = json::array();
    for (const auto& point : spec.declared_minima)
      minima.push_back(std::vector<double>(point.data(), point.data() + spec.dim));
    pot["minima"] = minima;
    root["potential"] = pot;
  }
  return root.dump(2) + "\n";
}

}  // namespace nsa::cli
