#pragma once

// Laboratory configuration: a typed struct with a canonical JSON form
// (embedded verbatim in every artifact) and a human-editable dotted-key
// text form.  Both parse to the same struct; unknown keys are rejected so
// typos fail loudly.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "arflab/covariance.hpp"
#include "arflab/field.hpp"
#include "arflab/params.hpp"

namespace arflab {

struct ModelSpec {
  std::string kind = "iid";            // iid | moving_average
  std::string innovation = "gaussian"; // gaussian | centered_exponential | rademacher
  std::vector<Index> kernel_extent = {};
  std::vector<double> kernel_weights = {};
};

struct CovarianceSpec {
  std::string kind = "from_model";  // from_model | iid | product_geometric | power
  double sigma0sq = 1.0;
  double a = 0.5;
  double c = 1.0;
  double p = 5.0;
};

struct ExperimentSpec {
  std::vector<Index> extent = {532, 532};
  std::vector<std::vector<Index>> scales = {{3, 3}, {4, 4}, {5, 5}};
  int replicates = 50;
  std::size_t cdf_replicates = 2000;
  double epsilon = 0.05;
  bool identity_coupling = false;
  std::vector<std::string> checks = {"clt", "moment", "maximal", "lil", "terms"};
  std::vector<Index> check_sizes = {4, 16, 64};
  int check_replicates = 5000;
  std::vector<Index> gap_sides = {8, 16, 32, 64, 128};
  Index u_max = 8;
  std::vector<Index> kmax = {5, 5};
};

struct LabConfig {
  int artifact_version = 1;
  int dimension = 2;
  std::uint64_t master_seed = 20260809;
  std::string output_dir = "out";
  unsigned threads = 0;
  Index boundary_cap = 600;
  ModelSpec model;
  CovarianceSpec covariance;
  Parameters geometry;  // d mirrored from dimension on parse
  ExperimentSpec experiment;
};

namespace cfg_detail {

using nlohmann::json;

inline void reject_unknown(const json& j, std::initializer_list<const char*> known,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace cfg_detail

inline nlohmann::json to_json(const LabConfig& c) {
  nlohmann::json j;
  j["artifact_version"] = c.artifact_version;
  j["dimension"] = c.dimension;
  j["master_seed"] = c.master_seed;
  j["output_dir"] = c.output_dir;
  j["threads"] = c.threads;
  j["boundary_cap"] = c.boundary_cap;
  j["model"] = {{"kind", c.model.kind},
                {"innovation", c.model.innovation},
                {"kernel_extent", c.model.kernel_extent},
                {"kernel_weights", c.model.kernel_weights}};
  j["covariance"] = {{"kind", c.covariance.kind},
                     {"sigma0sq", c.covariance.sigma0sq},
                     {"a", c.covariance.a},
                     {"c", c.covariance.c},
                     {"p", c.covariance.p}};
  j["geometry"] = {{"alpha", c.geometry.alpha}, {"beta", c.geometry.beta},
                   {"tau", c.geometry.tau},     {"r", c.geometry.r},
                   {"delta", c.geometry.delta}, {"lambda", c.geometry.lambda},
                   {"nu", c.geometry.nu},       {"sigma0sq", c.geometry.sigma0sq}};
  j["experiment"] = {{"extent", c.experiment.extent},
                     {"scales", c.experiment.scales},
                     {"replicates", c.experiment.replicates},
                     {"cdf_replicates", c.experiment.cdf_replicates},
                     {"epsilon", c.experiment.epsilon},
                     {"identity_coupling", c.experiment.identity_coupling},
                     {"checks", c.experiment.checks},
                     {"check_sizes", c.experiment.check_sizes},
                     {"check_replicates", c.experiment.check_replicates},
                     {"gap_sides", c.experiment.gap_sides},
                     {"u_max", c.experiment.u_max},
                     {"kmax", c.experiment.kmax}};
  return j;
}

inline LabConfig config_from_json(const nlohmann::json& j) {
  using cfg_detail::maybe;
  using cfg_detail::reject_unknown;
  LabConfig c;
  reject_unknown(j, {"artifact_version", "dimension", "master_seed", "output_dir", "threads",
                     "boundary_cap", "model", "covariance", "geometry", "experiment"},
                 "top level");
  maybe(j, "artifact_version", c.artifact_version);
  maybe(j, "dimension", c.dimension);
  maybe(j, "master_seed", c.master_seed);
  maybe(j, "output_dir", c.output_dir);
  maybe(j, "threads", c.threads);
  maybe(j, "boundary_cap", c.boundary_cap);
  if (j.contains("model")) {
    const auto& m = j.at("model");
    reject_unknown(m, {"kind", "innovation", "kernel_extent", "kernel_weights"}, "model");
    maybe(m, "kind", c.model.kind);
    maybe(m, "innovation", c.model.innovation);
    maybe(m, "kernel_extent", c.model.kernel_extent);
    maybe(m, "kernel_weights", c.model.kernel_weights);
  }
  if (j.contains("covariance")) {
    const auto& v = j.at("covariance");
    reject_unknown(v, {"kind", "sigma0sq", "a", "c", "p"}, "covariance");
    maybe(v, "kind", c.covariance.kind);
    maybe(v, "sigma0sq", c.covariance.sigma0sq);
    maybe(v, "a", c.covariance.a);
    maybe(v, "c", c.covariance.c);
    maybe(v, "p", c.covariance.p);
  }
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    reject_unknown(g, {"alpha", "beta", "tau", "r", "delta", "lambda", "nu", "sigma0sq"},
                   "geometry");
    maybe(g, "alpha", c.geometry.alpha);
    maybe(g, "beta", c.geometry.beta);
    maybe(g, "tau", c.geometry.tau);
    maybe(g, "r", c.geometry.r);
    maybe(g, "delta", c.geometry.delta);
    maybe(g, "lambda", c.geometry.lambda);
    maybe(g, "nu", c.geometry.nu);
    maybe(g, "sigma0sq", c.geometry.sigma0sq);
  }
  if (j.contains("experiment")) {
    const auto& e = j.at("experiment");
    reject_unknown(e,
                   {"extent", "scales", "replicates", "cdf_replicates", "epsilon",
                    "identity_coupling", "checks", "check_sizes", "check_replicates",
                    "gap_sides", "u_max", "kmax"},
                   "experiment");
    maybe(e, "extent", c.experiment.extent);
    maybe(e, "scales", c.experiment.scales);
    maybe(e, "replicates", c.experiment.replicates);
    maybe(e, "cdf_replicates", c.experiment.cdf_replicates);
    maybe(e, "epsilon", c.experiment.epsilon);
    maybe(e, "identity_coupling", c.experiment.identity_coupling);
    maybe(e, "checks", c.experiment.checks);
    maybe(e, "check_sizes", c.experiment.check_sizes);
    maybe(e, "check_replicates", c.experiment.check_replicates);
    maybe(e, "gap_sides", c.experiment.gap_sides);
    maybe(e, "u_max", c.experiment.u_max);
    maybe(e, "kmax", c.experiment.kmax);
  }
  c.geometry.d = c.dimension;
  return c;
}

/// Dotted-key text form: one `a.b.c = value` per line, values in JSON
/// syntax, '#' comments.  Converted to the canonical JSON and parsed.
inline LabConfig config_from_text(const std::string& text) {
  nlohmann::json j = nlohmann::json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::invalid_argument("config text: expected 'key = value' at line " +
                                    std::to_string(lineno));
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("config text: empty key or value at line " +
                                  std::to_string(lineno));
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(value);
    } catch (const nlohmann::json::parse_error&) {
      parsed = value;  // bare strings allowed
    }
    nlohmann::json* node = &j;
    std::size_t start = 0;
    while (true) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot - start);
      if (dot == std::string::npos) {
        (*node)[part] = parsed;
        break;
      }
      node = &(*node)[part];
      start = dot + 1;
    }
  }
  return config_from_json(j);
}

inline LabConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return config_from_json(nlohmann::json::parse(text));
  return config_from_text(text);
}

/// Field model from the config.
inline FieldModel make_field_model(const LabConfig& c) {
  Innovation law;
  if (c.model.innovation == "gaussian") law = Innovation::Gaussian;
  else if (c.model.innovation == "centered_exponential") law = Innovation::CenteredExponential;
  else if (c.model.innovation == "rademacher") law = Innovation::Rademacher;
  else throw std::invalid_argument("config: unknown innovation '" + c.model.innovation + "'");

  if (c.model.kind == "iid") return FieldModel::iid(c.dimension, law);
  if (c.model.kind == "moving_average") {
    Kernel k{MultiIndex(c.model.kernel_extent), c.model.kernel_weights};
    return FieldModel::moving_average(std::move(k), law);
  }
  throw std::invalid_argument("config: unknown model kind '" + c.model.kind + "'");
}

/// Covariance model from the config; "from_model" derives the exact
/// autocovariance of the configured field.
inline CovarianceModel make_covariance_model(const LabConfig& c) {
  const auto& v = c.covariance;
  if (v.kind == "from_model") return make_field_model(c).covariance();
  if (v.kind == "iid") return CovarianceModel::iid(c.dimension, v.sigma0sq);
  if (v.kind == "product_geometric")
    return CovarianceModel::product_geometric(c.dimension, v.sigma0sq, v.a);
  if (v.kind == "power") return CovarianceModel::power(c.dimension, v.c, v.p);
  throw std::invalid_argument("config: unknown covariance kind '" + v.kind + "'");
}

inline BlockGeometry make_geometry(const LabConfig& c) {
  Parameters p = c.geometry;
  p.d = c.dimension;
  return BlockGeometry(p, c.boundary_cap);
}

}  // namespace arflab
