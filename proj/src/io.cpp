#include "carnot/io.hpp"

#include "carnot/builtin_groups.hpp"
#include "carnot/errors.hpp"
#include "carnot/functions.hpp"

#include "json.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace carnot {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what + ": " + e.what());
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& what) {
  if (!j.contains(key)) throw ParseError(what + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(what + ": field '" + key + "' has the wrong type");
  }
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& what) {
  if (!j.is_object()) throw ParseError(what + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
      throw ParseError(what + ": unknown field '" + key + "'");
    }
  }
}

Polynomial polynomial_from_json(const json& j, const Group& g) {
  const std::string what = "polynomial spec";
  only_keys(j, {"polynomial"}, what);
  if (!j["polynomial"].is_array()) throw ParseError(what + ": 'polynomial' must be a list of terms");
  Polynomial p(g.degrees());
  for (const auto& term : j["polynomial"]) {
    only_keys(term, {"exponents", "coeff"}, "polynomial term");
    const auto e = get<std::vector<int>>(term, "exponents", "polynomial term");
    if (static_cast<int>(e.size()) != g.dim()) throw ParseError("polynomial term: exponent length must equal the group dimension");
    if (std::any_of(e.begin(), e.end(), [](int v) { return v < 0; })) throw ParseError("polynomial term: negative exponent");
    p.add_term(e, get<double>(term, "coeff", "polynomial term"));
  }
  return p;
}

ScalarField function_from_json(const json& j, const GroupPtr& g) {
  const std::string what = "function spec";
  if (j.is_string()) return make_function(j.get<std::string>(), g);
  if (!j.is_object()) throw ParseError(what + ": expected an object or a name");
  if (j.contains("builtin")) {
    only_keys(j, {"builtin", "params"}, what);
    FunctionParams params;
    if (j.contains("params")) {
      if (!j["params"].is_object()) throw ParseError(what + ": 'params' must be an object");
      for (const auto& [key, value] : j["params"].items()) {
        if (value.is_number()) {
          params[key] = {value.get<double>()};
        } else if (value.is_array() && std::all_of(value.begin(), value.end(), [](const json& v) { return v.is_number(); })) {
          params[key] = value.get<std::vector<double>>();
        } else {
          throw ParseError(what + ": parameter '" + key + "' must be a number or a list of numbers");
        }
      }
    }
    return make_function(get<std::string>(j, "builtin", what), g, params);
  }
  if (j.contains("polynomial")) return polynomial_field(g, polynomial_from_json(j, *g));
  if (j.contains("composition")) {
    only_keys(j, {"composition", "terms"}, what);
    std::vector<ScalarField> terms;
    const auto list = j.contains("terms") ? j["terms"] : json::array();
    if (!list.is_array()) throw ParseError(what + ": 'terms' must be a list");
    for (const auto& t : list) terms.push_back(function_from_json(t, g));
    return compose_fields(get<std::string>(j, "composition", what), terms);
  }
  throw ParseError(what + ": expected one of 'builtin', 'polynomial', 'composition'");
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

GroupDescriptor parse_descriptor(const std::string& text) {
  const std::string what = "group descriptor";
  const json j = parse_json(text, what);
  only_keys(j, {"name", "layers", "brackets"}, what);
  GroupDescriptor d;
  d.name = j.contains("name") ? get<std::string>(j, "name", what) : "custom";
  d.layers = get<std::vector<int>>(j, "layers", what);
  const json brackets = j.contains("brackets") ? j["brackets"] : json::array();
  if (!brackets.is_array()) throw ParseError(what + ": 'brackets' must be a list");
  for (const auto& b : brackets) {
    only_keys(b, {"i", "j", "k", "c"}, "bracket");
    BracketEntry e;
    e.i = get<int>(b, "i", "bracket") - 1;
    e.j = get<int>(b, "j", "bracket") - 1;
    e.k = get<int>(b, "k", "bracket") - 1;
    e.c = b.contains("c") ? get<double>(b, "c", "bracket") : 1.0;
    d.brackets.push_back(e);
  }
  return d;
}

GroupDescriptor load_descriptor(const std::string& path) { return parse_descriptor(read_file(path)); }

GroupPtr load_group(const std::string& spec, bool force) {
  if (std::filesystem::exists(spec)) return Group::create(load_descriptor(spec), force);
  return Group::create(builtin_group(spec), force);
}

ScalarField load_function(const std::string& spec, GroupPtr g) {
  if (spec.empty()) throw ParseError("no function given");
  if (spec.front() == '{') return function_from_json(parse_json(spec, "function spec"), g);
  if (std::filesystem::exists(spec)) return function_from_json(parse_json(read_file(spec), "function spec"), g);
  return make_function(spec, g);
}

Polynomial load_polynomial(const std::string& spec, const Group& g) {
  if (spec.empty()) throw ParseError("no polynomial given");
  const std::string text = spec.front() == '{' ? spec : read_file(spec);
  return polynomial_from_json(parse_json(text, "polynomial spec"), g);
}

SamplingPlan parse_plan(const std::string& text) {
  const std::string what = "sampling plan";
  const json j = parse_json(text, what);
  only_keys(j, {"radii", "samples_per_shell", "fd_step", "directions", "seed", "sample_radius", "probe_radius",
                "probe_levels", "convexity_samples", "lambda_grid", "tol"},
            what);
  SamplingPlan p;
  if (j.contains("radii")) p.radii = get<std::vector<double>>(j, "radii", what);
  if (j.contains("samples_per_shell")) p.samples_per_shell = get<int>(j, "samples_per_shell", what);
  if (j.contains("fd_step")) p.fd_step = get<double>(j, "fd_step", what);
  if (j.contains("directions")) p.directions = get<int>(j, "directions", what);
  if (j.contains("seed")) p.seed = get<std::uint64_t>(j, "seed", what);
  if (j.contains("sample_radius")) p.sample_radius = get<double>(j, "sample_radius", what);
  if (j.contains("probe_radius")) p.probe_radius = get<double>(j, "probe_radius", what);
  if (j.contains("probe_levels")) p.probe_levels = get<int>(j, "probe_levels", what);
  if (j.contains("convexity_samples")) p.convexity_samples = get<int>(j, "convexity_samples", what);
  if (j.contains("lambda_grid")) p.lambda_grid = get<std::vector<double>>(j, "lambda_grid", what);
  if (j.contains("tol")) {
    const json& t = j["tol"];
    only_keys(t, {"membership", "singleton", "fd_stability", "mvt_gap", "monotone", "convexity"}, "plan tolerances");
    if (t.contains("membership")) p.tol.membership = get<double>(t, "membership", what);
    if (t.contains("singleton")) p.tol.singleton = get<double>(t, "singleton", what);
    if (t.contains("fd_stability")) p.tol.fd_stability = get<double>(t, "fd_stability", what);
    if (t.contains("mvt_gap")) p.tol.mvt_gap = get<double>(t, "mvt_gap", what);
    if (t.contains("monotone")) p.tol.monotone = get<double>(t, "monotone", what);
    if (t.contains("convexity")) p.tol.convexity = get<double>(t, "convexity", what);
  }
  try {
    p.validate();
  } catch (const SamplingError& e) {
    throw ParseError(what + ": " + e.what());
  }
  return p;
}

SamplingPlan load_plan(const std::string& path) { return parse_plan(read_file(path)); }

Vec parse_point(const std::string& text, int dim) {
  std::vector<double> coords;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw ParseError("point: '" + item + "' is not a number");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v)) {
      throw ParseError("point: '" + item + "' is not a finite number");
    }
    coords.push_back(v);
  }
  if (static_cast<int>(coords.size()) != dim) {
    throw ParseError("point: expected " + std::to_string(dim) + " coordinates, got " + std::to_string(coords.size()));
  }
  return Eigen::Map<Vec>(coords.data(), dim);
}

}  // namespace carnot
