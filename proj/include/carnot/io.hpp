#pragma once

#include "carnot/group.hpp"
#include "carnot/hconvex.hpp"
#include "carnot/polynomial.hpp"

#include <string>

namespace carnot {

/// Descriptor text: {"name": ..., "layers": [...], "brackets": [{"i", "j",
/// "k", "c"}, ...]} with 1-based indices. Throws ParseError.
GroupDescriptor parse_descriptor(const std::string& text);
GroupDescriptor load_descriptor(const std::string& path);

/// A built-in spec ("heisenberg:2", "engel", ...) or a descriptor file.
/// Files failing validation are rejected with InvalidDescriptor unless
/// `force` is set.
GroupPtr load_group(const std::string& spec, bool force = false);

/// Function spec: a registry name, a path to a JSON file, or inline JSON
/// (text starting with '{'). The JSON forms are
///   {"builtin": name, "params": {key: number | [numbers]}}
///   {"polynomial": [{"exponents": [...], "coeff": c}, ...]}
///   {"composition": "max" | "sum", "terms": [spec, ...]}
/// Throws ParseError.
ScalarField load_function(const std::string& spec, GroupPtr g);

/// Inline JSON or a file holding {"polynomial": [...]} as above.
Polynomial load_polynomial(const std::string& spec, const Group& g);

/// Sampling plan overrides from a JSON file; absent keys keep defaults.
/// Throws ParseError for unknown keys or invalid values.
SamplingPlan load_plan(const std::string& path);
SamplingPlan parse_plan(const std::string& text);

/// Comma-separated coordinates. Throws ParseError when the length is not
/// `dim` or a coordinate is not a finite number.
Vec parse_point(const std::string& text, int dim);

std::string read_file(const std::string& path);

}  // namespace carnot
