#pragma once

#include "carnot/hconvex.hpp"
#include "carnot/polynomial.hpp"

#include <map>
#include <string>
#include <vector>

namespace carnot {

/// Named numeric parameters of a registry function; matrices are given
/// row-major as flat lists.
using FunctionParams = std::map<std::string, std::vector<double>>;

struct FunctionInfo {
  std::string name;
  std::string description;
  bool smooth = false;      // C^2 everywhere, analytic gradient provided
  bool polyhedral = false;  // piecewise affine along horizontal lines
  bool needs_second_layer = false;
};

/// All built-in h-convex test functions:
///   affine               c + <q, pi_1 x>
///   horizontal-quadratic |pi_1 x|^2
///   mixed                |pi_1 x|^2 + alpha x_{m1+1}
///   polyhedral           max_k (<q_k, pi_1 x> + c_k)
///   one-norm             sum_i |x_i| over horizontal coordinates
///   abs-x1               |x_1|
///   log-sum-exp          log sum_i (e^{x_i} + e^{-x_i}) over horizontal coordinates
///   euclidean-quadratic  1/2 <S pi_1 x, pi_1 x>
const std::vector<FunctionInfo>& function_catalog();
const FunctionInfo& function_info(const std::string& name);

/// Builds a registry function on g. Throws ParseError for unknown names or
/// malformed parameters.
ScalarField make_function(const std::string& name, GroupPtr g, const FunctionParams& params = {});

/// A registry function together with its h-convexity certificate.
struct CertifiedFunction {
  ScalarField field;
  FunctionInfo info;
  ConvexityReport certificate;
};

/// Builds the function and runs hconvexity_check at a reduced resolution
/// (the plan's seed, 64 segments). Throws ConvexityError when the
/// certificate exceeds plan.tol.convexity.
CertifiedFunction register_function(const std::string& name, GroupPtr g, const FunctionParams& params = {},
                                    const SamplingPlan& plan = {});

/// Wraps a polynomial as a field with its exact horizontal gradient.
ScalarField polynomial_field(GroupPtr g, Polynomial p, std::string label = "polynomial");

/// Pointwise max or sum of fields over the same group. The sum keeps an
/// analytic gradient when every term has one.
ScalarField compose_fields(const std::string& op, const std::vector<ScalarField>& terms);

}  // namespace carnot
