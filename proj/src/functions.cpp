#include "carnot/functions.hpp"

#include "carnot/errors.hpp"
#include "carnot/poly_calc.hpp"

#include <algorithm>
#include <cmath>

namespace carnot {

namespace {

std::vector<double> param(const FunctionParams& params, const std::string& key, std::vector<double> fallback,
                          std::size_t expected) {
  const auto it = params.find(key);
  std::vector<double> v = it == params.end() ? std::move(fallback) : it->second;
  if (expected != 0 && v.size() != expected) {
    throw ParseError("parameter '" + key + "' needs " + std::to_string(expected) + " values, got " +
                     std::to_string(v.size()));
  }
  return v;
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void reject_unknown(const FunctionParams& params, std::initializer_list<const char*> known) {
  for (const auto& [key, _] : params) {
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
      throw ParseError("unknown parameter '" + key + "'");
    }
  }
}

}  // namespace

const std::vector<FunctionInfo>& function_catalog() {
  static const std::vector<FunctionInfo> catalog{
      {"affine", "c + <q, pi_1 x>", true, true, false},
      {"horizontal-quadratic", "|pi_1 x|^2", true, false, false},
      {"mixed", "|pi_1 x|^2 + alpha x_{m1+1}", true, false, true},
      {"polyhedral", "max_k (<q_k, pi_1 x> + c_k)", false, true, false},
      {"one-norm", "sum_i |x_i| over horizontal coordinates", false, true, false},
      {"abs-x1", "|x_1|", false, true, false},
      {"log-sum-exp", "log sum_i (e^{x_i} + e^{-x_i}) over horizontal coordinates", true, false, false},
      {"euclidean-quadratic", "1/2 <S pi_1 x, pi_1 x>", true, false, false},
  };
  return catalog;
}

const FunctionInfo& function_info(const std::string& name) {
  for (const auto& info : function_catalog()) {
    if (info.name == name) return info;
  }
  throw ParseError("unknown function '" + name + "'");
}

ScalarField make_function(const std::string& name, GroupPtr g, const FunctionParams& params) {
  const auto& info = function_info(name);
  const int m1 = g->horizontal_dim();
  const auto m = static_cast<std::size_t>(m1);
  ScalarField u;
  u.group = g;
  u.label = name;

  if (name == "affine") {
    reject_unknown(params, {"q", "c"});
    std::vector<double> def(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) def[i] = 1.0 / static_cast<double>(i + 1) * (i % 2 ? -1.0 : 1.0);
    const Vec q = to_vec(param(params, "q", def, m));
    const double c = param(params, "c", {0.0}, 1)[0];
    u.value = [q, c, m1](const Vec& x) { return c + q.dot(x.head(m1)); };
    u.gradient = [q](const Vec&) { return q; };
  } else if (name == "horizontal-quadratic") {
    reject_unknown(params, {});
    u.value = [m1](const Vec& x) { return x.head(m1).squaredNorm(); };
    u.gradient = [m1](const Vec& x) { return Vec(2.0 * x.head(m1)); };
  } else if (name == "mixed") {
    reject_unknown(params, {"alpha"});
    if (g->step() < 2) throw ParseError("'mixed' needs a group of step >= 2");
    const double alpha = param(params, "alpha", {1.0}, 1)[0];
    const auto& fields = g->fields();
    std::vector<Polynomial> coeff;
    for (int i = 0; i < m1; ++i) coeff.push_back(fields.a[static_cast<std::size_t>(i)][m]);
    u.value = [alpha, m1](const Vec& x) { return x.head(m1).squaredNorm() + alpha * x[m1]; };
    // X_i u = 2 x_i + alpha a^{m1+1}_i(x)
    u.gradient = [alpha, m1, coeff](const Vec& x) {
      Vec grad(m1);
      for (int i = 0; i < m1; ++i) grad[i] = 2.0 * x[i] + alpha * coeff[static_cast<std::size_t>(i)].evaluate(x);
      return grad;
    };
  } else if (name == "polyhedral") {
    reject_unknown(params, {"slopes", "offsets"});
    std::vector<double> slopes_def;
    std::vector<double> offsets_def;
    for (int i = 0; i < m1; ++i) {
      for (double s : {1.0, -1.0}) {
        for (int k = 0; k < m1; ++k) slopes_def.push_back(k == i ? s : 0.0);
        offsets_def.push_back(0.0);
      }
    }
    for (int k = 0; k < m1; ++k) slopes_def.push_back(0.5);
    offsets_def.push_back(0.25);
    const auto offsets = param(params, "offsets", offsets_def, 0);
    const auto slopes = param(params, "slopes", slopes_def, offsets.size() * m);
    if (offsets.empty()) throw ParseError("'polyhedral' needs at least one piece");
    const Mat q = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        slopes.data(), static_cast<Eigen::Index>(offsets.size()), m1);
    const Vec c = to_vec(offsets);
    u.value = [q, c, m1](const Vec& x) { return (q * x.head(m1) + c).maxCoeff(); };
  } else if (name == "one-norm") {
    reject_unknown(params, {});
    u.value = [m1](const Vec& x) { return x.head(m1).lpNorm<1>(); };
  } else if (name == "abs-x1") {
    reject_unknown(params, {});
    u.value = [](const Vec& x) { return std::abs(x[0]); };
  } else if (name == "log-sum-exp") {
    reject_unknown(params, {});
    u.value = [m1](const Vec& x) {
      // Shifted by the largest exponent for stability.
      const double top = x.head(m1).cwiseAbs().maxCoeff();
      double s = 0.0;
      for (int i = 0; i < m1; ++i) s += std::exp(x[i] - top) + std::exp(-x[i] - top);
      return top + std::log(s);
    };
    u.gradient = [m1](const Vec& x) {
      const double top = x.head(m1).cwiseAbs().maxCoeff();
      double s = 0.0;
      Vec grad(m1);
      for (int i = 0; i < m1; ++i) {
        const double a = std::exp(x[i] - top);
        const double b = std::exp(-x[i] - top);
        s += a + b;
        grad[i] = a - b;
      }
      return Vec(grad / s);
    };
  } else if (name == "euclidean-quadratic") {
    reject_unknown(params, {"S"});
    std::vector<double> def(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      def[i * m + i] = 2.0 - static_cast<double>(i % 2);
      if (i + 1 < m) def[i * m + i + 1] = def[(i + 1) * m + i] = 0.5;
    }
    const auto flat = param(params, "S", def, m * m);
    const Mat s = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        flat.data(), m1, m1);
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw ParseError("'S' must be symmetric");
    u.value = [s, m1](const Vec& x) { return 0.5 * x.head(m1).dot(s * x.head(m1)); };
    u.gradient = [s, m1](const Vec& x) { return Vec(s * x.head(m1)); };
  }
  if (info.needs_second_layer && g->step() < 2) throw ParseError("'" + name + "' needs a group of step >= 2");
  return u;
}

CertifiedFunction register_function(const std::string& name, GroupPtr g, const FunctionParams& params,
                                    const SamplingPlan& plan) {
  CertifiedFunction out{make_function(name, g, params), function_info(name), {}};
  SamplingPlan coarse = plan;
  coarse.convexity_samples = 64;
  out.certificate = hconvexity_check(out.field, coarse);
  if (out.certificate.max_violation > plan.tol.convexity) {
    throw ConvexityError("registry function '" + name + "' failed its h-convexity certificate");
  }
  return out;
}

ScalarField polynomial_field(GroupPtr g, Polynomial p, std::string label) {
  ScalarField u;
  u.label = std::move(label);
  u.value = [p](const Vec& x) { return p.evaluate(x); };
  if (g->validated()) {
    std::vector<Polynomial> grads;
    for (int j = 0; j < g->horizontal_dim(); ++j) grads.push_back(apply_field(*g, j, p));
    u.gradient = [grads](const Vec& x) {
      Vec out(static_cast<Eigen::Index>(grads.size()));
      for (std::size_t j = 0; j < grads.size(); ++j) out[static_cast<Eigen::Index>(j)] = grads[j].evaluate(x);
      return out;
    };
  }
  u.group = std::move(g);
  return u;
}

ScalarField compose_fields(const std::string& op, const std::vector<ScalarField>& terms) {
  if (terms.empty()) throw ParseError("composition needs at least one term");
  if (op != "max" && op != "sum") throw ParseError("composition must be 'max' or 'sum', got '" + op + "'");
  ScalarField u;
  u.group = terms.front().group;
  for (const auto& t : terms) {
    if (t.group != u.group) throw DescriptorMismatch("composed fields live on different groups");
  }
  u.label = op + "(";
  for (std::size_t i = 0; i < terms.size(); ++i) u.label += (i ? "," : "") + terms[i].label;
  u.label += ")";
  const bool is_max = op == "max";
  u.value = [terms, is_max](const Vec& x) {
    double acc = terms.front()(x);
    for (std::size_t i = 1; i < terms.size(); ++i) acc = is_max ? std::max(acc, terms[i](x)) : acc + terms[i](x);
    return acc;
  };
  if (std::any_of(terms.begin(), terms.end(), [](const ScalarField& t) { return static_cast<bool>(t.domain); })) {
    u.domain = [terms](const Vec& x) {
      return std::all_of(terms.begin(), terms.end(), [&](const ScalarField& t) { return t.contains(x); });
    };
  }
  const bool all_grad =
      std::all_of(terms.begin(), terms.end(), [](const ScalarField& t) { return t.has_gradient(); });
  if (!is_max && all_grad) {
    u.gradient = [terms](const Vec& x) {
      Vec acc = terms.front().gradient(x);
      for (std::size_t i = 1; i < terms.size(); ++i) acc += terms[i].gradient(x);
      return acc;
    };
  }
  return u;
}

}  // namespace carnot
