#include "carnot/commands.hpp"

#include "carnot/builtin_groups.hpp"
#include "carnot/errors.hpp"
#include "carnot/functions.hpp"
#include "carnot/hconvex.hpp"
#include "carnot/io.hpp"
#include "carnot/poly_calc.hpp"
#include "carnot/second_order.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <random>

namespace carnot {

namespace {

using ojson = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Headline tolerances of the checks emitted below.
constexpr double kLawTol = 1e-12;
constexpr double kExactTol = 1e-14;
constexpr double kAlijTol = 1e-10;
constexpr double kHessTol = 1e-9;
constexpr double kSquareTol = 5e-2;
constexpr double kDermaxTol = 1e-2;
constexpr double kSubadditiveTol = 1e-6;
constexpr double kMvtSmoothTol = 1e-8;
constexpr double kMvtPolyhedralTol = 1e-4;
constexpr double kKinkDiameter = 1.9;
constexpr double kEuclideanTol = 1e-4;
constexpr double kSymmetryTol = 1e-6;
constexpr double kPsdTol = 1e-6;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

ojson to_json(const Vec& v) {
  auto out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

ojson to_json(const Mat& m) {
  auto out = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(to_json(Vec(m.row(i).transpose())));
  return out;
}

double sup(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::string plan_string(const SamplingPlan& p) {
  std::string s = "radii=";
  for (double r : p.radii) s += fmt(r) + " ";
  s += ";shell=" + std::to_string(p.samples_per_shell) + ";fd=" + fmt(p.fd_step) +
       ";dirs=" + std::to_string(p.directions) + ";seed=" + std::to_string(p.seed) + ";R=" + fmt(p.sample_radius) +
       ";probe=" + fmt(p.probe_radius) + "x" + std::to_string(p.probe_levels) +
       ";conv=" + std::to_string(p.convexity_samples) + ";lambda=";
  for (double l : p.lambda_grid) s += fmt(l) + " ";
  const auto& t = p.tol;
  s += ";tol=" + fmt(t.membership) + "," + fmt(t.singleton) + "," + fmt(t.fd_stability) + "," + fmt(t.mvt_gap) + "," +
       fmt(t.monotone) + "," + fmt(t.convexity);
  return s;
}

/// Everything a check needs besides its own parameters.
struct Env {
  const RunConfig& cfg;
  GroupPtr g;
  SamplingPlan plan;
  std::string base;  // canonical description of the run inputs
  Report& report;

  double tol_or(double fallback) const { return cfg.tol.value_or(fallback); }

  std::mt19937_64 rng(std::uint64_t tag) const { return std::mt19937_64(derive_seed(plan.seed, tag)); }

  Vec random_point(std::mt19937_64& rng, int n, double scale = 1.0) const {
    std::uniform_real_distribution<double> unif(-scale, scale);
    Vec x(n);
    for (int i = 0; i < n; ++i) x[i] = unif(rng);
    return x;
  }

  void add(const std::string& id, double metric, double tol, bool pass, ojson details = ojson::object(),
           const std::string& extra = "") const {
    CheckRecord r;
    r.id = id;
    r.inputs = base + ";check=" + id + (extra.empty() ? "" : ";" + extra);
    r.metric = metric;
    r.tolerance = tol;
    r.pass = pass;
    r.details = std::move(details);
    report.add(std::move(r));
  }

  /// Records metric <= tol.
  void add_le(const std::string& id, double metric, double tol, ojson details = ojson::object()) const {
    add(id, metric, tol, metric <= tol, std::move(details));
  }
};

ScalarField require_function(const Env& env) {
  if (env.cfg.function.empty()) throw ParseError("this command needs --fn");
  return load_function(env.cfg.function, env.g);
}

Vec point_arg(const Env& env, std::size_t k, int dim) {
  if (k < env.cfg.points.size()) return parse_point(env.cfg.points[k], dim);
  return Vec::Zero(dim);
}

Vec direction_arg(const Env& env) {
  const int m1 = env.g->horizontal_dim();
  if (env.cfg.points.size() > 1) return parse_point(env.cfg.points[1], m1);
  Vec h = Vec::Zero(m1);
  h[0] = 1.0;
  return h;
}

std::vector<FunctionInfo> applicable_functions(const Group& g) {
  std::vector<FunctionInfo> out;
  for (const auto& info : function_catalog()) {
    if (!info.needs_second_layer || g.step() >= 2) out.push_back(info);
  }
  return out;
}

std::vector<std::string> smooth_names(const Group& g) {
  std::vector<std::string> out;
  for (const auto& info : applicable_functions(g)) {
    if (info.smooth) out.push_back(info.name);
  }
  return out;
}

std::vector<std::string> polyhedral_names(const Group& g) {
  std::vector<std::string> out;
  for (const auto& info : applicable_functions(g)) {
    if (info.polyhedral) out.push_back(info.name);
  }
  return out;
}

/// |pi_1 x|^2 + alpha x_{m1+1} as an exact polynomial (the "mixed" field).
Polynomial mixed_polynomial(const Group& g, double alpha = 1.0) {
  Polynomial p = zero_polynomial(g);
  for (int i = 0; i < g.horizontal_dim(); ++i) p += coordinate(g, i) * coordinate(g, i);
  if (g.step() >= 2) p += alpha * coordinate(g, g.horizontal_dim());
  return p;
}

// ---------------------------------------------------------------------------
// Checks shared by the single commands and the suite

void check_group_law(const Env& env, int triples) {
  const Group& g = *env.g;
  auto rng = env.rng(101);
  std::uniform_real_distribution<double> scale(0.25, 2.0);
  double assoc = 0.0;
  double ident = 0.0;
  double dil = 0.0;
  for (int k = 0; k < triples; ++k) {
    const Vec x = env.random_point(rng, g.dim());
    const Vec y = env.random_point(rng, g.dim());
    const Vec z = env.random_point(rng, g.dim());
    const double r = scale(rng);
    assoc = std::max(assoc, sup(g.product(g.product(x, y), z) - g.product(x, g.product(y, z))));
    ident = std::max({ident, sup(g.product(x, g.identity()) - x), sup(g.product(g.identity(), x) - x),
                      sup(g.product(x, g.inverse(x))), sup(g.product(g.inverse(x), x))});
    dil = std::max(dil, sup(g.dilate(r, g.product(x, y)) - g.product(g.dilate(r, x), g.dilate(r, y))));
  }
  const ojson details{{"triples", triples}};
  env.add_le("group.associativity", assoc, kLawTol, details);
  env.add_le("group.identity-inverse", ident, kExactTol, details);
  env.add_le("group.dilation", dil, kLawTol, details);
}

void check_heisenberg_closed_form(const Env& env, int pairs) {
  const Group& g = *env.g;
  auto rng = env.rng(102);
  double err = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Vec x = env.random_point(rng, 3);
    const Vec y = env.random_point(rng, 3);
    const Vec z = g.product(x, y);
    const Vec want{{x[0] + y[0], x[1] + y[1], x[2] + y[2] + 0.5 * (x[0] * y[1] - x[1] * y[0])}};
    err = std::max(err, sup(z - want));
  }
  env.add_le("group.heisenberg-closed-form", err, kExactTol, {{"pairs", pairs}});
}

void check_structure_constants(const Env& env, int polys) {
  const Group& g = *env.g;
  const auto& f = g.fields();
  const int m1 = g.horizontal_dim();
  const int m2 = g.step() >= 2 ? g.layer_dim(2) : 0;
  double anti = 0.0;
  for (int l = 0; l < m2; ++l) {
    const Mat& a = f.second_layer[static_cast<std::size_t>(l)];
    anti = std::max(anti, sup(a + a.transpose()));
  }
  env.add_le("poly.alij-antisymmetry", anti, kExactTol);

  if (g.name() == "heisenberg:1") {
    const double err = std::max(std::abs(f.alij(2, 0, 1, m1) - 0.5), std::abs(f.alij(2, 1, 0, m1) + 0.5));
    env.add_le("poly.alij-heisenberg-constants", err, kExactTol,
               {{"a_3_1_2", f.alij(2, 0, 1, m1)}, {"a_3_2_1", f.alij(2, 1, 0, m1)}});
  }

  auto rng = env.rng(103);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  const auto basis = graded_basis(g.degrees(), 2);
  double worst = 0.0;
  for (int k = 0; k < polys; ++k) {
    Polynomial p(g.degrees());
    for (const auto& e : basis) p.add_term(e, unif(rng));
    worst = std::max(worst, sup(check_alij(g, p)));
  }
  env.add_le("poly.alij", worst, env.tol_or(kAlijTol), {{"polynomials", polys}});
}

void check_certificates(const Env& env) {
  for (const auto& info : applicable_functions(*env.g)) {
    const std::string id = "registry." + info.name;
    try {
      const auto c = register_function(info.name, env.g, {}, env.plan);
      env.add_le(id, c.certificate.max_violation, env.plan.tol.convexity, {{"samples", c.certificate.samples}});
    } catch (const ConvexityError& e) {
      env.add(id, kInf, env.plan.tol.convexity, false, {{"error", e.what()}});
    }
  }
}

void check_square_hull(const Env& env) {
  const Group& g = *env.g;
  const int m1 = g.horizontal_dim();
  std::vector<Vec> cube;
  for (int mask = 0; mask < (1 << m1); ++mask) {
    Vec v(m1);
    for (int i = 0; i < m1; ++i) v[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    cube.push_back(v);
  }
  const auto s = subdifferential_hull(make_function("one-norm", env.g), g.identity(), env.plan);
  const double d = hausdorff(s.hull, ConvexPolytope::hull(cube));
  env.add_le("subdiff.one-norm-cube", d, kSquareTol,
             {{"vertices", s.hull.vertices().size()}, {"flagged", s.flagged.size()}});
}

void check_smooth_hulls(const Env& env, int points) {
  const Group& g = *env.g;
  auto rng = env.rng(104);
  double diam = 0.0;
  double dist = 0.0;
  double vertex = 0.0;
  int n = 0;
  for (const auto& name : smooth_names(g)) {
    const auto u = make_function(name, env.g);
    for (int k = 0; k < points; ++k) {
      const Vec x = env.random_point(rng, g.dim(), env.plan.sample_radius);
      const auto s = subdifferential_hull(u, x, env.plan);
      diam = std::max(diam, s.hull.diameter());
      dist = std::max(dist, s.hull.distance(u.gradient(x)));
      vertex = std::max(vertex, s.max_vertex_violation);
      ++n;
    }
  }
  env.add_le("subdiff.smooth-diameter", diam, env.plan.tol.singleton, {{"points", n}});
  env.add_le("subdiff.smooth-gradient", dist, env.plan.tol.singleton, {{"points", n}});
  env.add_le("subdiff.smooth-vertex-membership", vertex, env.plan.tol.membership, {{"points", n}});
}

void check_first_order(const Env& env, int points) {
  const Group& g = *env.g;
  const auto names = smooth_names(g);
  auto rng = env.rng(105);
  int disagree = 0;
  int not_singleton = 0;
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const auto u = make_function(names[static_cast<std::size_t>(k) % names.size()], env.g);
    const auto rep = first_order_characterization(u, env.random_point(rng, g.dim(), env.plan.sample_radius), env.plan);
    disagree += !rep.agree();
    not_singleton += !(rep.singleton && rep.converged);
    worst = std::max(worst, rep.residual.back());
  }
  env.add("first-order.smooth", worst, kFirstOrderTol, disagree == 0 && not_singleton == 0,
          {{"points", points}, {"disagreements", disagree}, {"non_differentiable", not_singleton}});

  const auto kink = first_order_characterization(make_function("abs-x1", env.g), g.identity(), env.plan);
  env.add("first-order.kink", kink.diameter, kKinkDiameter,
          kink.diameter >= kKinkDiameter && !kink.converged && kink.agree(),
          {{"comparison", "metric >= tolerance"},
           {"singleton", kink.singleton},
           {"ladder_converged", kink.converged},
           {"final_residual", kink.residual.back()}});
}

void check_mvt(const Env& env, int pairs) {
  const Group& g = *env.g;
  const int m1 = g.horizontal_dim();
  auto run = [&](const std::vector<std::string>& names, const std::string& id, double tol, std::uint64_t tag) {
    auto rng = env.rng(tag);
    double worst = 0.0;
    int failures = 0;
    int nearest = 0;
    ojson first_error;
    for (const auto& name : names) {
      const auto u = make_function(name, env.g);
      for (int k = 0; k < pairs; ++k) {
        const Vec x = env.random_point(rng, g.dim(), env.plan.sample_radius);
        const Vec h = env.random_point(rng, m1);
        try {
          const auto w = mean_value_witness(u, x, h, env.plan);
          worst = std::max(worst, w.residual);
          nearest += w.nearest;
        } catch (const Error& e) {
          ++failures;
          if (first_error.is_null()) first_error = name + ": " + e.what();
        }
      }
    }
    ojson details{{"pairs", pairs * static_cast<int>(names.size())}, {"failures", failures}, {"nearest", nearest}};
    if (!first_error.is_null()) details["first_error"] = first_error;
    env.add(id, failures ? kInf : worst, tol, failures == 0 && worst <= tol, std::move(details));
  };
  run(smooth_names(g), "mvt.smooth", kMvtSmoothTol, 106);
  run(polyhedral_names(g), "mvt.polyhedral", kMvtPolyhedralTol, 107);
}

void check_lambda_mvt(const Env& env, int trials) {
  const Group& g = *env.g;
  auto rng = env.rng(108);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  const auto basis = graded_basis(g.degrees(), 2);
  double residual = 0.0;
  double membership = 0.0;
  for (int k = 0; k < trials; ++k) {
    Polynomial p(g.degrees());
    for (const auto& e : basis) p.add_term(e, unif(rng));
    const auto big_u = make_function(k % 2 ? "one-norm" : "log-sum-exp", env.g);
    const Vec x = env.random_point(rng, g.dim(), env.plan.sample_radius);
    const Vec h = env.random_point(rng, g.horizontal_dim());
    const auto w = lambda_mean_value_witness(big_u, p, x, h, env.plan);
    residual = std::max(residual, w.residual);
    membership = std::max(membership, w.membership);
  }
  env.add("mvt.lambda", std::max(residual, membership), kMvtPolyhedralTol,
          residual <= kMvtPolyhedralTol && membership <= env.plan.tol.membership,
          {{"trials", trials},
           {"max_residual", residual},
           {"max_membership_violation", membership},
           {"membership_tolerance", env.plan.tol.membership},
           {"lambda_factor", 1.05}});
}

void check_dermax(const Env& env, int points) {
  const Group& g = *env.g;
  auto rng = env.rng(109);
  double disc = 0.0;
  double sub = 0.0;
  int n = 0;
  for (const auto& info : applicable_functions(g)) {
    const auto u = make_function(info.name, env.g);
    for (int k = 0; k < points; ++k) {
      // The first point of every nonsmooth function is its kink at the identity.
      const Vec x = k == 0 && !info.smooth ? g.identity() : env.random_point(rng, g.dim(), env.plan.sample_radius);
      const auto rep = dermax_check(u, x, env.plan);
      disc = std::max(disc, rep.discrepancy);
      sub = std::max(sub, rep.subadditivity_violation);
      ++n;
    }
  }
  const ojson details{{"points", n}, {"directions", env.plan.directions}};
  env.add_le("dermax.discrepancy", disc, env.tol_or(kDermaxTol), details);
  env.add_le("dermax.subadditivity", sub, kSubadditiveTol, details);
}

void add_second_curves(Report& report, const SecondOrderReport& rep) {
  if (rep.expansion) report.add_curve("second.expansion", rep.expansion->tau, rep.expansion->residual);
  if (rep.extended) {
    report.add_curve("second.extended", rep.extended->rho, rep.extended->residual);
    report.add_curve("second.mignot", rep.extended->tau, rep.extended->mignot);
  }
}

ojson second_details(const SecondOrderReport& rep) {
  ojson d;
  d["equivalence"] = rep.equivalence;
  auto claims = ojson::array();
  for (const auto& c : rep.claims) {
    claims.push_back({{"id", c.id},
                      {"verdict", c.pass ? "pass" : "fail"},
                      {"metric", c.metric},
                      {"tolerance", c.tolerance},
                      {"note", c.note}});
  }
  d["claims"] = std::move(claims);
  if (rep.expansion) {
    d["v2"] = to_json(rep.expansion->jet.v2);
    d["hessian"] = to_json(rep.expansion->jet.hess);
  } else {
    d["expansion_error"] = rep.expansion_error;
  }
  if (rep.extended) {
    d["extended_differential"] = to_json(rep.extended->ext);
  } else {
    d["extended_error"] = rep.extended_error;
  }
  if (rep.expansion_converged() && rep.extended_converged()) d["min_eigenvalue"] = rep.min_eigenvalue;
  return d;
}

/// Second-order battery: the mixed field at the identity against its exact
/// jet on groups of step >= 2, the Euclidean quadratic on step 1, and the
/// kink of the 1-norm as the negative case.
void check_second_order(const Env& env) {
  const Group& g = *env.g;
  const double tol = env.tol_or(kSecondOrderTol);
  if (g.step() >= 2) {
    const auto u = make_function("mixed", env.g);
    const auto rep = verify_second_order(u, g.identity(), env.plan, tol, kPsdTol);
    env.add("second.mixed-verify", rep.passed() ? 0.0 : 1.0, 0.0, rep.passed(), second_details(rep));
    add_second_curves(env.report, rep);
    if (rep.expansion_converged() && rep.extended_converged()) {
      const Jet2 exact = jet_from_poly(g, mixed_polynomial(g));
      const ojson expected{{"extended_differential", to_json(exact.ext)},
                           {"hessian", to_json(exact.hess)},
                           {"v2", to_json(exact.v2)}};
      env.add_le("second.mixed-extended", sup(rep.extended->ext - exact.ext), tol, expected);
      env.add_le("second.mixed-hessian", sup(rep.expansion->jet.hess - exact.hess), tol);
      env.add_le("second.mixed-v2", sup(rep.expansion->jet.v2 - exact.v2), tol);
      env.add_le("second.mixed-identity", rep.claim("c3").metric, tol);
      env.add("second.mixed-psd", rep.min_eigenvalue, -kPsdTol, rep.min_eigenvalue >= -kPsdTol,
              {{"comparison", "metric >= tolerance"}});
    } else {
      for (const char* id : {"second.mixed-extended", "second.mixed-hessian", "second.mixed-v2",
                             "second.mixed-identity", "second.mixed-psd"}) {
        env.add(id, kInf, tol, false, {{"error", "fits did not converge"}});
      }
    }
  } else {
    const auto u = make_function("euclidean-quadratic", env.g);
    const auto fit = fit_extended_differential(u, g.identity(), env.plan, 8, tol);
    // The gradient S pi_1 x is linear, so its values at the basis vectors are the columns of S.
    Mat want(g.dim(), g.dim());
    for (int i = 0; i < g.dim(); ++i) want.col(i) = u.gradient(Vec::Unit(g.dim(), i));
    env.add_le("second.euclidean-extended", sup(fit.ext - want), kEuclideanTol, {{"S", to_json(want)}});
    env.add_le("second.euclidean-symmetry", sup(fit.ext - fit.ext.transpose()), kSymmetryTol);
    env.report.add_curve("second.extended", fit.rho, fit.residual);
  }

  const auto kink = verify_second_order(make_function("one-norm", env.g), g.identity(), env.plan, tol, kPsdTol);
  env.add("second.kink-equivalence", kink.claim("equiv").pass ? 0.0 : 1.0, 0.0, kink.claim("equiv").pass,
          {{"equivalence", kink.equivalence}});
}

void check_mignot(const Env& env) {
  const Group& g = *env.g;
  auto rng = env.rng(110);
  double worst = 0.0;
  int failures = 0;
  ojson per_function = ojson::object();
  for (const auto& name : smooth_names(g)) {
    const auto u = make_function(name, env.g);
    const Vec x = env.random_point(rng, g.dim(), 0.5 * env.plan.sample_radius);
    try {
      const auto fit = fit_extended_differential(u, x, env.plan);
      worst = std::max(worst, fit.mignot.back());
      failures += !fit.mignot_converged;
      per_function[name] = fit.mignot.back();
      env.report.add_curve("mignot." + name, fit.tau, fit.mignot);
    } catch (const Error& e) {
      ++failures;
      per_function[name] = e.what();
    }
  }
  env.add("mignot.smooth", failures ? std::max(worst, 1.0) : worst, 1e-2, failures == 0,
          {{"final_excess", per_function}});
}

// ---------------------------------------------------------------------------
// Commands

void cmd_group_validate(const Env& env) {
  const auto& spec = env.cfg.group;
  const GroupDescriptor d = std::filesystem::exists(spec) ? load_descriptor(spec) : builtin_group(spec);
  const auto v = validate_descriptor(d);
  auto list = ojson::array();
  for (const auto& x : v.violations) list.push_back({{"kind", x.kind}, {"indices", x.indices}, {"detail", x.detail}});
  env.add("group.validate", static_cast<double>(v.violations.size()), 0.0, v.ok(),
          {{"name", d.name}, {"layers", d.layers}, {"violations", std::move(list)}});
}

void cmd_group_product(const Env& env) {
  const Group& g = *env.g;
  const Vec x = point_arg(env, 0, g.dim());
  const Vec y = point_arg(env, 1, g.dim());
  const Vec z = g.product(x, y);
  const double err = std::max(sup(g.product(z, g.inverse(y)) - x), sup(g.product(g.inverse(x), z) - y));
  env.add_le("group.product", err, env.tol_or(kLawTol),
             {{"x", to_json(x)}, {"y", to_json(y)}, {"product", to_json(z)}, {"norm", g.norm(z)}});
}

void cmd_poly_hess(const Env& env) {
  if (env.cfg.function.empty()) throw ParseError("poly-hess needs --fn with a polynomial spec");
  const Group& g = *env.g;
  const Polynomial p = load_polynomial(env.cfg.function, g);
  const Vec x = point_arg(env, 0, g.dim());
  const Polynomial px = left_translate_poly(g, p, x);
  const SymHessian sh = sym_hessian(g, px);

  // Oracle: P(x (s e_i + t e_j)) is quadratic in (s, t), so central
  // differences recover the symmetrized Hessian exactly up to rounding.
  const int m1 = g.horizontal_dim();
  const double step = 0.25;
  auto at = [&](int i, double s, int j, double t) {
    Vec w = Vec::Zero(g.dim());
    w[i] += s;
    w[j] += t;
    return p.evaluate(g.product(x, w));
  };
  double err = 0.0;
  for (int i = 0; i < m1; ++i) {
    for (int j = 0; j < m1; ++j) {
      const double fd = (at(i, step, j, step) - at(i, step, j, -step) - at(i, -step, j, step) + at(i, -step, j, -step)) /
                        (4.0 * step * step);
      err = std::max(err, std::abs(fd - sh.hess(i, j)));
    }
  }
  for (Eigen::Index l = 0; l < sh.v2.size(); ++l) {
    const int k = m1 + static_cast<int>(l);
    const double fd = (at(k, step, k, 0.0) - at(k, -step, k, 0.0)) / (2.0 * step);
    err = std::max(err, std::abs(fd - sh.v2[l]));
  }
  env.add_le("poly.hess", err, env.tol_or(kHessTol),
             {{"x", to_json(x)}, {"hessian", to_json(sh.hess)}, {"v2", to_json(sh.v2)}, {"hdeg", p.hdeg()}});
}

void cmd_poly_alij(const Env& env) {
  const Group& g = *env.g;
  if (env.cfg.function.empty()) {
    check_structure_constants(env, 100);
    return;
  }
  const Polynomial p = load_polynomial(env.cfg.function, g);
  const Vec x = point_arg(env, 0, g.dim());
  const Mat r = check_alij(g, left_translate_poly(g, p, x));
  env.add_le("poly.alij", sup(r), env.tol_or(kAlijTol), {{"x", to_json(x)}, {"residual", to_json(r)}});
}

void cmd_hconvex_check(const Env& env) {
  const auto u = require_function(env);
  const auto rep = hconvexity_check(u, env.plan);
  env.add_le("hconvex.violation", rep.max_violation, env.tol_or(env.plan.tol.convexity),
             {{"samples", rep.samples},
              {"worst_x", to_json(rep.worst_x)},
              {"worst_h", to_json(rep.worst_h)},
              {"worst_lambda", rep.worst_lambda}});
}

void cmd_subdiff(const Env& env) {
  const auto u = require_function(env);
  const Vec x = point_arg(env, 0, env.g->dim());
  const auto s = subdifferential_hull(u, x, env.plan);
  auto verts = ojson::array();
  for (const auto& v : s.hull.vertices()) verts.push_back(to_json(v));
  env.add_le("subdiff.vertices", s.max_vertex_violation, env.tol_or(env.plan.tol.membership),
             {{"x", to_json(x)},
              {"vertices", std::move(verts)},
              {"flagged", s.flagged},
              {"diameter", s.hull.diameter()},
              {"centroid", to_json(s.hull.centroid())}});

  const auto cg = closed_graph_diagnostic(u, x, env.plan);
  env.add_le("subdiff.closed-graph", cg.violation, cg.tolerance, {{"limit", to_json(cg.limit)}});

  const auto fo = first_order_characterization(u, x, env.plan);
  env.add("subdiff.first-order", fo.agree() ? 0.0 : 1.0, 0.0, fo.agree(),
          {{"singleton", fo.singleton}, {"ladder_converged", fo.converged}, {"diameter", fo.diameter}});
  env.report.add_curve("subdiff.first-order", fo.rho, fo.residual);
}

void cmd_dermax(const Env& env) {
  const auto u = require_function(env);
  const Vec x = point_arg(env, 0, env.g->dim());
  const auto rep = dermax_check(u, x, env.plan);
  env.add_le("dermax.discrepancy", rep.discrepancy, env.tol_or(kDermaxTol), {{"directions", rep.directions}});
  env.add_le("dermax.subadditivity", rep.subadditivity_violation, kSubadditiveTol);
}

void cmd_mvt(const Env& env) {
  const auto u = require_function(env);
  const Vec x = point_arg(env, 0, env.g->dim());
  const Vec h = direction_arg(env);
  const auto w = mean_value_witness(u, x, h, env.plan);
  const double tol = env.tol_or(u.has_gradient() ? kMvtSmoothTol : kMvtPolyhedralTol);
  env.add_le("mvt.residual", w.residual, tol,
             {{"x", to_json(x)}, {"h", to_json(h)}, {"t", w.t}, {"p", to_json(w.p)}, {"slope", w.slope},
              {"nearest", w.nearest}});
}

void cmd_second_fit(const Env& env) {
  const auto u = require_function(env);
  const Vec x = point_arg(env, 0, env.g->dim());
  const double tol = env.tol_or(kSecondOrderTol);
  try {
    const auto fit = fit_expansion(u, quotient_grid(u, x, env.plan), tol);
    env.add("second.expansion", fit.residual.back(), tol, fit.converged,
            {{"value", fit.jet.value}, {"gradient", to_json(fit.jet.grad)}, {"v2", to_json(fit.jet.v2)},
             {"hessian", to_json(fit.jet.hess)}});
    env.report.add_curve("second.expansion", fit.tau, fit.residual);
  } catch (const Error& e) {
    env.add("second.expansion", kInf, tol, false, {{"error", e.what()}});
  }
  try {
    const auto fit = fit_extended_differential(u, x, env.plan, 8, tol);
    env.add("second.extended", fit.residual.back(), tol, fit.converged,
            {{"extended_differential", to_json(fit.ext)}, {"gradient", to_json(fit.grad)}});
    env.add("second.mignot", fit.mignot.back(), fit.mignot_tol, fit.mignot_converged);
    env.report.add_curve("second.extended", fit.rho, fit.residual);
    env.report.add_curve("second.mignot", fit.tau, fit.mignot);
  } catch (const Error& e) {
    env.add("second.extended", kInf, tol, false, {{"error", e.what()}});
  }
}

void cmd_verify(const Env& env) {
  const auto u = require_function(env);
  const Vec x = point_arg(env, 0, env.g->dim());
  const double tol = env.tol_or(kSecondOrderTol);
  const auto rep = verify_second_order(u, x, env.plan, tol, kPsdTol);
  int failed = 0;
  for (const auto& c : rep.claims) failed += !c.pass;
  env.add("verify", failed, 0.0, rep.passed(), second_details(rep));
  add_second_curves(env.report, rep);
}

void cmd_suite(const Env& env) {
  const Group& g = *env.g;
  check_group_law(env, 1000);
  if (g.name() == "heisenberg:1") check_heisenberg_closed_form(env, 1000);
  check_structure_constants(env, 100);
  check_certificates(env);
  check_square_hull(env);
  check_smooth_hulls(env, 20);
  check_first_order(env, 20);
  check_mvt(env, 100);
  check_lambda_mvt(env, 10);
  check_dermax(env, 10);
  check_second_order(env);
  check_mignot(env);
}

const std::map<std::string, std::function<void(const Env&)>>& dispatch() {
  static const std::map<std::string, std::function<void(const Env&)>> table{
      {"group-validate", cmd_group_validate}, {"group-product", cmd_group_product},
      {"poly-hess", cmd_poly_hess},           {"poly-alij", cmd_poly_alij},
      {"hconvex-check", cmd_hconvex_check},   {"subdiff", cmd_subdiff},
      {"dermax", cmd_dermax},                 {"mvt", cmd_mvt},
      {"second-fit", cmd_second_fit},         {"verify-thm11", cmd_verify},
      {"suite", cmd_suite}};
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"group-validate", "group-product", "poly-hess", "poly-alij",
                                              "hconvex-check",  "subdiff",       "dermax",    "mvt",
                                              "second-fit",     "verify-thm11",  "suite"};
  return names;
}

std::string csv_path_for(const std::string& json_path) {
  return std::filesystem::path(json_path).replace_extension(".csv").string();
}

RunResult run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunResult result;
  Report& report = result.report;
  report.command = cfg.command;
  auto fail = [&](int status, const std::string& what) {
    result.status = status;
    result.error = what;
    err << "error: " << what << "\n";
    return result;
  };

  const auto it = dispatch().find(cfg.command);
  if (it == dispatch().end()) return fail(kExitConfig, "unknown command '" + cfg.command + "'");

  try {
    SamplingPlan plan = cfg.plan_file.empty() ? SamplingPlan{} : load_plan(cfg.plan_file);
    if (cfg.seed) plan.seed = *cfg.seed;
    if (cfg.tol && !(*cfg.tol > 0.0 && std::isfinite(*cfg.tol))) throw ParseError("--tol must be positive");

    // group-validate inspects the descriptor itself and must not reject it
    // on load.
    GroupPtr g = cfg.command == "group-validate" ? nullptr : load_group(cfg.group, cfg.force);

    std::string base = "command=" + cfg.command + ";group=" + (g ? g->name() : cfg.group) + ";fn=" + cfg.function +
                       ";points=";
    for (const auto& p : cfg.points) base += p + "|";
    base += ";tol=" + (cfg.tol ? fmt(*cfg.tol) : std::string("default")) + ";plan=" + plan_string(plan);
    report.context = {{"group", g ? g->name() : cfg.group},
                      {"function", cfg.function},
                      {"points", cfg.points},
                      {"seed", plan.seed},
                      {"plan_digest", digest(plan_string(plan))}};

    const Env env{cfg, g, plan, base, report};
    it->second(env);
  } catch (const ParseError& e) {
    return fail(kExitConfig, e.what());
  } catch (const DegreeError& e) {
    return fail(kExitConfig, e.what());
  } catch (const DescriptorMismatch& e) {
    return fail(kExitConfig, e.what());
  } catch (const InvalidDescriptor& e) {
    return fail(kExitCheckFailed, e.what());
  } catch (const ConvexityError& e) {
    return fail(kExitCheckFailed, e.what());
  } catch (const NotDifferentiable& e) {
    return fail(kExitCheckFailed, e.what());
  } catch (const std::exception& e) {
    return fail(kExitInternal, e.what());
  }

  try {
    if (!cfg.out.empty()) emit_report(report, cfg.out, report.curves.empty() ? "" : csv_path_for(cfg.out));
  } catch (const std::exception& e) {
    return fail(kExitInternal, e.what());
  }

  out << report_summary(report);
  if (cfg.command == "group-validate" && !report.passed()) {
    for (const auto& v : report.records.front().details["violations"]) {
      err << "violation: " << v["kind"].get<std::string>() << " " << v["detail"].get<std::string>() << "\n";
    }
  }
  result.status = report.passed() ? kExitPass : kExitCheckFailed;
  return result;
}

}  // namespace carnot
