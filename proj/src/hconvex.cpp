#include "carnot/hconvex.hpp"

#include "carnot/errors.hpp"
#include "carnot/functions.hpp"
#include "carnot/poly_calc.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

namespace carnot {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Vec unit(int m, int i) {
  Vec e = Vec::Zero(m);
  e[i] = 1.0;
  return e;
}

double max_abs(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

Vec hyperplane_point(const ConvexPolytope& hull, const Vec& h, double sigma, double gap_tol, bool& nearest) {
  const auto& verts = hull.vertices();
  std::size_t imin = 0;
  std::size_t imax = 0;
  for (std::size_t i = 1; i < verts.size(); ++i) {
    if (verts[i].dot(h) < verts[imin].dot(h)) imin = i;
    if (verts[i].dot(h) > verts[imax].dot(h)) imax = i;
  }
  const double smin = verts[imin].dot(h);
  const double smax = verts[imax].dot(h);
  nearest = false;
  if (sigma >= smin && sigma <= smax) {
    const double span = smax - smin;
    const double theta = span > 0.0 ? (sigma - smin) / span : 0.0;
    return verts[imin] + theta * (verts[imax] - verts[imin]);
  }
  const double gap = sigma < smin ? smin - sigma : sigma - smax;
  if (gap > gap_tol) throw SamplingError("secant slope outside the sampled support range");
  nearest = true;
  return sigma < smin ? verts[imin] : verts[imax];
}

}  // namespace

void SamplingPlan::validate() const {
  if (radii.empty()) throw SamplingError("sampling plan has no radii");
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0)) throw SamplingError("sampling radii must be positive");
    if (i > 0 && !(radii[i] < radii[i - 1])) throw SamplingError("sampling radii must be strictly decreasing");
  }
  if (samples_per_shell <= 0 || directions <= 0 || convexity_samples <= 0 || probe_levels <= 0) {
    throw SamplingError("sampling counts must be positive");
  }
  if (!(fd_step > 0.0) || !(sample_radius > 0.0) || !(probe_radius > 0.0)) {
    throw SamplingError("sampling steps must be positive");
  }
  for (double l : lambda_grid) {
    if (!(l > 0.0 && l < 1.0)) throw SamplingError("lambda grid values must lie in (0, 1)");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, const Vec& x) {
  std::uint64_t state = seed;
  std::uint64_t h = splitmix(state) ^ tag;
  state = h;
  h = splitmix(state);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::uint64_t bits = 0;
    const double v = x[i] == 0.0 ? 0.0 : x[i];  // fold -0 into +0
    std::memcpy(&bits, &v, sizeof bits);
    state ^= bits;
    h ^= splitmix(state);
  }
  return h;
}

Vec sample_quasi_ball(const Group& g, double r, std::mt19937_64& rng, bool on_sphere) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vec z(g.dim());
  double nz = 0.0;
  do {
    for (int i = 0; i < g.dim(); ++i) z[i] = unif(rng);
    nz = g.norm(z);
  } while (nz < 1e-12);
  const double s = on_sphere ? 1.0 : 0.5 * (1.0 + unif(rng));
  return g.dilate(r * s / nz, z);
}

std::vector<Vec> horizontal_directions(int m1, int count, std::uint64_t seed) {
  std::vector<Vec> dirs;
  if (m1 == 1) return {unit(1, 0), -unit(1, 0)};
  if (m1 == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * k / count;
      Vec d(2);
      d << std::cos(a), std::sin(a);
      dirs.push_back(d);
    }
    return dirs;
  }
  for (int i = 0; i < m1; ++i) {
    dirs.push_back(unit(m1, i));
    dirs.push_back(-unit(m1, i));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  while (static_cast<int>(dirs.size()) < count) {
    Vec d(m1);
    for (int i = 0; i < m1; ++i) d[i] = normal(rng);
    if (d.norm() > 1e-8) dirs.push_back(d / d.norm());
  }
  return dirs;
}

bool segment_admissible(const ScalarField& u, const Vec& x, const Vec& h) {
  if (!u.domain) return true;
  constexpr int kInterior = 32;
  for (int k = 0; k <= kInterior + 1; ++k) {
    if (!u.contains(u.group->along(x, h, static_cast<double>(k) / (kInterior + 1)))) return false;
  }
  return true;
}

ConvexityReport hconvexity_check(const ScalarField& u, const SamplingPlan& plan) {
  plan.validate();
  const Group& g = *u.group;
  std::mt19937_64 rng(derive_seed(plan.seed, 1));
  std::uniform_real_distribution<double> unif(-plan.sample_radius, plan.sample_radius);
  ConvexityReport rep;
  int accepted = 0;
  for (int attempt = 0; attempt < 20 * plan.convexity_samples && accepted < plan.convexity_samples; ++attempt) {
    Vec x(g.dim());
    Vec h(g.horizontal_dim());
    for (int i = 0; i < g.dim(); ++i) x[i] = unif(rng);
    for (int i = 0; i < g.horizontal_dim(); ++i) h[i] = unif(rng);
    if (!u.contains(x) || !segment_admissible(u, x, h)) continue;
    ++accepted;
    const double u0 = u(x);
    const double u1 = u(g.along(x, h, 1.0));
    for (double lam : plan.lambda_grid) {
      const double v = u(g.along(x, h, lam)) - lam * u1 - (1.0 - lam) * u0;
      ++rep.samples;
      if (v > rep.max_violation || rep.worst_x.size() == 0) {
        rep.max_violation = std::max(v, 0.0);
        rep.worst_x = x;
        rep.worst_h = h;
        rep.worst_lambda = lam;
      }
    }
  }
  if (rep.samples == 0) throw SamplingError("no admissible horizontal segment in " + u.label);
  return rep;
}

Vec horizontal_fd_gradient(const ScalarField& u, const Vec& x, double eta) {
  const Group& g = *u.group;
  const int m1 = g.horizontal_dim();
  constexpr double kMargin = 2.0;
  Vec grad(m1);
  for (int i = 0; i < m1; ++i) {
    const Vec e = unit(m1, i);
    const Vec fwd = g.along(x, e, eta);
    const Vec bwd = g.along(x, e, -eta);
    if (u.domain && (!u.contains(fwd) || !u.contains(bwd) || !u.contains(g.along(x, e, kMargin * eta)) ||
                     !u.contains(g.along(x, e, -kMargin * eta)))) {
      throw DomainError("finite-difference stencil leaves the domain");
    }
    grad[i] = (u(fwd) - u(bwd)) / (2.0 * eta);
  }
  return grad;
}

std::vector<GradientSample> reachable_gradient_sample(const ScalarField& u, const Vec& x,
                                                      const SamplingPlan& plan) {
  plan.validate();
  const Group& g = *u.group;
  if (!u.contains(x)) throw DomainError("base point outside the domain");
  std::vector<GradientSample> out;
  std::size_t finest = 0;
  for (std::size_t m = 0; m < plan.radii.size(); ++m) {
    const double r = plan.radii[m];
    const double eta = std::min(plan.fd_step, r / 10.0);
    std::mt19937_64 rng(derive_seed(plan.seed, 100 + static_cast<std::uint64_t>(std::lround(-std::log2(r) * 16)), x));
    int count = 0;
    for (int attempt = 0; attempt < 20 * plan.samples_per_shell && count < plan.samples_per_shell; ++attempt) {
      const Vec y = g.product(x, sample_quasi_ball(g, r, rng));
      if (!u.contains(y)) continue;
      Vec g1;
      Vec g2;
      try {
        g1 = horizontal_fd_gradient(u, y, eta);
        g2 = horizontal_fd_gradient(u, y, eta / 2.0);
      } catch (const DomainError&) {
        continue;
      }
      if (max_abs(g1 - g2) > plan.tol.fd_stability * (1.0 + max_abs(g1))) continue;
      out.push_back({static_cast<int>(m), y, g1});
      ++count;
    }
    if (m + 1 == plan.radii.size()) finest = static_cast<std::size_t>(count);
  }
  if (finest == 0) throw SamplingError("no stable gradient sample on the finest shell for " + u.label);
  return out;
}

ConvexPolytope hull_at_radius(const ScalarField& u, const Vec& x, double r, const SamplingPlan& plan) {
  SamplingPlan one = plan;
  one.radii = {r};
  std::vector<Vec> grads;
  for (const auto& s : reachable_gradient_sample(u, x, one)) grads.push_back(s.gradient);
  return ConvexPolytope::hull(grads);
}

SubdiffHull subdifferential_hull(const ScalarField& u, const Vec& x, const SamplingPlan& plan) {
  SubdiffHull out;
  out.hull = hull_at_radius(u, x, plan.radii.back(), plan);
  const auto& verts = out.hull.vertices();
  for (std::size_t i = 0; i < verts.size(); ++i) {
    const double v = subdiff_membership(u, x, verts[i], plan);
    out.max_vertex_violation = std::max(out.max_vertex_violation, v);
    if (v > plan.tol.membership) out.flagged.push_back(static_cast<int>(i));
  }
  return out;
}

double lambda_subdiff_membership(const ScalarField& u, const Vec& x, const Vec& p, double lambda,
                                 const SamplingPlan& plan) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  const Group& g = *u.group;
  const double ux = u(x);
  double worst = 0.0;
  for (const auto& dir : horizontal_directions(g.horizontal_dim(), plan.directions, derive_seed(plan.seed, 2))) {
    double s = plan.probe_radius;
    for (int k = 0; k < plan.probe_levels; ++k, s /= 2.0) {
      const Vec h = s * dir;
      if (!segment_admissible(u, x, h)) continue;
      const double v = ux + p.dot(h) - lambda * s * s - u(g.along(x, h, 1.0));
      worst = std::max(worst, v);
    }
  }
  return worst;
}

double subdiff_membership(const ScalarField& u, const Vec& x, const Vec& p, const SamplingPlan& plan) {
  return lambda_subdiff_membership(u, x, p, 0.0, plan);
}

double directional_derivative(const ScalarField& u, const Vec& x, const Vec& h, const Tolerances& tol) {
  const Group& g = *u.group;
  const double hn = h.norm();
  if (hn == 0.0) return 0.0;
  const double ux = u(x);
  const double scale = 1.0 + std::abs(ux);
  auto quotient = [&](double l) {
    const Vec y = g.along(x, h, l);
    if (!u.contains(y)) throw DomainError("directional derivative probe leaves the domain");
    return (u(y) - ux) / l;
  };

  constexpr int kMinLevels = 8;
  constexpr int kMaxLevels = 26;
  std::vector<double> q;
  std::vector<double> r1;
  std::vector<double> r2;
  double l = 1e-2 / hn;
  for (int k = 0; k < kMaxLevels; ++k, l /= 2.0) {
    q.push_back(quotient(l));
    if (k >= 1) {
      const double slack = tol.monotone * (1.0 + std::abs(q[k - 1])) + 16.0 * kEps * scale / l;
      if (q[k] > q[k - 1] + slack) throw ConvexityError("not h-convex along h (" + u.label + ")");
      r1.push_back(2.0 * q[k] - q[k - 1]);
    }
    if (k == 2 && std::abs(q[0] - q[1]) <= 16.0 * kEps * scale / l && std::abs(q[1] - q[2]) <= 16.0 * kEps * scale / l) {
      // Equal chord slopes on nested intervals: by convexity g is affine on
      // [0, l_0], and the widest chord carries the least rounding.
      return q[0];
    }
    if (k >= 2) r2.push_back((4.0 * r1[r1.size() - 1] - r1[r1.size() - 2]) / 3.0);
    if (k + 1 >= kMinLevels && r2.size() >= 2) {
      const double a = r2[r2.size() - 1];
      const double b = r2[r2.size() - 2];
      if (std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a))) break;
    }
  }
  l *= 2.0;  // last level actually used
  const double upper = q.back();
  double lower = -std::numeric_limits<double>::infinity();
  const Vec back = g.along(x, h, -l);
  if (u.contains(back)) lower = (ux - u(back)) / l;
  double est = r2.back();
  if (lower > upper) lower = upper;
  return std::clamp(est, lower, upper);
}

DermaxReport dermax_check(const ScalarField& u, const Vec& x, const SamplingPlan& plan) {
  const Group& g = *u.group;
  const auto hull = hull_at_radius(u, x, plan.radii.back(), plan);
  const auto dirs = horizontal_directions(g.horizontal_dim(), plan.directions, derive_seed(plan.seed, 3));
  std::vector<double> d(dirs.size());
  DermaxReport rep;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    d[i] = directional_derivative(u, x, dirs[i], plan.tol);
    rep.discrepancy = std::max(rep.discrepancy, std::abs(d[i] - hull.support(dirs[i])));
  }
  rep.directions = static_cast<int>(dirs.size());
  const std::size_t n = dirs.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : {(i + 1) % n, (i + n / 2) % n}) {
      if (j == i) continue;
      const Vec sum = dirs[i] + dirs[j];
      const double both = sum.norm() < 1e-12 ? 0.0 : directional_derivative(u, x, sum, plan.tol);
      rep.subadditivity_violation = std::max(rep.subadditivity_violation, both - d[i] - d[j]);
    }
  }
  return rep;
}

MvtWitness mean_value_witness(const ScalarField& u, const Vec& x, const Vec& h, const SamplingPlan& plan) {
  const Group& g = *u.group;
  if (!u.contains(x) || !segment_admissible(u, x, h)) throw DomainError("segment x*[0, h] leaves the domain");
  MvtWitness w;
  w.slope = u(g.along(x, h, 1.0)) - u(x);
  const double sigma = w.slope;
  const double slack = plan.tol.mvt_gap * (1.0 + std::abs(sigma));
  auto deriv = [&](double t) { return directional_derivative(u, g.along(x, h, t), h, plan.tol); };

  const double d0 = deriv(0.0);
  if (d0 > sigma + slack) throw ConvexityError("one-sided derivative at t = 0 exceeds the secant slope");
  try {
    if (deriv(1.0) < sigma - slack) throw ConvexityError("one-sided derivative at t = 1 is below the secant slope");
  } catch (const DomainError&) {
    // The forward probe at the endpoint may leave the domain; bisection
    // below only needs interior points.
  }

  const double reach = sigma - 1e-12 * (1.0 + std::abs(sigma));
  double t = 0.0;
  if (d0 < reach) {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (deriv(mid) >= reach ? hi : lo) = mid;
    }
    t = hi;
  }
  w.t = t;

  const auto hull = hull_at_radius(u, g.along(x, h, t), plan.radii.back(), plan);
  w.p = hyperplane_point(hull, h, sigma, plan.tol.mvt_gap, w.nearest);
  w.residual = std::abs(sigma - w.p.dot(h));
  return w;
}

LambdaMvtWitness lambda_mean_value_witness(const ScalarField& big_u, const Polynomial& poly, const Vec& x,
                                           const Vec& h, const SamplingPlan& plan) {
  const Group& g = *big_u.group;
  if (!big_u.contains(x) || !segment_admissible(big_u, x, h)) throw DomainError("segment x*[0, h] leaves the domain");
  LambdaMvtWitness w;
  w.u = compose_fields("sum", {big_u, polynomial_field(big_u.group, poly)});
  w.lambda = 1.05 * lambda_max(g, poly).value;
  w.slope = w.u(g.along(x, h, 1.0)) - w.u(x);
  const double sigma = w.slope;

  // psi(t) = u(x dil_t h) - t sigma vanishes at both ends; an interior
  // extremum has one-sided derivatives bracketing zero.
  auto psi = [&](double t) { return w.u(g.along(x, h, t)) - t * sigma; };
  constexpr int kGrid = 64;
  std::vector<double> vals(kGrid + 1);
  for (int k = 0; k <= kGrid; ++k) vals[k] = psi(static_cast<double>(k) / kGrid);
  int best = kGrid / 2;
  for (int k = 1; k < kGrid; ++k) {
    if (std::abs(vals[k] - vals[0]) > std::abs(vals[best] - vals[0])) best = k;
  }
  const double sign = vals[best] >= vals[0] ? -1.0 : 1.0;  // minimise sign * psi
  double lo = static_cast<double>(best - 1) / kGrid;
  double hi = static_cast<double>(best + 1) / kGrid;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo);
  double b = lo + phi * (hi - lo);
  double fa = sign * psi(a);
  double fb = sign * psi(b);
  for (int it = 0; it < 80 && hi - lo > 1e-13; ++it) {
    if (fa <= fb) {
      hi = b, b = a, fb = fa;
      a = hi - phi * (hi - lo);
      fa = sign * psi(a);
    } else {
      lo = a, a = b, fa = fb;
      b = lo + phi * (hi - lo);
      fb = sign * psi(b);
    }
  }
  w.t = 0.5 * (lo + hi);

  const Vec y = g.along(x, h, w.t);
  const Vec grad_p = horizontal_gradient(g, poly, y);
  const auto hull = hull_at_radius(big_u, y, plan.radii.back(), plan);
  bool nearest = false;
  const Vec q = hyperplane_point(hull, h, sigma - grad_p.dot(h), plan.tol.mvt_gap, nearest);
  w.p = q + grad_p;
  w.residual = std::abs(sigma - w.p.dot(h));
  w.membership = lambda_subdiff_membership(w.u, y, w.p, w.lambda, plan);
  return w;
}

ClosedGraphReport closed_graph_diagnostic(const ScalarField& u, const Vec& x, const SamplingPlan& plan) {
  const Group& g = *u.group;
  std::mt19937_64 rng(derive_seed(plan.seed, 4, x));
  const Vec w = sample_quasi_ball(g, plan.probe_radius, rng, true);
  Vec dir = w.head(g.horizontal_dim());
  dir = dir.norm() > 1e-12 ? Vec(dir / dir.norm()) : unit(g.horizontal_dim(), 0);

  constexpr int kLevels = 12;
  ClosedGraphReport rep;
  for (int k = 1; k <= kLevels; ++k) {
    const Vec xk = g.product(x, g.dilate(std::ldexp(1.0, -k), w));
    const auto hull = hull_at_radius(u, xk, plan.radii.back(), plan);
    std::size_t best = 0;
    for (std::size_t i = 1; i < hull.vertices().size(); ++i) {
      if (hull.vertices()[i].dot(dir) > hull.vertices()[best].dot(dir)) best = i;
    }
    rep.distances.push_back(g.norm(g.product(g.inverse(x), xk)));
    rep.supports.push_back(hull.vertices()[best]);
  }
  rep.limit = rep.supports.back();
  const double drift = (rep.supports[kLevels - 1] - rep.supports[kLevels - 2]).norm();
  rep.violation = subdiff_membership(u, x, rep.limit, plan);
  rep.tolerance = plan.tol.membership + plan.probe_radius * 2.0 * drift;
  return rep;
}

FirstOrderReport first_order_characterization(const ScalarField& u, const Vec& x, const SamplingPlan& plan) {
  const Group& g = *u.group;
  FirstOrderReport rep;
  const auto hull = hull_at_radius(u, x, plan.radii.back(), plan);
  rep.diameter = hull.diameter();
  rep.p = hull.centroid();
  rep.singleton = rep.diameter < plan.tol.singleton;

  std::mt19937_64 rng(derive_seed(plan.seed, 5));
  std::vector<Vec> sphere;
  for (int i = 0; i < plan.directions; ++i) sphere.push_back(sample_quasi_ball(g, 1.0, rng, true));
  for (int i = 0; i < g.horizontal_dim(); ++i) {
    sphere.push_back(g.horizontal(unit(g.horizontal_dim(), i)));
    sphere.push_back(g.horizontal(-unit(g.horizontal_dim(), i)));
  }

  const double ux = u(x);
  constexpr int kLevels = 11;
  double rho = 0.1;
  for (int k = 0; k < kLevels; ++k, rho /= 2.0) {
    double worst = 0.0;
    for (const auto& s : sphere) {
      const Vec w = g.dilate(rho, s);
      const Vec y = g.product(x, w);
      if (!u.contains(y)) continue;
      worst = std::max(worst, std::abs(u(y) - ux - rep.p.dot(w.head(g.horizontal_dim()))) / rho);
    }
    rep.rho.push_back(rho);
    rep.residual.push_back(worst);
  }
  const auto& r = rep.residual;
  const double slack = 0.1 * kFirstOrderTol;
  const bool monotone = r[kLevels - 2] <= r[kLevels - 3] + slack && r[kLevels - 1] <= r[kLevels - 2] + slack;
  rep.converged = monotone && r.back() < kFirstOrderTol;
  return rep;
}

std::vector<double> relaxed_subjet_curve(const ScalarField& u, const Vec& x, const Vec& p,
                                         const SamplingPlan& plan) {
  const Group& g = *u.group;
  const auto dirs = horizontal_directions(g.horizontal_dim(), plan.directions, derive_seed(plan.seed, 2));
  const double ux = u(x);
  std::vector<double> curve;
  double s = plan.probe_radius;
  for (int k = 0; k < plan.probe_levels; ++k, s /= 2.0) {
    double worst = 0.0;
    for (const auto& dir : dirs) {
      const Vec h = s * dir;
      if (!segment_admissible(u, x, h)) continue;
      worst = std::max(worst, ux + p.dot(h) - u(g.along(x, h, 1.0)));
    }
    curve.push_back(worst / s);
  }
  return curve;
}

}  // namespace carnot
