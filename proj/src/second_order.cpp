#include "carnot/second_order.hpp"

#include "carnot/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace carnot {

namespace {

int second_layer_dim(const Group& g) { return g.step() >= 2 ? g.layer_dim(2) : 0; }

double halton(int index, int base) {
  double f = 1.0;
  double r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

// Last three entries non-increasing up to `slack` and the final one below tol.
bool settles(const std::vector<double>& curve, double tol, double slack) {
  const std::size_t n = curve.size();
  if (n < 3) return false;
  return curve[n - 2] <= curve[n - 3] + slack && curve[n - 1] <= curve[n - 2] + slack && curve[n - 1] < tol;
}

double sup(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

Vec base_gradient(const ScalarField& u, const Vec& x, const SamplingPlan& plan) {
  if (u.has_gradient()) return u.gradient(x);
  const auto hull = hull_at_radius(u, x, plan.radii.back(), plan);
  if (hull.diameter() >= plan.tol.singleton) {
    throw NotDifferentiable(u.label + " is not h-differentiable here (hull diameter " +
                            std::to_string(hull.diameter()) + ")");
  }
  return horizontal_fd_gradient(u, x, plan.fd_step);
}

double second_quotient(const ScalarField& u, const Vec& x, double tau, const Vec& w, const Vec& grad) {
  const Group& g = *u.group;
  const Vec y = g.product(x, g.dilate(tau, w));
  if (!u.contains(y)) throw DomainError("second quotient probe leaves the domain");
  return (u(y) - u(x) - tau * grad.dot(w.head(g.horizontal_dim()))) / (tau * tau);
}

ConvexPolytope subdiff_quotient(const ScalarField& u, const Vec& x, double tau, const Vec& w, const Vec& grad,
                                const SamplingPlan& plan) {
  const Group& g = *u.group;
  const double r = std::min(plan.radii.back(), tau * 1e-4);
  return hull_at_radius(u, g.product(x, g.dilate(tau, w)), r, plan).affine_image(grad, tau);
}

std::vector<Vec> expansion_directions(const Group& g, int count) {
  static constexpr std::array<int, 12> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  const int n = g.dim();
  if (n > static_cast<int>(kPrimes.size())) throw std::invalid_argument("group dimension too large for Halton points");
  std::vector<Vec> dirs;
  for (int k = 1; static_cast<int>(dirs.size()) < count; ++k) {
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = 2.0 * halton(k, kPrimes[static_cast<std::size_t>(i)]) - 1.0;
    const double nz = g.norm(z);
    if (nz > 1e-8) dirs.push_back(g.dilate(1.0 / nz, z));
  }
  const int top = g.step() >= 2 ? g.layer_begin(2) + g.layer_dim(2) : g.horizontal_dim();
  for (int i = 0; i < top; ++i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  return dirs;
}

QuotientGrid quotient_grid(const ScalarField& u, const Vec& x, const SamplingPlan& plan, int levels,
                           int direction_count) {
  const Group& g = *u.group;
  QuotientGrid grid;
  grid.x = x;
  grid.grad = base_gradient(u, x, plan);
  grid.directions = expansion_directions(g, direction_count);

  auto inside = [&](double tau) {
    return std::all_of(grid.directions.begin(), grid.directions.end(),
                       [&](const Vec& w) { return u.contains(g.product(x, g.dilate(tau, w))); });
  };
  double tau0 = 0.1;
  for (int halvings = 0; !inside(tau0); ++halvings, tau0 /= 2.0) {
    if (halvings == 30) throw DomainError("no admissible scale for the quotient grid");
  }
  grid.values.resize(levels, static_cast<Eigen::Index>(grid.directions.size()));
  double tau = tau0;
  for (int k = 0; k < levels; ++k, tau /= 2.0) {
    grid.tau.push_back(tau);
    for (std::size_t i = 0; i < grid.directions.size(); ++i) {
      grid.values(k, static_cast<Eigen::Index>(i)) = second_quotient(u, x, tau, grid.directions[i], grid.grad);
    }
  }
  return grid;
}

ExpansionFit fit_expansion(const ScalarField& u, const QuotientGrid& grid, double tol) {
  const Group& g = *u.group;
  const int m1 = g.horizontal_dim();
  const int m2 = second_layer_dim(g);
  const int cols = m2 + m1 * (m1 + 1) / 2;
  const auto rows = static_cast<Eigen::Index>(grid.directions.size());

  Mat design(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vec& w = grid.directions[static_cast<std::size_t>(r)];
    int c = 0;
    for (int l = 0; l < m2; ++l) design(r, c++) = w[m1 + l];
    for (int i = 0; i < m1; ++i) {
      for (int j = i; j < m1; ++j) design(r, c++) = i == j ? 0.5 * w[i] * w[i] : w[i] * w[j];
    }
  }
  const auto qr = design.colPivHouseholderQr();
  if (qr.rank() < cols) throw RankDeficient("direction set does not identify the second-order model");

  ExpansionFit fit;
  fit.tol = tol;
  fit.tau = grid.tau;
  Vec coef;
  for (Eigen::Index k = 0; k < grid.values.rows(); ++k) {
    coef = qr.solve(Vec(grid.values.row(k).transpose()));
    fit.v2_by_scale.push_back(coef.head(m2));
    Mat h(m1, m1);
    int c = m2;
    for (int i = 0; i < m1; ++i) {
      for (int j = i; j < m1; ++j) h(i, j) = h(j, i) = coef[c++];
    }
    fit.hess_by_scale.push_back(h);
  }
  const Vec model = design * coef;  // finest scale
  for (Eigen::Index k = 0; k < grid.values.rows(); ++k) {
    fit.residual.push_back((grid.values.row(k).transpose() - model).cwiseAbs().maxCoeff());
  }

  Jet2 jet = Jet2::zero(g);
  jet.value = u(grid.x);
  jet.grad = grid.grad;
  jet.v2 = fit.v2_by_scale.back();
  jet.hess = fit.hess_by_scale.back();
  jet.ext = jet_from_poly(g, poly_from_jet2(g, jet)).ext;
  fit.jet = jet;
  fit.converged = settles(fit.residual, tol, 0.1 * tol);
  return fit;
}

ExtendedDiffFit fit_extended_differential(const ScalarField& u, const Vec& x, const SamplingPlan& plan, int levels,
                                          double tol) {
  const Group& g = *u.group;
  const int m1 = g.horizontal_dim();
  const auto hull = hull_at_radius(u, x, plan.radii.back(), plan);
  if (hull.diameter() >= plan.tol.singleton) {
    throw NotDifferentiable(u.label + " is not h-differentiable here (hull diameter " +
                            std::to_string(hull.diameter()) + ")");
  }

  ExtendedDiffFit fit;
  fit.tol = tol;
  fit.grad = horizontal_fd_gradient(u, x, plan.fd_step);
  SamplingPlan ladder = plan;
  ladder.radii.clear();
  for (int k = 0; k < levels; ++k) ladder.radii.push_back(0.1 * std::ldexp(1.0, -k));
  fit.rho = ladder.radii;

  std::vector<std::vector<std::pair<Vec, Vec>>> shells(static_cast<std::size_t>(levels));  // (w, weighted diff)
  const Vec xinv = g.inverse(x);
  for (const auto& s : reachable_gradient_sample(u, x, ladder)) {
    shells[static_cast<std::size_t>(s.shell)].emplace_back(g.product(xinv, s.point), s.gradient - fit.grad);
  }

  std::vector<Mat> fits;
  for (const auto& shell : shells) {
    if (static_cast<int>(shell.size()) < 2 * m1) throw SamplingError("too few stable gradient samples in a ball");
    Mat a(static_cast<Eigen::Index>(shell.size()), m1);
    Mat b(static_cast<Eigen::Index>(shell.size()), m1);
    for (std::size_t r = 0; r < shell.size(); ++r) {
      const double wn = g.norm(shell[r].first);
      a.row(static_cast<Eigen::Index>(r)) = shell[r].first.head(m1).transpose() / wn;
      b.row(static_cast<Eigen::Index>(r)) = shell[r].second.transpose() / wn;
    }
    const auto qr = a.colPivHouseholderQr();
    if (qr.rank() < m1) throw RankDeficient("gradient samples do not span the horizontal layer");
    fits.push_back(qr.solve(b).transpose());
  }
  fit.ext = fits.back();
  for (const auto& shell : shells) {
    double worst = 0.0;
    for (const auto& [w, d] : shell) worst = std::max(worst, (d - fit.ext * w.head(m1)).norm() / g.norm(w));
    fit.residual.push_back(worst);
  }
  fit.converged = settles(fit.residual, tol, 0.1 * tol);

  std::mt19937_64 rng(derive_seed(plan.seed, 400, x));
  std::vector<Vec> probes;
  for (int i = 0; i < 8; ++i) probes.push_back(sample_quasi_ball(g, 1.0, rng, true));
  fit.tau = fit.rho;
  for (double tau : fit.tau) {
    double worst = 0.0;
    for (const auto& w : probes) {
      const Vec target = fit.ext * w.head(m1);
      const auto quotient = subdiff_quotient(u, x, tau, w, fit.grad, plan);
      for (const auto& v : quotient.vertices()) {
        worst = std::max(worst, (v - target).norm());
      }
    }
    fit.mignot.push_back(worst);
  }
  fit.mignot_converged = settles(fit.mignot, fit.mignot_tol, 0.1 * fit.mignot_tol);
  return fit;
}

double psd_check(const Mat& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("psd_check needs a square matrix");
  if (h.size() == 0) return 0.0;
  if (sup(h - h.transpose()) > 1e-12) throw std::invalid_argument("psd_check needs a symmetric matrix");
  Mat a = 0.5 * (h + h.transpose());
  const Eigen::Index n = a.rows();
  const double scale = std::max(a.squaredNorm(), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off <= 1e-32 * scale) break;
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  return a.diagonal().minCoeff();
}

const ClaimVerdict& SecondOrderReport::claim(const std::string& id) const {
  for (const auto& c : claims) {
    if (c.id == id) return c;
  }
  throw std::out_of_range("no claim '" + id + "'");
}

bool SecondOrderReport::passed() const {
  return std::all_of(claims.begin(), claims.end(), [](const ClaimVerdict& c) { return c.pass; });
}

SecondOrderReport verify_second_order(const ScalarField& u, const Vec& x, const SamplingPlan& plan, double tol,
                                      double psd_tol) {
  const Group& g = *u.group;
  const int m1 = g.horizontal_dim();
  const int m2 = second_layer_dim(g);
  SecondOrderReport rep;
  try {
    rep.expansion = fit_expansion(u, quotient_grid(u, x, plan), tol);
  } catch (const Error& e) {
    rep.expansion_error = e.what();
  }
  try {
    rep.extended = fit_extended_differential(u, x, plan, 8, tol);
  } catch (const Error& e) {
    rep.extended_error = e.what();
  }

  const bool a = rep.expansion_converged();
  const bool b = rep.extended_converged();
  rep.equivalence = a && b ? "both converge" : (!a && !b ? "consistent: neither" : "inconsistent");
  rep.claims.push_back({"equiv", a == b, a == b ? 0.0 : 1.0, 0.0, rep.equivalence});

  if (!(a && b)) {
    for (const char* id : {"c1", "c2", "c3", "psd"}) {
      rep.claims.push_back({id, a == b, 0.0, tol, "not applicable: the fits did not both converge"});
    }
    return rep;
  }

  const auto& ex = *rep.expansion;
  const auto& ed = *rep.extended;
  const Jet2& jet = ex.jet;

  double spread = 0.0;
  for (std::size_t k = ex.v2_by_scale.size() >= 3 ? ex.v2_by_scale.size() - 3 : 0; k < ex.v2_by_scale.size(); ++k) {
    spread = std::max(spread, sup(ex.v2_by_scale[k] - jet.v2));
  }
  const bool finite = jet.v2.allFinite();
  rep.claims.push_back({"c1", finite && spread < tol, spread, tol,
                        m2 == 0 ? "no second layer" : "spread of the second-layer gradient over the last 3 scales"});

  rep.claims.push_back({"c2", ex.residual.back() < tol, ex.residual.back(), tol,
                        "final residual of the fitted expansion against the quotients"});

  Mat identity = Mat::Zero(m1, m1);
  for (int i = 0; i < m1; ++i) {
    for (int j = 0; j < m1; ++j) {
      double rhs = ed.ext(j, i);
      for (int l = 0; l < m2; ++l) rhs -= g.fields().alij(m1 + l, i, j, m1) * jet.v2[l];
      identity(i, j) = jet.hess(i, j) - rhs;
    }
  }
  const double c3 = std::max(sup(identity), sup(jet.ext - ed.ext));
  rep.claims.push_back({"c3", c3 < tol, c3, tol, "Hessian vs extended differential and X_i X_j of the expansion"});

  rep.min_eigenvalue = psd_check(jet.hess);
  rep.claims.push_back({"psd", rep.min_eigenvalue >= -psd_tol, rep.min_eigenvalue, psd_tol,
                        "minimum eigenvalue of the symmetrized Hessian"});
  return rep;
}

}  // namespace carnot
