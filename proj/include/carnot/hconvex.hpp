#pragma once

#include "carnot/group.hpp"
#include "carnot/polytope.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace carnot {

/// A real function on (an open subset of) a group, in exponential
/// coordinates. `domain` and `gradient` are optional; an empty domain
/// predicate means the whole group.
struct ScalarField {
  GroupPtr group;
  std::string label;
  std::function<double(const Vec&)> value;
  std::function<bool(const Vec&)> domain;
  /// Analytic horizontal gradient (X_1 u, ..., X_m1 u), when known.
  std::function<Vec(const Vec&)> gradient;

  double operator()(const Vec& x) const { return value(x); }
  bool contains(const Vec& x) const { return !domain || domain(x); }
  bool has_gradient() const { return static_cast<bool>(gradient); }
};

struct Tolerances {
  double membership = 1e-6;    // subdifferential membership violation
  double singleton = 1e-3;     // hull diameter counted as a single point
  double fd_stability = 1e-4;  // agreement of FD gradients at two steps
  double mvt_gap = 1e-4;       // slope outside the sampled support range
  double monotone = 1e-7;      // slack for monotone difference quotients
  double convexity = 1e-10;    // registry certificate threshold
};

struct SamplingPlan {
  std::vector<double> radii{1e-1, 1e-2, 1e-3, 1e-4};
  int samples_per_shell = 48;
  double fd_step = 1e-6;
  int directions = 64;
  std::uint64_t seed = 20240601;
  double sample_radius = 1.0;   // base points are drawn from [-R, R]^n
  double probe_radius = 0.5;    // largest |h| used by membership probes
  int probe_levels = 12;        // probe scales probe_radius * 2^-k
  int convexity_samples = 200;  // (x, h) pairs per convexity check
  std::vector<double> lambda_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  Tolerances tol;

  /// Throws SamplingError when the schedule or counts are invalid.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Sampling utilities

/// Deterministic per-call seed derived from the plan seed, a tag and a point.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, const Vec& x = Vec());

/// Point with homogeneous norm <= r (exactly r when `on_sphere`).
Vec sample_quasi_ball(const Group& g, double r, std::mt19937_64& rng, bool on_sphere = false);

/// Unit horizontal directions: evenly spaced angles for m1 = 2 (including the
/// axes when count is a multiple of 4), +-e_i plus random directions otherwise.
std::vector<Vec> horizontal_directions(int m1, int count, std::uint64_t seed);

/// True when x * (t h) lies in the domain at 32 interior points of [0, 1]
/// and at both endpoints.
bool segment_admissible(const ScalarField& u, const Vec& x, const Vec& h);

// ---------------------------------------------------------------------------
// First-order analysis

struct ConvexityReport {
  double max_violation = 0.0;  // max over samples of u(x l h) - l u(xh) - (1-l) u(x), clamped at 0
  int samples = 0;             // admissible (x, h, lambda) triples evaluated
  Vec worst_x;
  Vec worst_h;
  double worst_lambda = 0.0;
};

/// Samples the defining inequality of h-convexity along horizontal segments.
/// Throws SamplingError when no admissible segment is found.
ConvexityReport hconvexity_check(const ScalarField& u, const SamplingPlan& plan);

/// Central differences of t -> u(x * t e_i), i < m1. Throws DomainError when
/// x * (+-2 eta e_i) leaves the domain.
Vec horizontal_fd_gradient(const ScalarField& u, const Vec& x, double eta);

struct GradientSample {
  int shell = 0;  // index into plan.radii
  Vec point;      // x * w
  Vec gradient;
};

/// FD gradients at stable points of each shell x * B(0, r_m). Points where
/// the gradients at steps eta and eta/2 disagree are rejected and resampled.
/// Throws SamplingError when the finest shell ends up empty.
std::vector<GradientSample> reachable_gradient_sample(const ScalarField& u, const Vec& x,
                                                      const SamplingPlan& plan);

struct SubdiffHull {
  ConvexPolytope hull;
  std::vector<int> flagged;  // vertex indices failing the membership probe
  double max_vertex_violation = 0.0;
};

/// Convex hull of the finest-shell reachable gradients; every vertex is
/// probed with subdiff_membership.
SubdiffHull subdifferential_hull(const ScalarField& u, const Vec& x, const SamplingPlan& plan);

/// Like subdifferential_hull but with the radius schedule replaced by {r}
/// and the vertices not probed.
ConvexPolytope hull_at_radius(const ScalarField& u, const Vec& x, double r, const SamplingPlan& plan);

/// max over probe directions and scales of u(x) + <p, h> - u(xh), clamped at 0.
double subdiff_membership(const ScalarField& u, const Vec& x, const Vec& p, const SamplingPlan& plan);

/// Same probe with the slack lambda |h|^2. Throws std::invalid_argument for
/// lambda < 0.
double lambda_subdiff_membership(const ScalarField& u, const Vec& x, const Vec& p, double lambda,
                                 const SamplingPlan& plan);

/// One-sided derivative lim (u(x (l h)) - u(x)) / l for l -> 0+, by
/// Richardson extrapolation on a halving ladder. Throws ConvexityError when
/// the difference quotient is not monotone.
double directional_derivative(const ScalarField& u, const Vec& x, const Vec& h,
                              const Tolerances& tol = {});

struct DermaxReport {
  double discrepancy = 0.0;            // max |u'(x, h) - support(hull, h)|
  double subadditivity_violation = 0.0;  // max of u'(h1 + h2) - u'(h1) - u'(h2), clamped at 0
  int directions = 0;
};

DermaxReport dermax_check(const ScalarField& u, const Vec& x, const SamplingPlan& plan);

struct MvtWitness {
  double t = 0.0;
  Vec p;
  double residual = 0.0;
  double slope = 0.0;  // u(xh) - u(x)
  bool nearest = false;  // slope fell outside the sampled support range
};

/// Finds t in [0, 1] and p in the hull at x (t h) with <p, h> = u(xh) - u(x).
/// Throws DomainError when the segment leaves the domain, ConvexityError when
/// the one-sided derivatives do not bracket the slope and SamplingError when
/// the slope misses the hull support range by more than tol.mvt_gap.
MvtWitness mean_value_witness(const ScalarField& u, const Vec& x, const Vec& h, const SamplingPlan& plan);

struct LambdaMvtWitness {
  ScalarField u;  // U + P
  double lambda = 0.0;  // 1.05 * lambda_max(P)
  double t = 0.0;
  Vec p;  // q + grad_H P(x dil_t h) with q in the hull of U
  double residual = 0.0;
  double slope = 0.0;
  double membership = 0.0;  // lambda_subdiff_membership(u, x dil_t h, p, lambda)
};

/// Mean value witness for u = U + P with U h-convex and hdeg P <= 2: t is an
/// interior extremum of u(x dil_t h) - t (u(xh) - u(x)), and p is probed for
/// membership in the lambda-subdifferential of u there.
LambdaMvtWitness lambda_mean_value_witness(const ScalarField& big_u, const Polynomial& poly, const Vec& x,
                                           const Vec& h, const SamplingPlan& plan);

struct ClosedGraphReport {
  std::vector<double> distances;  // |x_k - x| (homogeneous norm)
  std::vector<Vec> supports;      // p_k
  Vec limit;
  double violation = 0.0;  // subdiff_membership(u, x, limit)
  double tolerance = 0.0;
  bool passed() const { return violation <= tolerance; }
};

/// Follows x_k = x * dil_{2^-k} w towards x, tracks the support point p_k of
/// hull(x_k) in a fixed direction, and probes the limit for membership at x.
ClosedGraphReport closed_graph_diagnostic(const ScalarField& u, const Vec& x, const SamplingPlan& plan);

struct FirstOrderReport {
  double diameter = 0.0;
  Vec p;  // hull centroid
  std::vector<double> rho;
  std::vector<double> residual;  // sup_{|w| = rho} |u(xw) - u(x) - <p, pi_1 w>| / rho
  bool singleton = false;
  bool converged = false;
  bool agree() const { return singleton == converged; }
};

/// The ladder residual threshold used by first_order_characterization.
inline constexpr double kFirstOrderTol = 1e-2;

FirstOrderReport first_order_characterization(const ScalarField& u, const Vec& x, const SamplingPlan& plan);

/// sup_{|h| = rho} (u(x) + <p, h> - u(xh))_+ / rho along the probe ladder:
/// the o(|h|)-relaxed sub-jet inequality.
std::vector<double> relaxed_subjet_curve(const ScalarField& u, const Vec& x, const Vec& p,
                                         const SamplingPlan& plan);

}  // namespace carnot
