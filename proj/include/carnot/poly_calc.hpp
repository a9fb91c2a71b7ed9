#pragma once

#include "carnot/group.hpp"
#include "carnot/polynomial.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace carnot {

/// Second-order data of a function (or polynomial) at a point.
///
/// `ext` is the extended differential stored row-per-field:
/// ext(j, i) = A^i_j, so that X_j P(w) = sum_i ext(j, i) w_i.
struct Jet2 {
  double value = 0.0;
  Vec grad;  // horizontal gradient, length m1
  Vec v2;    // second-layer gradient, length m2 - m1
  Mat hess;  // symmetrized horizontal Hessian, m1 x m1
  Mat ext;   // extended differential, m1 x m1

  static Jet2 zero(const Group& g);
};

/// Zero polynomial over the coordinates of g.
Polynomial zero_polynomial(const Group& g);
Polynomial coordinate(const Group& g, int i);

/// Monomial basis of the polynomials of h-degree <= max_degree.
std::vector<Exponents> graded_basis(const std::vector<int>& weights, int max_degree);

/// X_j P = d_j P + sum_l a^l_j d_l P, exact. j is 0-based.
Polynomial apply_field(const Group& g, int j, const Polynomial& p);

/// X_{w_1} X_{w_2} ... X_{w_k} P for an ordered word of 0-based field
/// indices (the rightmost field acts first).
Polynomial apply_word(const Group& g, const std::vector<int>& word, const Polynomial& p);

/// Horizontal gradient (X_1 P, ..., X_m1 P) evaluated at x.
Vec horizontal_gradient(const Group& g, const Polynomial& p, const Vec& x);

/// Values X^I P(0) for the words I = {}, single fields of layers 1 and 2,
/// and ordered horizontal pairs (i, j) meaning X_i X_j P(0).
/// Throws DegreeError when hdeg(P) > 2.
std::map<std::vector<int>, double> jet_coefficients(const Group& g, const Polynomial& p);

/// The unique polynomial of h-degree <= 2 with P(0) = value, horizontal
/// linear part <grad, pi_1 w>, second-layer part <v2, pi_2 w> and
/// symmetrized horizontal Hessian `hess`. `ext` is ignored.
Polynomial poly_from_jet2(const Group& g, const Jet2& jet);

/// Full Jet2 of P at the identity, including ext(j, i) = X_i X_j P.
Jet2 jet_from_poly(const Group& g, const Polynomial& p);

struct SymHessian {
  Mat hess;  // (X_i X_j P + X_j X_i P) / 2
  Vec v2;    // (X_l P) for l in the second layer
};
/// Throws DegreeError when hdeg(P) > 2.
SymHessian sym_hessian(const Group& g, const Polynomial& p);

/// Residual X_i X_j P - (c_ij + c_ji)/2 - sum_l X_l P a^{li}_j, entrywise,
/// where c is read off the horizontal quadratic coefficients of P.
Mat check_alij(const Group& g, const Polynomial& p);

struct LambdaMax {
  double value = 0.0;
  int samples = 0;
  std::string note;
};
/// Sampled maximum of |P^(2)| over the homogeneous unit sphere, refined
/// by local search. A lower bound on the true maximum.
LambdaMax lambda_max(const Group& g, const Polynomial& p, int samples = 10000, std::uint64_t seed = 7);

/// The polynomial h -> P(x * h), recovered by least-squares interpolation
/// on a deterministic sample set (exact: h-degree <= 2 is preserved by
/// left translation). Throws DegreeError when hdeg(P) > 2.
Polynomial left_translate_poly(const Group& g, const Polynomial& p, const Vec& x);

}  // namespace carnot
