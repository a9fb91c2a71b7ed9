#pragma once

#include <Eigen/Dense>

#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace carnot {

using Exponents = std::vector<int>;

/// h-degree reported for the zero polynomial.
inline constexpr int kZeroDegree = std::numeric_limits<int>::min();

/// Sparse multivariate polynomial in graded coordinates.
///
/// Every variable carries a homogeneous weight (its layer index), so a
/// monomial x^a has weight d(a) = sum_i weights[i] * a[i]. The h-degree of
/// a polynomial is the largest weight over its nonzero terms; the zero
/// polynomial reports kZeroDegree.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<int> weights);

  static Polynomial constant(std::vector<int> weights, double c);
  static Polynomial variable(std::vector<int> weights, int i);
  static Polynomial monomial(std::vector<int> weights, Exponents exps, double c);

  std::size_t num_vars() const { return weights_.size(); }
  const std::vector<int>& weights() const { return weights_; }
  const std::map<Exponents, double>& terms() const { return terms_; }

  double coeff(const Exponents& e) const;
  void add_term(const Exponents& e, double c);

  bool is_zero() const { return terms_.empty(); }
  int weight(const Exponents& e) const;
  int hdeg() const;

  /// Restriction to the terms of weight exactly j.
  Polynomial homogeneous_part(int j) const;

  double evaluate(std::span<const double> x) const;
  double evaluate(const Eigen::VectorXd& x) const {
    return evaluate(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  }

  /// Partial derivative with respect to coordinate i.
  Polynomial derivative(int i) const;

  /// Drops coefficients with |c| <= eps.
  Polynomial pruned(double eps) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator-(Polynomial a) { return a *= -1.0; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  /// Max absolute coefficient difference.
  static double distance(const Polynomial& a, const Polynomial& b);

  std::string to_string() const;

 private:
  void check_compatible(const Polynomial& o) const;

  std::vector<int> weights_;
  std::map<Exponents, double> terms_;
};

}  // namespace carnot
