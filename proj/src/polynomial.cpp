#include "carnot/polynomial.hpp"

#include "carnot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace carnot {

Polynomial::Polynomial(std::vector<int> weights) : weights_(std::move(weights)) {}

Polynomial Polynomial::constant(std::vector<int> weights, double c) {
  Polynomial p(std::move(weights));
  p.add_term(Exponents(p.num_vars(), 0), c);
  return p;
}

Polynomial Polynomial::variable(std::vector<int> weights, int i) {
  Polynomial p(std::move(weights));
  Exponents e(p.num_vars(), 0);
  e.at(static_cast<std::size_t>(i)) = 1;
  p.add_term(e, 1.0);
  return p;
}

Polynomial Polynomial::monomial(std::vector<int> weights, Exponents exps, double c) {
  Polynomial p(std::move(weights));
  p.add_term(exps, c);
  return p;
}

void Polynomial::check_compatible(const Polynomial& o) const {
  if (weights_ != o.weights_) {
    throw DescriptorMismatch("polynomials over different graded coordinate systems");
  }
}

double Polynomial::coeff(const Exponents& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? 0.0 : it->second;
}

void Polynomial::add_term(const Exponents& e, double c) {
  if (e.size() != weights_.size()) {
    throw std::invalid_argument("exponent vector length does not match variable count");
  }
  if (std::any_of(e.begin(), e.end(), [](int a) { return a < 0; })) {
    throw std::invalid_argument("negative exponent");
  }
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

int Polynomial::weight(const Exponents& e) const {
  int w = 0;
  for (std::size_t i = 0; i < e.size(); ++i) w += weights_[i] * e[i];
  return w;
}

int Polynomial::hdeg() const {
  int deg = kZeroDegree;
  for (const auto& [e, c] : terms_) deg = std::max(deg, weight(e));
  return deg;
}

Polynomial Polynomial::homogeneous_part(int j) const {
  Polynomial out(weights_);
  for (const auto& [e, c] : terms_) {
    if (weight(e) == j) out.terms_.emplace(e, c);
  }
  return out;
}

double Polynomial::evaluate(std::span<const double> x) const {
  if (x.size() != weights_.size()) {
    throw std::invalid_argument("evaluation point has wrong dimension");
  }
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (int k = 0; k < e[i]; ++k) term *= x[i];
    }
    sum += term;
  }
  return sum;
}

Polynomial Polynomial::derivative(int i) const {
  const auto idx = static_cast<std::size_t>(i);
  if (idx >= weights_.size()) throw std::out_of_range("derivative index out of range");
  Polynomial out(weights_);
  for (const auto& [e, c] : terms_) {
    if (e[idx] == 0) continue;
    Exponents d = e;
    d[idx] -= 1;
    out.add_term(d, c * e[idx]);
  }
  return out;
}

Polynomial Polynomial::pruned(double eps) const {
  Polynomial out(weights_);
  for (const auto& [e, c] : terms_) {
    if (std::abs(c) > eps) out.terms_.emplace(e, c);
  }
  return out;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (weights_.empty() && terms_.empty()) weights_ = o.weights_;
  check_compatible(o);
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  if (weights_.empty() && terms_.empty()) weights_ = o.weights_;
  check_compatible(o);
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.check_compatible(b);
  Polynomial out(a.weights_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      Exponents e(ea.size());
      for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

double Polynomial::distance(const Polynomial& a, const Polynomial& b) {
  double d = 0.0;
  for (const auto& [e, c] : (a - b).terms_) d = std::max(d, std::abs(c));
  return d;
}

std::string Polynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << (c < 0 ? " - " : " + ");
    else if (c < 0) os << "-";
    first = false;
    os << std::abs(c);
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      os << "*x" << (i + 1);
      if (e[i] > 1) os << "^" << e[i];
    }
  }
  return os.str();
}

}  // namespace carnot
