#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "carnot/errors.hpp"
#include "carnot/poly_calc.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace carnot;
using carnot::testing::make_group;
using carnot::testing::random_point;
using carnot::testing::random_poly2;
using carnot::testing::vec;

namespace {

double sup(const Mat& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Polynomial var(const Group& g, int i) { return coordinate(g, i); }

}  // namespace

TEST_CASE("hdeg and homogeneous parts") {
  const auto h1 = make_group("heisenberg:1");
  const auto& g = *h1;
  CHECK(var(g, 2).hdeg() == 2);
  CHECK((var(g, 0) * var(g, 1)).hdeg() == 2);
  CHECK((var(g, 0) * var(g, 2)).hdeg() == 3);
  CHECK(Polynomial::constant(g.degrees(), 4.0).hdeg() == 0);
  CHECK(zero_polynomial(g).hdeg() == kZeroDegree);

  const Polynomial p = Polynomial::constant(g.degrees(), 1.0) + var(g, 0) + var(g, 2);
  CHECK(Polynomial::distance(p.homogeneous_part(2), var(g, 2)) == 0.0);
  CHECK(Polynomial::distance(p.homogeneous_part(0), Polynomial::constant(g.degrees(), 1.0)) == 0.0);
  CHECK(p.homogeneous_part(5).is_zero());

  std::mt19937_64 rng(1);
  for (const auto& name : carnot::builtin_group_names()) {
    const auto grp = make_group(name);
    for (int trial = 0; trial < 20; ++trial) {
      Polynomial q = random_poly2(*grp, rng) * (var(*grp, 0) + Polynomial::constant(grp->degrees(), 0.5));
      Polynomial sum(grp->degrees());
      for (int j = 0; j <= q.hdeg(); ++j) {
        const Polynomial part = q.homogeneous_part(j);
        sum += part;
        const Vec x = random_point(grp->dim(), rng);
        const double r = 1.3;
        CHECK(std::abs(part.evaluate(grp->dilate(r, x)) - std::pow(r, j) * part.evaluate(x)) <
              1e-12 * (1.0 + std::abs(part.evaluate(grp->dilate(r, x)))));
      }
      CHECK(Polynomial::distance(sum, q) < 1e-15);
    }
  }
}

TEST_CASE("apply_field examples") {
  const auto h1 = make_group("heisenberg:1");
  const auto& g = *h1;
  CHECK(Polynomial::distance(apply_field(g, 0, var(g, 2)), -0.5 * var(g, 1)) < 1e-15);
  CHECK(Polynomial::distance(apply_field(g, 1, var(g, 2)), 0.5 * var(g, 0)) < 1e-15);
  CHECK(Polynomial::distance(apply_field(g, 0, var(g, 0)), Polynomial::constant(g.degrees(), 1.0)) == 0.0);

  const auto r3 = make_group("euclidean:3");
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Polynomial p = random_poly2(*r3, rng) * random_poly2(*r3, rng);
    for (int j = 0; j < 3; ++j) CHECK(Polynomial::distance(apply_field(*r3, j, p), p.derivative(j)) == 0.0);
  }

  CHECK_THROWS_AS(apply_field(g, 5, var(g, 0)), std::out_of_range);
  CHECK_THROWS_AS(apply_field(g, 0, var(*r3, 0)), DescriptorMismatch);
}

TEST_CASE("apply_field lowers the h-degree of homogeneous inputs by d_j") {
  std::mt19937_64 rng(3);
  for (const auto& name : carnot::builtin_group_names()) {
    const auto g = make_group(name);
    for (int trial = 0; trial < 10; ++trial) {
      const Polynomial p = random_poly2(*g, rng).homogeneous_part(2);
      for (int j = 0; j < g->dim(); ++j) {
        const Polynomial q = apply_field(*g, j, p);
        if (!q.is_zero()) CHECK(q.hdeg() <= 2 - g->degrees()[static_cast<std::size_t>(j)]);
      }
    }
  }
}

TEST_CASE("apply_field agrees with a centered finite difference along x * t e_j") {
  std::mt19937_64 rng(4);
  for (const auto& name : carnot::builtin_group_names()) {
    const auto g = make_group(name);
    CAPTURE(name);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      const Polynomial p = random_poly2(*g, rng) * random_poly2(*g, rng);
      const Vec x = random_point(g->dim(), rng);
      for (int j = 0; j < g->dim(); ++j) {
        const double eta = 2e-5;
        Vec e = Vec::Zero(g->dim());
        e[j] = eta;
        const double fd = (p.evaluate(g->product(x, e)) - p.evaluate(g->product(x, -e))) / (2 * eta);
        const double exact = apply_field(*g, j, p).evaluate(x);
        worst = std::max(worst, std::abs(fd - exact) / std::max(1.0, std::abs(exact)));
      }
    }
    CHECK(worst < 1e-7);
  }
}

TEST_CASE("jet_coefficients") {
  const auto h1 = make_group("heisenberg:1");
  const auto& g = *h1;
  SUBCASE("x1^2") {
    const auto c = jet_coefficients(g, var(g, 0) * var(g, 0));
    for (const auto& [word, value] : c) {
      CAPTURE(word.size());
      if (word == std::vector<int>{0, 0}) CHECK(value == doctest::Approx(2.0));
      else CHECK(value == 0.0);
    }
  }
  SUBCASE("x3") {
    const auto c = jet_coefficients(g, var(g, 2));
    CHECK(c.at({2}) == doctest::Approx(1.0));
    CHECK(c.at({0, 1}) == doctest::Approx(0.5));
    CHECK(c.at({1, 0}) == doctest::Approx(-0.5));
    CHECK(c.at({0, 0}) == 0.0);
    CHECK(c.at({}) == 0.0);
  }
  SUBCASE("zero") {
    for (const auto& [word, value] : jet_coefficients(g, zero_polynomial(g))) CHECK(value == 0.0);
  }
  SUBCASE("degree above 2") { CHECK_THROWS_AS(jet_coefficients(g, var(g, 0) * var(g, 2)), DegreeError); }
  SUBCASE("map is injective on P_2: the basis maps to independent vectors") {
    for (const auto& name : carnot::builtin_group_names()) {
      const auto grp = make_group(name);
      const auto basis = graded_basis(grp->degrees(), 2);
      std::vector<Vec> cols;
      for (const auto& e : basis) {
        const auto c = jet_coefficients(*grp, Polynomial::monomial(grp->degrees(), e, 1.0));
        Vec v(static_cast<Eigen::Index>(c.size()));
        Eigen::Index k = 0;
        for (const auto& [word, value] : c) v[k++] = value;
        cols.push_back(v);
      }
      Mat m(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = cols[k];
      CHECK(Eigen::FullPivLU<Mat>(m).rank() == static_cast<Eigen::Index>(basis.size()));
    }
  }
}

TEST_CASE("poly_from_jet2") {
  const auto h1 = make_group("heisenberg:1");
  const auto& g = *h1;
  SUBCASE("zero jet gives the constant") {
    Jet2 jet = Jet2::zero(g);
    jet.value = 3.5;
    CHECK(Polynomial::distance(poly_from_jet2(g, jet), Polynomial::constant(g.degrees(), 3.5)) == 0.0);
  }
  SUBCASE("H = 2I, v2 = alpha") {
    Jet2 jet = Jet2::zero(g);
    jet.hess = 2.0 * Mat::Identity(2, 2);
    jet.v2 = vec({0.7});
    const Polynomial expected = var(g, 0) * var(g, 0) + var(g, 1) * var(g, 1) + 0.7 * var(g, 2);
    CHECK(Polynomial::distance(poly_from_jet2(g, jet).homogeneous_part(2), expected) < 1e-15);
  }
  SUBCASE("round trip and the claim-(3) identity on random jets") {
    std::mt19937_64 rng(5);
    for (const auto& name : carnot::builtin_group_names()) {
      const auto grp = make_group(name);
      const int m1 = grp->horizontal_dim();
      const int m2 = grp->layer_dim(2);
      const auto& fc = grp->fields();
      for (int trial = 0; trial < 50; ++trial) {
        Jet2 jet = Jet2::zero(*grp);
        jet.value = random_point(1, rng)[0];
        jet.grad = random_point(m1, rng);
        jet.v2 = random_point(m2, rng);
        const Mat s = Mat::NullaryExpr(m1, m1, [&](Eigen::Index, Eigen::Index) { return random_point(1, rng)[0]; });
        jet.hess = s + s.transpose();
        const Jet2 back = jet_from_poly(*grp, poly_from_jet2(*grp, jet));
        CHECK(std::abs(back.value - jet.value) < 1e-12);
        CHECK(sup(back.grad - jet.grad) < 1e-12);
        CHECK(sup(back.v2 - jet.v2) < 1e-12);
        CHECK(sup(back.hess - jet.hess) < 1e-12);
        for (int i = 0; i < m1; ++i) {
          for (int j = 0; j < m1; ++j) {
            double rhs = back.ext(j, i);
            for (int l = 0; l < m2; ++l) rhs -= fc.alij(m1 + l, i, j, m1) * back.v2[l];
            CHECK(std::abs(back.hess(i, j) - rhs) < 1e-10);
          }
        }
      }
    }
  }
}

TEST_CASE("sym_hessian") {
  const auto h1 = make_group("heisenberg:1");
  const auto& g = *h1;
  auto s = sym_hessian(g, var(g, 0) * var(g, 0) + var(g, 1) * var(g, 1));
  CHECK(sup(s.hess - 2.0 * Mat::Identity(2, 2)) < 1e-15);
  CHECK(sup(s.v2) == 0.0);
  s = sym_hessian(g, var(g, 2));
  CHECK(sup(s.hess) < 1e-15);
  CHECK(s.v2[0] == doctest::Approx(1.0));
  // X1 X2 (x1 x2) = X2 X1 (x1 x2) = 1
  s = sym_hessian(g, var(g, 0) * var(g, 1));
  CHECK(s.hess(0, 1) == doctest::Approx(1.0));
  CHECK(s.hess(1, 0) == doctest::Approx(1.0));
  CHECK(s.hess(0, 0) == 0.0);
  CHECK_THROWS_AS(sym_hessian(g, var(g, 2) * var(g, 2)), DegreeError);
}

TEST_CASE("check_alij") {
  std::mt19937_64 rng(6);
  for (const auto& name : carnot::builtin_group_names()) {
    const auto g = make_group(name);
    CAPTURE(name);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) worst = std::max(worst, sup(check_alij(*g, random_poly2(*g, rng))));
    CHECK(worst < 1e-10);
  }
  const auto h1 = make_group("heisenberg:1");
  const auto& g = *h1;
  const Polynomial horiz = 3.0 * var(g, 0) * var(g, 0) - var(g, 0) * var(g, 1);
  const auto jet = jet_from_poly(g, horiz);
  CHECK(jet.ext(0, 0) == doctest::Approx(6.0));
  CHECK(jet.ext(1, 0) == doctest::Approx(-1.0));
  CHECK(jet.ext(0, 1) == doctest::Approx(-1.0));
  CHECK(sup(check_alij(g, horiz)) < 1e-15);

  // abelian: reduces to symmetry of second partials
  const auto r2 = make_group("euclidean:2");
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_poly2(*r2, rng);
    const auto j = jet_from_poly(*r2, p);
    CHECK(sup(j.ext - j.ext.transpose()) == 0.0);
    CHECK(sup(check_alij(*r2, p)) < 1e-15);
  }
}

TEST_CASE("lambda_max") {
  const auto h1 = make_group("heisenberg:1");
  const auto& g = *h1;
  const Polynomial p = var(g, 0) * var(g, 0) + var(g, 1) * var(g, 1);
  const auto lm = lambda_max(g, p);
  CHECK(lm.value <= 1.0 + 1e-12);
  CHECK(lm.value > 1.0 - 1e-6);
  CHECK(lambda_max(g, zero_polynomial(g)).value == 0.0);
  CHECK(lambda_max(g, var(g, 0) + Polynomial::constant(g.degrees(), 3.0)).value == 0.0);

  // Brute-force oracle on H^1: parametrize the sphere as
  // (rho cos a, rho sin a, +-(1 - rho)^2), rho in [0, 1].
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    const Polynomial q = random_poly2(g, rng);
    const Polynomial top = q.homogeneous_part(2);
    double brute = 0.0;
    for (int i = 0; i <= 400; ++i) {
      const double rho = i / 400.0;
      for (int k = 0; k < 400; ++k) {
        const double a = 2 * M_PI * k / 400.0;
        for (double sgn : {-1.0, 1.0}) {
          const Vec w = vec({rho * std::cos(a), rho * std::sin(a), sgn * (1 - rho) * (1 - rho)});
          brute = std::max(brute, std::abs(top.evaluate(w)));
        }
      }
    }
    const double sampled = lambda_max(g, q).value;
    CHECK(sampled >= brute - 1e-3 * brute);
    CHECK(sampled <= brute * (1 + 1e-3));
  }

  // scaling: |P2 o delta_r| has maximum r^2 lambda
  for (const auto& name : carnot::builtin_group_names()) {
    const auto grp = make_group(name);
    const Polynomial q = random_poly2(*grp, rng).homogeneous_part(2);
    const double r = 1.6;
    Polynomial scaled(grp->degrees());
    for (const auto& [e, c] : q.terms()) scaled.add_term(e, c * std::pow(r, q.weight(e)));
    const double l0 = lambda_max(*grp, q).value;
    const double l1 = lambda_max(*grp, scaled).value;
    CHECK(std::abs(l1 - r * r * l0) / (r * r * l0) < 1e-3);
  }
}

TEST_CASE("lambda_max refinement terminates and dominates the axis values") {
  // Regression: creeping sub-rounding gains once kept the local search from
  // shrinking its step on free step-2 groups.
  const auto grp = make_group("free_step2:3");
  const auto& g = *grp;
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    const Polynomial q = random_poly2(g, rng);
    const Polynomial top = q.homogeneous_part(2);
    const double lm = lambda_max(g, q).value;
    REQUIRE(std::isfinite(lm));
    for (int i = 0; i < g.dim(); ++i) {
      Vec e = Vec::Zero(g.dim());
      e[i] = 1.0;  // unit homogeneous norm in every layer
      CHECK(lm >= std::abs(top.evaluate(e)) - 1e-9);
    }
  }
}

TEST_CASE("left_translate_poly") {
  const auto h1 = make_group("heisenberg:1");
  const auto& g = *h1;
  std::mt19937_64 rng(9);
  const Polynomial p = random_poly2(g, rng);
  CHECK(Polynomial::distance(left_translate_poly(g, p, g.identity()), p) < 1e-12);

  const Polynomial translated = left_translate_poly(g, var(g, 2), vec({1, 0, 0}));
  CHECK(Polynomial::distance(translated, var(g, 2) + 0.5 * var(g, 1)) < 1e-12);

  CHECK_THROWS_AS(left_translate_poly(g, var(g, 0) * var(g, 2), vec({1, 0, 0})), DegreeError);

  for (const auto& name : carnot::builtin_group_names()) {
    const auto grp = make_group(name);
    CAPTURE(name);
    for (int trial = 0; trial < 20; ++trial) {
      const Polynomial q = random_poly2(*grp, rng);
      const Vec x = random_point(grp->dim(), rng);
      const Polynomial qx = left_translate_poly(*grp, q, x);
      // exactness at fresh points
      const Vec h = random_point(grp->dim(), rng);
      CHECK(std::abs(qx.evaluate(h) - q.evaluate(grp->product(x, h))) < 1e-12);
      // the symmetrized Hessian and v2 are unchanged by translation
      const auto before = sym_hessian(*grp, q);
      const auto after = sym_hessian(*grp, qx);
      CHECK(sup(before.hess - after.hess) < 1e-12);
      CHECK(sup(before.v2 - after.v2) < 1e-12);
      // the 1-homogeneous part is <grad_H q(x), pi_1 h>
      const Vec grad = horizontal_gradient(*grp, q, x);
      Polynomial linear(grp->degrees());
      for (int i = 0; i < grp->horizontal_dim(); ++i) linear += grad[i] * var(*grp, i);
      CHECK(Polynomial::distance(qx.homogeneous_part(1), linear) < 1e-12);
      CHECK(std::abs(qx.homogeneous_part(0).evaluate(grp->identity()) - q.evaluate(x)) < 1e-12);
    }
  }
}
