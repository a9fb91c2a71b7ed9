#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "carnot/builtin_groups.hpp"
#include "carnot/errors.hpp"
#include "carnot/group.hpp"
#include "test_support.hpp"

#include <cmath>

using namespace carnot;
using carnot::testing::make_group;
using carnot::testing::random_point;
using carnot::testing::vec;

namespace {

double sup(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Hand-coded Engel bracket: [e1,e2] = e3, [e1,e3] = e4.
Vec engel_bracket(const Vec& a, const Vec& b) {
  Vec out = Vec::Zero(4);
  out[2] = a[0] * b[1] - a[1] * b[0];
  out[3] = a[0] * b[2] - a[2] * b[0];
  return out;
}

// Step-3 BCH closed form: x + y + [x,y]/2 + ([x,[x,y]] + [y,[y,x]])/12.
Vec engel_product_oracle(const Vec& x, const Vec& y) {
  const Vec xy = engel_bracket(x, y);
  return x + y + 0.5 * xy + (engel_bracket(x, xy) + engel_bracket(y, engel_bracket(y, x))) / 12.0;
}

// Filiform step-4 algebra: [e1,e2]=e3, [e1,e3]=e4, [e1,e4]=e5.
GroupDescriptor filiform4() { return {"filiform4", {2, 1, 1, 1}, {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}, {0, 3, 4, 1.0}}}; }

bool has_violation(const ValidationReport& r, const std::string& kind) {
  for (const auto& v : r.violations) {
    if (v.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("validate_descriptor accepts the builtins") {
  for (const auto& name : {"heisenberg:1", "heisenberg:2", "free_step2:3", "free_step2:4", "engel", "euclidean:3"}) {
    CAPTURE(name);
    CHECK(validate_descriptor(builtin_group(name)).ok());
  }
  CHECK(validate_descriptor(filiform4()).ok());
}

TEST_CASE("validate_descriptor reports each violated invariant") {
  SUBCASE("missing brackets break stratification at s = 2") {
    const auto r = validate_descriptor({"bad", {2, 1}, {}});
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].kind == "stratification");
    CHECK(r.violations[0].indices == std::vector<int>{2});
  }
  SUBCASE("inconsistent orientations break antisymmetry") {
    const auto r = validate_descriptor({"bad", {2, 1}, {{0, 1, 2, 1.0}, {1, 0, 2, 1.0}}});
    CHECK(has_violation(r, "antisymmetry"));
  }
  SUBCASE("self bracket") {
    const auto r = validate_descriptor({"bad", {2, 1}, {{0, 1, 2, 1.0}, {0, 0, 2, 1.0}}});
    CHECK(has_violation(r, "antisymmetry"));
  }
  SUBCASE("bracket into the wrong layer breaks grading") {
    const auto r = validate_descriptor({"bad", {2, 1}, {{0, 1, 1, 1.0}, {0, 1, 2, 1.0}}});
    CHECK(has_violation(r, "grading"));
  }
  SUBCASE("Jacobi failure on a layer-1 triple") {
    GroupDescriptor d{"bad", {3, 3, 1}, {}};
    d.brackets = {{0, 1, 3, 1.0}, {0, 2, 4, 1.0}, {1, 2, 5, 1.0}, {0, 5, 6, 1.0}};
    const auto r = validate_descriptor(d);
    REQUIRE(has_violation(r, "jacobi"));
    bool found = false;
    for (const auto& v : r.violations) found |= v.kind == "jacobi" && v.indices == std::vector<int>{1, 2, 3};
    CHECK(found);
  }
  SUBCASE("out of range index is a shape error") {
    const auto r = validate_descriptor({"bad", {2, 1}, {{0, 1, 7, 1.0}}});
    CHECK(has_violation(r, "shape"));
  }
  SUBCASE("abelian R^3 passes vacuously") { CHECK(validate_descriptor(euclidean(3)).ok()); }
}

TEST_CASE("Group::create rejects invalid descriptors unless forced") {
  const GroupDescriptor bad{"bad", {2, 1}, {}};
  CHECK_THROWS_AS(Group::create(bad), InvalidDescriptor);
  const auto forced = Group::create(bad, true);
  CHECK_FALSE(forced->validated());
  CHECK_THROWS_AS(forced->fields(), InvalidDescriptor);
  CHECK(sup(forced->product(vec({1, 0, 0}), vec({0, 1, 0})) - vec({1, 1, 0})) == 0.0);
}

TEST_CASE("bch_product examples") {
  const auto h1 = make_group("heisenberg:1");
  CHECK(sup(h1->product(vec({1, 0, 0}), vec({0, 1, 0})) - vec({1, 1, 0.5})) < 1e-15);

  std::mt19937_64 rng(11);
  for (const auto& name : builtin_group_names()) {
    const auto g = make_group(name);
    const Vec x = random_point(g->dim(), rng);
    CHECK(sup(g->product(x, g->identity()) - x) == 0.0);
    CHECK(sup(g->product(g->identity(), x) - x) == 0.0);
    CHECK(sup(g->product(x, g->inverse(x))) < 1e-14);
  }

  const auto r3 = make_group("euclidean:3");
  for (int k = 0; k < 100; ++k) {
    const Vec x = random_point(3, rng), y = random_point(3, rng);
    CHECK(sup(r3->product(x, y) - (x + y)) == 0.0);
  }
}

TEST_CASE("bch_product matches the Heisenberg closed form") {
  const auto h1 = make_group("heisenberg:1");
  std::mt19937_64 rng(3);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec x = random_point(3, rng), y = random_point(3, rng);
    Vec oracle = x + y;
    oracle[2] += 0.5 * (x[0] * y[1] - x[1] * y[0]);
    worst = std::max(worst, sup(h1->product(x, y) - oracle));
  }
  CHECK(worst < 1e-14);
}

TEST_CASE("bch_product matches the step-3 closed form on the Engel group") {
  const auto g = make_group("engel");
  std::mt19937_64 rng(5);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec x = random_point(4, rng, 2.0), y = random_point(4, rng, 2.0);
    worst = std::max(worst, sup(g->product(x, y) - engel_product_oracle(x, y)));
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("group law is associative, including step 4") {
  std::vector<GroupPtr> groups;
  for (const auto& name : builtin_group_names()) groups.push_back(make_group(name));
  groups.push_back(Group::create(filiform4()));
  std::mt19937_64 rng(17);
  for (const auto& g : groups) {
    CAPTURE(g->name());
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vec x = random_point(g->dim(), rng), y = random_point(g->dim(), rng), z = random_point(g->dim(), rng);
      worst = std::max(worst, sup(g->product(g->product(x, y), z) - g->product(x, g->product(y, z))));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("GroupPoint operations check the group") {
  const auto a = make_group("heisenberg:1");
  const auto b = make_group("heisenberg:1");
  const auto x = make_point(a, vec({1, 2, 3}));
  const auto y = make_point(b, vec({1, 2, 3}));
  CHECK_THROWS_AS(bch_product(x, y), DescriptorMismatch);
  CHECK(sup(inverse(x).coords - vec({-1, -2, -3})) == 0.0);
  CHECK(sup(inverse(make_point(a, Vec::Zero(3))).coords) == 0.0);
  CHECK_THROWS_AS(make_point(a, vec({1, 2})), std::invalid_argument);
  CHECK_THROWS_AS(make_point(a, vec({1, 2, NAN})), std::invalid_argument);
}

TEST_CASE("dilations") {
  const auto h1 = make_group("heisenberg:1");
  CHECK(sup(h1->dilate(2.0, vec({1, 1, 1})) - vec({2, 2, 4})) == 0.0);
  CHECK(sup(h1->dilate(1.0, vec({0.3, -1, 7})) - vec({0.3, -1, 7})) == 0.0);
  CHECK_THROWS_AS(h1->dilate(0.0, vec({1, 1, 1})), std::domain_error);
  CHECK_THROWS_AS(dilate(-1.0, make_point(h1, vec({1, 1, 1}))), std::domain_error);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> radius(0.1, 3.0);
  for (const auto& name : builtin_group_names()) {
    const auto g = make_group(name);
    CAPTURE(name);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double r = radius(rng);
      const Vec x = random_point(g->dim(), rng), y = random_point(g->dim(), rng);
      worst = std::max(worst, sup(g->dilate(r, g->product(x, y)) - g->product(g->dilate(r, x), g->dilate(r, y))));
    }
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("homogeneous norm") {
  const auto h1 = make_group("heisenberg:1");
  CHECK(h1->norm(vec({3, 4, 0})) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(h1->norm(vec({0, 0, 4})) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(h1->norm(h1->identity()) == 0.0);
  CHECK(h1->norm(vec({0, 0, 1e-30})) > 0.0);

  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> radius(0.1, 5.0);
  for (const auto& name : builtin_group_names()) {
    const auto g = make_group(name);
    double worst = 0.0;
    double worst_iso = 0.0;
    for (int k = 0; k < 500; ++k) {
      const double r = radius(rng);
      const Vec x = random_point(g->dim(), rng);
      worst = std::max(worst, std::abs(g->norm(g->dilate(r, x)) - r * g->norm(x)) / (1.0 + r * g->norm(x)));
      // left-translation invariance of d(x, y) = |x^-1 y|
      const Vec u = random_point(g->dim(), rng), y = random_point(g->dim(), rng);
      const double d0 = g->norm(g->product(g->inverse(x), y));
      const double d1 = g->norm(g->product(g->inverse(g->product(u, x)), g->product(u, y)));
      worst_iso = std::max(worst_iso, std::abs(d0 - d1));
    }
    CHECK(worst < 1e-13);
    CHECK(worst_iso < 1e-12);
  }
}

TEST_CASE("project_layer") {
  const auto h1 = make_group("heisenberg:1");
  const auto x = make_point(h1, vec({1, 2, 3}));
  CHECK(sup(project_layer(x, 1) - vec({1, 2})) == 0.0);
  CHECK(sup(project_layer(x, 2) - vec({3})) == 0.0);
  CHECK_THROWS_AS(project_layer(x, 0), std::out_of_range);
  CHECK_THROWS_AS(project_layer(x, 3), std::out_of_range);
  const auto r3 = make_group("euclidean:3");
  CHECK(sup(r3->project_layer(vec({4, 5, 6}), 1) - vec({4, 5, 6})) == 0.0);
}

TEST_CASE("field coefficients") {
  SUBCASE("Heisenberg constants") {
    const auto h1 = make_group("heisenberg:1");
    const auto& fc = field_coefficients(*h1);
    CHECK(std::abs(fc.alij(2, 0, 1, 2) - 0.5) < 1e-14);
    CHECK(std::abs(fc.alij(2, 1, 0, 2) + 0.5) < 1e-14);
    CHECK(std::abs(fc.alij(2, 0, 0, 2)) < 1e-14);
    // X1 = d1 - x2/2 d3, X2 = d2 + x1/2 d3
    const Polynomial expect1 = -0.5 * Polynomial::variable(h1->degrees(), 1);
    const Polynomial expect2 = 0.5 * Polynomial::variable(h1->degrees(), 0);
    CHECK(Polynomial::distance(fc.a[0][2], expect1) < 1e-14);
    CHECK(Polynomial::distance(fc.a[1][2], expect2) < 1e-14);
  }
  SUBCASE("abelian group has no coefficients") {
    const auto g = make_group("euclidean:3");
    for (const auto& row : g->fields().a) {
      for (const auto& p : row) CHECK(p.is_zero());
    }
  }
  SUBCASE("antisymmetry across builtins") {
    for (const auto& name : builtin_group_names()) {
      const auto g = make_group(name);
      const auto& fc = g->fields();
      for (const auto& alpha : fc.second_layer) CHECK(sup((alpha + alpha.transpose()).reshaped()) < 1e-14);
    }
  }
  SUBCASE("coefficients are (d_l - d_j)-homogeneous") {
    std::mt19937_64 rng(31);
    for (const auto& name : builtin_group_names()) {
      const auto g = make_group(name);
      const auto& d = g->degrees();
      for (int j = 0; j < g->dim(); ++j) {
        for (int l = 0; l < g->dim(); ++l) {
          const auto& a = g->fields().a[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
          if (a.is_zero()) continue;
          const int hom = d[static_cast<std::size_t>(l)] - d[static_cast<std::size_t>(j)];
          const Vec x = random_point(g->dim(), rng);
          const double r = 1.7;
          CHECK(std::abs(a.evaluate(g->dilate(r, x)) - std::pow(r, hom) * a.evaluate(x)) < 1e-12);
        }
      }
    }
    // Engel: the layer-3 coefficient of X_1 is 2-homogeneous and nonzero.
    const auto engel_g = make_group("engel");
    const auto& a41 = engel_g->fields().a[1][3];
    CHECK_FALSE(a41.is_zero());
    CHECK(a41.hdeg() == 2);
  }
  SUBCASE("x * t e_j is polynomial of degree <= step in t") {
    std::mt19937_64 rng(37);
    for (const auto& name : builtin_group_names()) {
      const auto g = make_group(name);
      const int deg = g->step();
      for (int j = 0; j < g->dim(); ++j) {
        const Vec x = random_point(g->dim(), rng);
        auto at = [&](double t) {
          Vec e = Vec::Zero(g->dim());
          e[j] = t;
          return g->product(x, e);
        };
        // Lagrange interpolation through t = 1..deg+1, evaluated at a held-out t.
        const double t_out = deg + 2.5;
        Vec interp = Vec::Zero(g->dim());
        for (int k = 1; k <= deg + 1; ++k) {
          double basis = 1.0;
          for (int m = 1; m <= deg + 1; ++m) {
            if (m != k) basis *= (t_out - m) / static_cast<double>(k - m);
          }
          interp += basis * at(k);
        }
        CHECK(sup(interp - at(t_out)) < 1e-12 * (1.0 + sup(at(t_out))));
      }
    }
  }
}

TEST_CASE("X_j agrees with the derivative of t -> f(x * t e_j)") {
  std::mt19937_64 rng(41);
  for (const auto& name : builtin_group_names()) {
    const auto g = make_group(name);
    const auto& fc = g->fields();
    for (int trial = 0; trial < 20; ++trial) {
      const Vec x = random_point(g->dim(), rng);
      for (int j = 0; j < g->dim(); ++j) {
        // The l-th component of d/dt (x * t e_j) at t = 0.
        const double eta = 1e-5;
        Vec e = Vec::Zero(g->dim());
        e[j] = eta;
        const Vec fd = (g->product(x, e) - g->product(x, -e)) / (2 * eta);
        for (int l = 0; l < g->dim(); ++l) {
          double expected = l == j ? 1.0 : fc.a[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)].evaluate(x);
          CHECK(std::abs(fd[l] - expected) < 1e-8);
        }
      }
    }
  }
}
