#include "carnot/poly_calc.hpp"

#include "carnot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace carnot {

namespace {

void require_degree_two(const Polynomial& p) {
  if (p.hdeg() > 2) throw DegreeError("polynomial has h-degree above 2");
}

int second_layer_dim(const Group& g) { return g.step() >= 2 ? g.layer_dim(2) : 0; }

void enumerate(const std::vector<int>& weights, int max_degree, std::size_t pos, int used,
               Exponents& cur, std::vector<Exponents>& out) {
  if (pos == weights.size()) {
    out.push_back(cur);
    return;
  }
  for (int a = 0; used + a * weights[pos] <= max_degree; ++a) {
    cur[pos] = a;
    enumerate(weights, max_degree, pos + 1, used + a * weights[pos], cur, out);
  }
  cur[pos] = 0;
}

// Rescales w onto the unit sphere of the homogeneous norm.
Vec to_unit_sphere(const Group& g, const Vec& w) {
  const double r = g.norm(w);
  return r > 0.0 ? g.dilate(1.0 / r, w) : w;
}

}  // namespace

Jet2 Jet2::zero(const Group& g) {
  const int m1 = g.horizontal_dim();
  const int m2 = second_layer_dim(g);
  return {0.0, Vec::Zero(m1), Vec::Zero(m2), Mat::Zero(m1, m1), Mat::Zero(m1, m1)};
}

Polynomial zero_polynomial(const Group& g) { return Polynomial(g.degrees()); }

Polynomial coordinate(const Group& g, int i) { return Polynomial::variable(g.degrees(), i); }

std::vector<Exponents> graded_basis(const std::vector<int>& weights, int max_degree) {
  std::vector<Exponents> out;
  Exponents cur(weights.size(), 0);
  enumerate(weights, max_degree, 0, 0, cur, out);
  std::sort(out.begin(), out.end(), [&](const Exponents& a, const Exponents& b) {
    int wa = 0, wb = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      wa += weights[i] * a[i];
      wb += weights[i] * b[i];
    }
    return wa != wb ? wa < wb : a > b;
  });
  return out;
}

Polynomial apply_field(const Group& g, int j, const Polynomial& p) {
  if (j < 0 || j >= g.dim()) throw std::out_of_range("field index out of range");
  if (p.weights() != g.degrees()) throw DescriptorMismatch("polynomial not over this group");
  const auto& a = g.fields().a[static_cast<std::size_t>(j)];
  Polynomial out = p.derivative(j);
  for (int l = 0; l < g.dim(); ++l) {
    const auto& coeff = a[static_cast<std::size_t>(l)];
    if (coeff.is_zero()) continue;
    out += coeff * p.derivative(l);
  }
  return out;
}

Polynomial apply_word(const Group& g, const std::vector<int>& word, const Polynomial& p) {
  Polynomial out = p;
  for (auto it = word.rbegin(); it != word.rend(); ++it) out = apply_field(g, *it, out);
  return out;
}

Vec horizontal_gradient(const Group& g, const Polynomial& p, const Vec& x) {
  Vec out(g.horizontal_dim());
  for (int i = 0; i < g.horizontal_dim(); ++i) out[i] = apply_field(g, i, p).evaluate(x);
  return out;
}

std::map<std::vector<int>, double> jet_coefficients(const Group& g, const Polynomial& p) {
  require_degree_two(p);
  const Vec origin = g.identity();
  const int m1 = g.horizontal_dim();
  const int m2 = m1 + second_layer_dim(g);
  std::map<std::vector<int>, double> out;
  out[{}] = p.evaluate(origin);
  for (int j = 0; j < m2; ++j) out[{j}] = apply_field(g, j, p).evaluate(origin);
  for (int i = 0; i < m1; ++i) {
    for (int j = 0; j < m1; ++j) out[{i, j}] = apply_word(g, {i, j}, p).evaluate(origin);
  }
  return out;
}

Polynomial poly_from_jet2(const Group& g, const Jet2& jet) {
  const int n = g.dim();
  const int m1 = g.horizontal_dim();
  const int m2 = second_layer_dim(g);
  if (jet.grad.size() != m1 || jet.v2.size() != m2 || jet.hess.rows() != m1 || jet.hess.cols() != m1) {
    throw std::invalid_argument("jet dimensions do not match group");
  }
  const auto& w = g.degrees();
  Polynomial p = Polynomial::constant(w, jet.value);
  for (int i = 0; i < m1; ++i) p.add_term([&] { Exponents e(n, 0); e[i] = 1; return e; }(), jet.grad[i]);
  for (int l = 0; l < m2; ++l) p.add_term([&] { Exponents e(n, 0); e[m1 + l] = 1; return e; }(), jet.v2[l]);
  for (int i = 0; i < m1; ++i) {
    for (int j = i; j < m1; ++j) {
      Exponents e(n, 0);
      e[i] += 1;
      e[j] += 1;
      const double sym = 0.5 * (jet.hess(i, j) + jet.hess(j, i));
      p.add_term(e, i == j ? 0.5 * sym : sym);
    }
  }
  return p;
}

Jet2 jet_from_poly(const Group& g, const Polynomial& p) {
  const auto coeffs = jet_coefficients(g, p);
  const int m1 = g.horizontal_dim();
  const int m2 = second_layer_dim(g);
  Jet2 jet = Jet2::zero(g);
  jet.value = coeffs.at({});
  for (int i = 0; i < m1; ++i) jet.grad[i] = coeffs.at({i});
  for (int l = 0; l < m2; ++l) jet.v2[l] = coeffs.at({m1 + l});
  for (int i = 0; i < m1; ++i) {
    for (int j = 0; j < m1; ++j) {
      jet.ext(j, i) = coeffs.at({i, j});
      jet.hess(i, j) = 0.5 * (coeffs.at({i, j}) + coeffs.at({j, i}));
    }
  }
  return jet;
}

SymHessian sym_hessian(const Group& g, const Polynomial& p) {
  require_degree_two(p);
  const Jet2 jet = jet_from_poly(g, p);
  return {jet.hess, jet.v2};
}

Mat check_alij(const Group& g, const Polynomial& p) {
  require_degree_two(p);
  const int n = g.dim();
  const int m1 = g.horizontal_dim();
  const int m2 = second_layer_dim(g);
  const auto& fc = g.fields();
  const Vec origin = g.identity();

  Vec xl(m2);
  for (int l = 0; l < m2; ++l) xl[l] = apply_field(g, m1 + l, p).evaluate(origin);

  Mat residual(m1, m1);
  for (int i = 0; i < m1; ++i) {
    for (int j = 0; j < m1; ++j) {
      Exponents e(n, 0);
      e[i] += 1;
      e[j] += 1;
      const double cij = i == j ? 2.0 * p.coeff(e) : p.coeff(e);
      double rhs = cij;
      for (int l = 0; l < m2; ++l) rhs += xl[l] * fc.alij(m1 + l, i, j, m1);
      const Polynomial lhs = apply_word(g, {i, j}, p);
      residual(i, j) = Polynomial::distance(lhs, Polynomial::constant(g.degrees(), rhs));
    }
  }
  return residual;
}

LambdaMax lambda_max(const Group& g, const Polynomial& p, int samples, std::uint64_t seed) {
  require_degree_two(p);
  const Polynomial top = p.homogeneous_part(2);
  LambdaMax out;
  out.samples = samples;
  if (top.is_zero()) {
    out.note = "zero 2-homogeneous part";
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = g.dim();

  auto sample = [&]() {
    // Split the unit norm budget across layers, then pick a direction in
    // each layer.
    Vec w = Vec::Zero(n);
    std::vector<double> budget(static_cast<std::size_t>(g.step()));
    double total = 0.0;
    for (auto& b : budget) total += (b = -std::log(1.0 - unif(rng)));
    for (int s = 1; s <= g.step(); ++s) {
      Vec dir(g.layer_dim(s));
      for (int i = 0; i < dir.size(); ++i) dir[i] = normal(rng);
      const double len = std::pow(budget[static_cast<std::size_t>(s - 1)] / total, s);
      w.segment(g.layer_begin(s), dir.size()) = len * dir.normalized();
    }
    return to_unit_sphere(g, w);
  };

  struct Candidate {
    double value;
    Vec w;
  };
  std::vector<Candidate> best;
  for (int k = 0; k < samples; ++k) {
    Vec w = sample();
    const double v = std::abs(top.evaluate(w));
    best.push_back({v, std::move(w)});
  }
  std::sort(best.begin(), best.end(), [](const Candidate& a, const Candidate& b) { return a.value > b.value; });
  best.resize(std::min<std::size_t>(best.size(), 8));

  // Local search. Moves perturb a single layer so that the cusp of the
  // sphere at an empty upper layer stays reachable; zeroing a layer is
  // tried explicitly.
  double result = best.front().value;
  for (auto& cand : best) {
    auto consider = [&](const Vec& trial) {
      const Vec w = to_unit_sphere(g, trial);
      const double v = std::abs(top.evaluate(w));
      if (v > cand.value) cand = {v, w};
    };
    // A round only counts as progress when it gains more than rounding
    // noise; otherwise creeping gains would keep the step from shrinking.
    double step = 0.1;
    for (int round = 0; round < 4000 && step > 1e-10; ++round) {
      const double before = cand.value;
      for (int s = 2; s <= g.step(); ++s) {
        Vec w = cand.w;
        w.segment(g.layer_begin(s), g.layer_dim(s)).setZero();
        consider(w);
      }
      for (int trial = 0; trial < 6 * n; ++trial) {
        const int s = 1 + trial % g.step();
        Vec w = cand.w;
        for (int i = g.layer_begin(s); i < g.layer_begin(s) + g.layer_dim(s); ++i) w[i] += step * normal(rng);
        consider(w);
      }
      if (cand.value - before <= 1e-12 * (1.0 + before)) step *= 0.5;
    }
    result = std::max(result, cand.value);
  }
  out.value = result;
  std::ostringstream os;
  os << "sampled lower bound: " << samples << " sphere samples + local refinement";
  out.note = os.str();
  return out;
}

Polynomial left_translate_poly(const Group& g, const Polynomial& p, const Vec& x) {
  require_degree_two(p);
  if (x.size() != g.dim()) throw std::invalid_argument("point dimension does not match group dimension");
  const auto& w = g.degrees();
  const auto basis = graded_basis(w, 2);
  const int mu = static_cast<int>(basis.size());
  const int rows = 2 * mu;

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Mat design(rows, mu);
  Vec rhs(rows);
  for (int r = 0; r < rows; ++r) {
    Vec h(g.dim());
    for (int i = 0; i < h.size(); ++i) h[i] = unif(rng);
    for (int c = 0; c < mu; ++c) design(r, c) = Polynomial::monomial(w, basis[static_cast<std::size_t>(c)], 1.0).evaluate(h);
    rhs[r] = p.evaluate(g.product(x, h));
  }
  const Vec coef = design.colPivHouseholderQr().solve(rhs);
  double scale = 1.0;
  for (const auto& [e, c] : p.terms()) scale = std::max(scale, std::abs(c));
  Polynomial out(w);
  for (int c = 0; c < mu; ++c) {
    if (std::abs(coef[c]) > 1e-13 * scale * (1.0 + x.cwiseAbs().maxCoeff() * x.cwiseAbs().maxCoeff())) {
      out.add_term(basis[static_cast<std::size_t>(c)], coef[c]);
    }
  }
  return out;
}

}  // namespace carnot
