#include "carnot/group.hpp"

#include "carnot/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace carnot {

namespace {

constexpr double kStructureTol = 1e-12;
constexpr int kMaxStep = 4;

using Key = std::tuple<int, int, int>;

// Full antisymmetric table from the listed entries. Listed entries win;
// missing opposite orientations are implied.
std::map<Key, double> complete_table(const GroupDescriptor& d) {
  std::map<Key, double> listed;
  for (const auto& b : d.brackets) listed[{b.i, b.j, b.k}] += b.c;
  std::map<Key, double> full = listed;
  for (const auto& [key, c] : listed) {
    auto [i, j, k] = key;
    if (!listed.count({j, i, k})) full[{j, i, k}] = -c;
  }
  return full;
}

Vec bracket_of(const std::map<Key, double>& table, int n, const Vec& a, const Vec& b) {
  Vec out = Vec::Zero(n);
  for (const auto& [key, c] : table) {
    auto [i, j, k] = key;
    out[k] += c * a[i] * b[j];
  }
  return out;
}

Vec basis(int n, int i) {
  Vec e = Vec::Zero(n);
  e[i] = 1.0;
  return e;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Coefficient of the word w in log(e^x e^y) in the free associative algebra.
double log_coefficient(const std::vector<int>& w) {
  const int len = static_cast<int>(w.size());
  // ways[q][m]: weighted count of splittings of w[0, q) into m blocks x^r y^s.
  std::vector<std::vector<double>> ways(len + 1, std::vector<double>(len + 1, 0.0));
  ways[0][0] = 1.0;
  for (int q = 1; q <= len; ++q) {
    for (int p = 0; p < q; ++p) {
      int r = 0;
      int s = 0;
      bool valid = true;
      for (int t = p; t < q; ++t) {
        if (w[t] == 0) {
          if (s > 0) {
            valid = false;
            break;
          }
          ++r;
        } else {
          ++s;
        }
      }
      if (!valid) continue;
      const double weight = 1.0 / (factorial(r) * factorial(s));
      for (int m = 1; m <= q; ++m) ways[q][m] += ways[p][m - 1] * weight;
    }
  }
  double c = 0.0;
  for (int m = 1; m <= len; ++m) c += ((m % 2 == 1) ? 1.0 : -1.0) / m * ways[len][m];
  return c;
}

}  // namespace

int GroupDescriptor::dim() const { return std::accumulate(layers.begin(), layers.end(), 0); }

std::vector<int> GroupDescriptor::degrees() const {
  std::vector<int> d;
  for (std::size_t s = 0; s < layers.size(); ++s) {
    for (int i = 0; i < layers[s]; ++i) d.push_back(static_cast<int>(s) + 1);
  }
  return d;
}

ValidationReport validate_descriptor(const GroupDescriptor& d) {
  ValidationReport report;
  auto add = [&](std::string kind, std::vector<int> idx, std::string detail) {
    report.violations.push_back({std::move(kind), std::move(idx), std::move(detail)});
  };

  if (d.layers.empty()) {
    add("shape", {}, "no layers");
    return report;
  }
  for (std::size_t s = 0; s < d.layers.size(); ++s) {
    if (d.layers[s] <= 0) add("shape", {static_cast<int>(s) + 1}, "layer dimension must be positive");
  }
  if (!report.ok()) return report;
  const int n = d.dim();
  for (const auto& b : d.brackets) {
    if (b.i < 0 || b.j < 0 || b.k < 0 || b.i >= n || b.j >= n || b.k >= n) {
      add("shape", {b.i + 1, b.j + 1, b.k + 1}, "bracket index out of range");
    } else if (!std::isfinite(b.c)) {
      add("shape", {b.i + 1, b.j + 1, b.k + 1}, "non-finite structure constant");
    }
  }
  if (!report.ok()) return report;

  const auto table = complete_table(d);
  const auto deg = d.degrees();

  for (const auto& [key, c] : table) {
    auto [i, j, k] = key;
    if (std::abs(c) <= kStructureTol) continue;
    auto opp = table.find({j, i, k});
    const double co = opp == table.end() ? 0.0 : opp->second;
    if (i == j || std::abs(c + co) > kStructureTol) {
      if (i <= j) add("antisymmetry", {i + 1, j + 1, k + 1}, "c^k_ij != -c^k_ji");
    }
    if (i < j && deg[k] != deg[i] + deg[j]) {
      add("grading", {i + 1, j + 1, k + 1}, "bracket does not map V_a x V_b into V_{a+b}");
    }
  }

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int k = j + 1; k < n; ++k) {
        const Vec ei = basis(n, i), ej = basis(n, j), ek = basis(n, k);
        const Vec jac = bracket_of(table, n, ei, bracket_of(table, n, ej, ek)) +
                        bracket_of(table, n, ej, bracket_of(table, n, ek, ei)) +
                        bracket_of(table, n, ek, bracket_of(table, n, ei, ej));
        if (jac.cwiseAbs().maxCoeff() > kStructureTol) {
          add("jacobi", {i + 1, j + 1, k + 1}, "Jacobi identity fails");
        }
      }
    }
  }

  int begin_prev = 0;
  for (std::size_t s = 1; s < d.layers.size(); ++s) {
    const int m1 = d.layers[0];
    const int prev_dim = d.layers[s - 1];
    const int begin = begin_prev + prev_dim;
    const int dim_s = d.layers[s];
    Mat span(dim_s, m1 * prev_dim);
    int col = 0;
    for (int i = 0; i < m1; ++i) {
      for (int v = 0; v < prev_dim; ++v) {
        span.col(col++) =
            bracket_of(table, n, basis(n, i), basis(n, begin_prev + v)).segment(begin, dim_s);
      }
    }
    const auto rank = span.cols() == 0 ? 0 : Eigen::FullPivLU<Mat>(span).setThreshold(1e-10).rank();
    if (rank != dim_s) {
      std::ostringstream os;
      os << "[V_1, V_" << s << "] spans dimension " << rank << " of " << dim_s;
      add("stratification", {static_cast<int>(s) + 1}, os.str());
    }
    begin_prev = begin;
  }
  return report;
}

std::shared_ptr<const Group> Group::create(GroupDescriptor d, bool force) {
  auto report = validate_descriptor(d);
  const bool shape_ok =
      std::none_of(report.violations.begin(), report.violations.end(),
                   [](const Violation& v) { return v.kind == "shape"; });
  if (!report.ok() && (!force || !shape_ok)) {
    std::ostringstream os;
    os << "descriptor '" << d.name << "' failed validation:";
    for (const auto& v : report.violations) os << " " << v.kind << "(" << v.detail << ")";
    throw InvalidDescriptor(os.str());
  }
  if (d.step() > kMaxStep) throw InvalidDescriptor("step above 4 is not supported");

  std::shared_ptr<Group> g(new Group());
  g->desc_ = std::move(d);
  g->n_ = g->desc_.dim();
  g->degrees_ = g->desc_.degrees();
  g->validated_ = report.ok();
  for (const auto& [key, c] : complete_table(g->desc_)) {
    if (c == 0.0) continue;
    auto [i, j, k] = key;
    g->table_.push_back({i, j, k, c});
  }
  g->build_dynkin();
  if (g->validated_) g->build_fields();
  return g;
}

void Group::build_dynkin() {
  const int depth = step();
  for (int len = 1; len <= depth; ++len) {
    for (int mask = 0; mask < (1 << len); ++mask) {
      std::vector<int> word(static_cast<std::size_t>(len));
      for (int p = 0; p < len; ++p) word[static_cast<std::size_t>(p)] = (mask >> (len - 1 - p)) & 1;
      if (len >= 2 && word[0] == word[1]) continue;
      const double c = log_coefficient(word) / len;
      if (std::abs(c) < 1e-15) continue;
      dynkin_.push_back({std::move(word), c});
    }
  }
}

void Group::build_fields() {
  const int depth = step();
  const auto& w = degrees_;
  const Polynomial zero(w);
  std::vector<Polynomial> xs;
  for (int i = 0; i < n_; ++i) xs.push_back(Polynomial::variable(w, i));

  // The map t -> (x * t e_j)_l is a polynomial in t of degree <= step;
  // interpolate at t = 1..step+1 and keep the linear coefficient.
  const int npts = depth + 1;
  Mat vander(npts, npts);
  for (int k = 0; k < npts; ++k) {
    for (int p = 0; p < npts; ++p) vander(k, p) = std::pow(static_cast<double>(k + 1), p);
  }
  const Mat vinv = vander.inverse();

  fields_.a.assign(static_cast<std::size_t>(n_), std::vector<Polynomial>(static_cast<std::size_t>(n_), zero));
  for (int j = 0; j < n_; ++j) {
    std::vector<Polynomial> linear(static_cast<std::size_t>(n_), zero);
    for (int k = 0; k < npts; ++k) {
      std::vector<Polynomial> y(static_cast<std::size_t>(n_), zero);
      y[static_cast<std::size_t>(j)] = Polynomial::constant(w, static_cast<double>(k + 1));
      const auto z = product_generic(xs, y, zero);
      for (int l = 0; l < n_; ++l) linear[static_cast<std::size_t>(l)] += vinv(1, k) * z[static_cast<std::size_t>(l)];
    }
    for (int l = 0; l < n_; ++l) {
      if (w[static_cast<std::size_t>(l)] > w[static_cast<std::size_t>(j)]) {
        fields_.a[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] = linear[static_cast<std::size_t>(l)].pruned(1e-12);
      }
    }
  }

  const int m1 = horizontal_dim();
  const int m2 = step() >= 2 ? m1 + desc_.layers[1] : m1;
  for (int l = m1; l < m2; ++l) {
    Mat alpha(m1, m1);
    for (int i = 0; i < m1; ++i) {
      Vec ei = Vec::Zero(n_);
      ei[i] = 1.0;
      for (int j = 0; j < m1; ++j) {
        alpha(i, j) = fields_.a[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)].evaluate(ei);
      }
    }
    fields_.second_layer.push_back(alpha);
  }
}

const FieldCoefficients& Group::fields() const {
  if (!validated_) throw InvalidDescriptor("field coefficients require a validated descriptor");
  return fields_;
}

int Group::layer_dim(int s) const {
  if (s < 1 || s > step()) throw std::out_of_range("layer index out of range");
  return desc_.layers[static_cast<std::size_t>(s - 1)];
}

int Group::layer_begin(int s) const {
  if (s < 1 || s > step()) throw std::out_of_range("layer index out of range");
  return std::accumulate(desc_.layers.begin(), desc_.layers.begin() + (s - 1), 0);
}

void Group::check(const Vec& x) const {
  if (x.size() != n_) throw std::invalid_argument("point dimension does not match group dimension");
}

Vec Group::bracket(const Vec& a, const Vec& b) const {
  check(a);
  check(b);
  Vec out = Vec::Zero(n_);
  for (const auto& e : table_) out[e.k] += e.c * a[e.i] * b[e.j];
  return out;
}

Vec Group::product(const Vec& x, const Vec& y) const {
  check(x);
  check(y);
  Vec z = Vec::Zero(n_);
  Vec acc(n_);
  Vec next(n_);
  for (const auto& term : dynkin_) {
    acc = term.word.front() == 0 ? x : y;
    for (std::size_t p = 1; p < term.word.size(); ++p) {
      const Vec& rhs = term.word[p] == 0 ? x : y;
      next.setZero();
      for (const auto& e : table_) next[e.k] += e.c * acc[e.i] * rhs[e.j];
      acc.swap(next);
    }
    z.noalias() += term.coeff * acc;
  }
  return z;
}

Vec Group::dilate(double r, const Vec& x) const {
  check(x);
  if (!(r > 0.0)) throw std::domain_error("dilation factor must be positive");
  Vec out = x;
  for (int i = 0; i < n_; ++i) out[i] *= std::pow(r, degrees_[static_cast<std::size_t>(i)]);
  return out;
}

double Group::norm(const Vec& x) const {
  check(x);
  double sum = 0.0;
  int begin = 0;
  for (int s = 1; s <= step(); ++s) {
    const int len = desc_.layers[static_cast<std::size_t>(s - 1)];
    const double r = x.segment(begin, len).norm();
    sum += s == 1 ? r : std::pow(r, 1.0 / s);
    begin += len;
  }
  return sum;
}

Vec Group::project_layer(const Vec& x, int s) const {
  check(x);
  return x.segment(layer_begin(s), layer_dim(s));
}

Vec Group::horizontal(const Vec& h) const {
  if (h.size() != horizontal_dim()) throw std::invalid_argument("horizontal vector has wrong dimension");
  Vec out = Vec::Zero(n_);
  out.head(h.size()) = h;
  return out;
}

GroupPoint make_point(GroupPtr g, Vec coords) {
  if (!g) throw std::invalid_argument("null group");
  if (coords.size() != g->dim()) throw std::invalid_argument("point dimension does not match group dimension");
  if (!coords.allFinite()) throw std::invalid_argument("point coordinates must be finite");
  return GroupPoint{std::move(g), std::move(coords)};
}

GroupPoint bch_product(const GroupPoint& x, const GroupPoint& y) {
  if (x.group != y.group) throw DescriptorMismatch("points belong to different groups");
  return {x.group, x.group->product(x.coords, y.coords)};
}

GroupPoint inverse(const GroupPoint& x) { return {x.group, x.group->inverse(x.coords)}; }

GroupPoint dilate(double r, const GroupPoint& x) { return {x.group, x.group->dilate(r, x.coords)}; }

double homogeneous_norm(const GroupPoint& x) { return x.group->norm(x.coords); }

Vec project_layer(const GroupPoint& x, int s) { return x.group->project_layer(x.coords, s); }

const FieldCoefficients& field_coefficients(const Group& g) { return g.fields(); }

}  // namespace carnot
