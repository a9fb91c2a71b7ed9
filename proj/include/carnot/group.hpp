#pragma once

#include "carnot/polynomial.hpp"

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

namespace carnot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One structure constant: [e_i, e_j] has coefficient c along e_k.
/// Indices are 0-based in memory and 1-based in descriptor files.
struct BracketEntry {
  int i = 0;
  int j = 0;
  int k = 0;
  double c = 0.0;
};

/// A stratified Lie algebra given by layer dimensions and structure
/// constants. Only one orientation of each bracket needs to be listed;
/// the opposite orientation is implied by antisymmetry unless it is
/// listed explicitly too (in which case both entries are checked).
struct GroupDescriptor {
  std::string name;
  std::vector<int> layers;  // dimension of each layer V_1, ..., V_step
  std::vector<BracketEntry> brackets;

  int dim() const;
  int step() const { return static_cast<int>(layers.size()); }
  /// Homogeneous degree d_i of each coordinate (layer index, 1-based).
  std::vector<int> degrees() const;
};

struct Violation {
  std::string kind;  // "shape", "antisymmetry", "grading", "jacobi", "stratification"
  std::vector<int> indices;  // 1-based
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks antisymmetry, grading, the Jacobi identity and the
/// stratification condition V_s = [V_1, V_{s-1}]. Never throws.
ValidationReport validate_descriptor(const GroupDescriptor& d);

/// Coordinate coefficients of the left-invariant fields
/// X_j = d_j + sum_{d_l > d_j} a^l_j(x) d_l.
struct FieldCoefficients {
  /// a[j][l] is the polynomial a^l_j; zero unless d_l > d_j.
  std::vector<std::vector<Polynomial>> a;
  /// second_layer[l - m1](i, j) = a^{li}_j for l in the second layer and
  /// i, j horizontal (all 0-based).
  std::vector<Mat> second_layer;

  double alij(int l, int i, int j, int m1) const {
    return second_layer[static_cast<std::size_t>(l - m1)](i, j);
  }
};

/// Exact arithmetic on a stratified group in exponential coordinates.
/// Immutable after construction.
class Group {
 public:
  /// Validates the descriptor and precomputes the Dynkin series and field
  /// coefficients. Throws InvalidDescriptor when validation fails, unless
  /// force is set; a forced invalid group has no field coefficients.
  static std::shared_ptr<const Group> create(GroupDescriptor d, bool force = false);

  const GroupDescriptor& descriptor() const { return desc_; }
  const std::string& name() const { return desc_.name; }
  int dim() const { return n_; }
  int step() const { return desc_.step(); }
  int horizontal_dim() const { return desc_.layers.front(); }
  /// Dimension of layer s (1-based).
  int layer_dim(int s) const;
  /// First coordinate index of layer s (0-based index, s is 1-based).
  int layer_begin(int s) const;
  const std::vector<int>& degrees() const { return degrees_; }
  bool validated() const { return validated_; }

  Vec bracket(const Vec& a, const Vec& b) const;
  Vec product(const Vec& x, const Vec& y) const;
  Vec inverse(const Vec& x) const { return -x; }
  Vec dilate(double r, const Vec& x) const;
  /// Sum over layers of |pi_s x|_2^{1/s}.
  double norm(const Vec& x) const;
  Vec project_layer(const Vec& x, int s) const;
  Vec identity() const { return Vec::Zero(n_); }
  /// Embeds a horizontal vector as a group element with zero upper layers.
  Vec horizontal(const Vec& h) const;
  /// x * (t h) for horizontal h.
  Vec along(const Vec& x, const Vec& h, double t) const { return product(x, horizontal(t * h)); }

  /// Dynkin series of log(exp(x) exp(y)) evaluated over any commutative
  /// coefficient ring (double, Polynomial). `zero` supplies the additive
  /// identity of the ring.
  template <class T>
  std::vector<T> product_generic(const std::vector<T>& x, const std::vector<T>& y, const T& zero) const;

  template <class T>
  std::vector<T> bracket_generic(const std::vector<T>& a, const std::vector<T>& b, const T& zero) const;

  /// Throws InvalidDescriptor for a forced group that failed validation.
  const FieldCoefficients& fields() const;

  /// Nonzero terms of the Dynkin series: left-normed bracket words over
  /// {0 = x, 1 = y} with their coefficients (already divided by length).
  struct DynkinTerm {
    std::vector<int> word;
    double coeff;
  };
  const std::vector<DynkinTerm>& dynkin_terms() const { return dynkin_; }

 private:
  Group() = default;
  void check(const Vec& x) const;
  void build_dynkin();
  void build_fields();

  GroupDescriptor desc_;
  int n_ = 0;
  bool validated_ = false;
  std::vector<int> degrees_;
  std::vector<BracketEntry> table_;  // full antisymmetric table
  std::vector<DynkinTerm> dynkin_;
  FieldCoefficients fields_;
};

using GroupPtr = std::shared_ptr<const Group>;

/// A point of a specific group.
struct GroupPoint {
  GroupPtr group;
  Vec coords;
};

GroupPoint make_point(GroupPtr g, Vec coords);

/// Throws DescriptorMismatch when x and y belong to different groups.
GroupPoint bch_product(const GroupPoint& x, const GroupPoint& y);
GroupPoint inverse(const GroupPoint& x);
/// Throws std::domain_error for r <= 0.
GroupPoint dilate(double r, const GroupPoint& x);
double homogeneous_norm(const GroupPoint& x);
/// Throws std::out_of_range when s is not in [1, step].
Vec project_layer(const GroupPoint& x, int s);
const FieldCoefficients& field_coefficients(const Group& g);

// ---------------------------------------------------------------------------

template <class T>
std::vector<T> Group::bracket_generic(const std::vector<T>& a, const std::vector<T>& b,
                                      const T& zero) const {
  std::vector<T> out(static_cast<std::size_t>(n_), zero);
  for (const auto& e : table_) {
    const auto& ai = a[static_cast<std::size_t>(e.i)];
    const auto& bj = b[static_cast<std::size_t>(e.j)];
    out[static_cast<std::size_t>(e.k)] += e.c * (ai * bj);
  }
  return out;
}

template <class T>
std::vector<T> Group::product_generic(const std::vector<T>& x, const std::vector<T>& y,
                                      const T& zero) const {
  std::vector<T> z(static_cast<std::size_t>(n_), zero);
  for (const auto& term : dynkin_) {
    std::vector<T> acc = term.word.front() == 0 ? x : y;
    for (std::size_t p = 1; p < term.word.size(); ++p) {
      acc = bracket_generic(acc, term.word[p] == 0 ? x : y, zero);
    }
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += term.coeff * acc[k];
  }
  return z;
}

}  // namespace carnot
