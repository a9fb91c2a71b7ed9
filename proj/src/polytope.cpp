#include "carnot/polytope.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

namespace carnot {

namespace {

constexpr double kRankTol = 1e-10;

std::vector<Vec> dedupe(const std::vector<Vec>& points) {
  std::vector<Vec> out;
  for (const auto& p : points) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Vec& q) {
      return (p - q).cwiseAbs().maxCoeff() <= 1e-14 * (1.0 + p.cwiseAbs().maxCoeff());
    });
    if (!seen) out.push_back(p);
  }
  return out;
}

double cross2(const Vec& o, const Vec& a, const Vec& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; returns indices of the extreme points.
std::vector<int> hull2(const std::vector<Vec>& pts) {
  std::vector<int> idx(pts.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return pts[a][0] != pts[b][0] ? pts[a][0] < pts[b][0] : pts[a][1] < pts[b][1];
  });
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-13 * std::max(scale * scale, 1e-300);
  std::vector<int> h(2 * idx.size());
  std::size_t k = 0;
  for (int i : idx) {
    while (k >= 2 && cross2(pts[h[k - 2]], pts[h[k - 1]], pts[i]) <= eps) --k;
    h[k++] = i;
  }
  for (std::size_t t = idx.size() - 1, lo = k + 1; t-- > 0;) {
    const int i = idx[t];
    while (k >= lo && cross2(pts[h[k - 2]], pts[h[k - 1]], pts[i]) <= eps) --k;
    h[k++] = i;
  }
  h.resize(k > 1 ? k - 1 : k);
  return h;
}

// Incremental 3-D hull on points of full affine rank.
std::vector<int> hull3(const std::vector<Vec>& pts) {
  using Face = std::array<int, 3>;
  const int n = static_cast<int>(pts.size());
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double eps = 1e-12 * std::max(scale, 1e-300);

  auto v3 = [&](int i) { return Eigen::Vector3d(pts[i][0], pts[i][1], pts[i][2]); };

  // Initial tetrahedron from extreme choices.
  int a = 0;
  int b = 0;
  for (int i = 1; i < n; ++i) {
    if ((v3(i) - v3(a)).norm() > (v3(b) - v3(a)).norm()) b = i;
  }
  int c = -1;
  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    const double d = (v3(i) - v3(a)).cross(v3(b) - v3(a)).norm();
    if (d > best) best = d, c = i;
  }
  int d = -1;
  best = -1.0;
  const Eigen::Vector3d base_normal = (v3(b) - v3(a)).cross(v3(c) - v3(a));
  for (int i = 0; i < n; ++i) {
    const double dist = std::abs(base_normal.dot(v3(i) - v3(a)));
    if (dist > best) best = dist, d = i;
  }

  const Eigen::Vector3d inside = (v3(a) + v3(b) + v3(c) + v3(d)) / 4.0;
  std::vector<Face> faces;
  auto add_face = [&](int p, int q, int r) {
    const Eigen::Vector3d nrm = (v3(q) - v3(p)).cross(v3(r) - v3(p));
    if (nrm.dot(inside - v3(p)) > 0) faces.push_back({p, r, q});
    else faces.push_back({p, q, r});
  };
  add_face(a, b, c);
  add_face(a, b, d);
  add_face(a, c, d);
  add_face(b, c, d);

  auto visible = [&](const Face& f, int p) {
    Eigen::Vector3d nrm = (v3(f[1]) - v3(f[0])).cross(v3(f[2]) - v3(f[0]));
    const double len = nrm.norm();
    if (len == 0.0) return false;
    return nrm.dot(v3(p) - v3(f[0])) / len > eps;
  };

  for (int p = 0; p < n; ++p) {
    if (p == a || p == b || p == c || p == d) continue;
    std::vector<bool> vis(faces.size());
    bool any = false;
    for (std::size_t f = 0; f < faces.size(); ++f) any |= (vis[f] = visible(faces[f], p));
    if (!any) continue;
    std::set<std::pair<int, int>> edges;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!vis[f]) continue;
      for (int e = 0; e < 3; ++e) edges.insert({faces[f][e], faces[f][(e + 1) % 3]});
    }
    std::vector<Face> kept;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      if (!vis[f]) kept.push_back(faces[f]);
    }
    for (const auto& [u, v] : edges) {
      if (!edges.count({v, u})) kept.push_back({u, v, p});
    }
    faces = std::move(kept);
  }
  std::set<int> verts;
  for (const auto& f : faces) verts.insert(f.begin(), f.end());
  return {verts.begin(), verts.end()};
}

// Minimum-norm point of the affine hull of the selected points, as
// barycentric weights.
Vec affine_min_norm(const std::vector<Vec>& pts, const std::vector<int>& sel) {
  const int k = static_cast<int>(sel.size());
  Vec alpha = Vec::Zero(k);
  if (k == 1) {
    alpha[0] = 1.0;
    return alpha;
  }
  const Vec& p0 = pts[sel[0]];
  Mat diff(p0.size(), k - 1);
  for (int i = 1; i < k; ++i) diff.col(i - 1) = pts[sel[i]] - p0;
  const Vec beta = diff.colPivHouseholderQr().solve(-p0);
  alpha[0] = 1.0 - beta.sum();
  alpha.tail(k - 1) = beta;
  return alpha;
}

}  // namespace

Vec min_norm_point(const std::vector<Vec>& points) {
  if (points.empty()) throw std::invalid_argument("min_norm_point of an empty set");
  const int n = static_cast<int>(points.size());
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, p.squaredNorm());
  const double tol = 1e-14 * std::max(scale, 1e-300);

  int start = 0;
  for (int i = 1; i < n; ++i) {
    if (points[i].squaredNorm() < points[start].squaredNorm()) start = i;
  }
  std::vector<int> sel{start};
  Vec w = Vec::Ones(1);
  Vec x = points[start];

  for (int iter = 0; iter < 10 * n + 100; ++iter) {
    int j = 0;
    for (int i = 1; i < n; ++i) {
      if (x.dot(points[i]) < x.dot(points[j])) j = i;
    }
    if (x.squaredNorm() - x.dot(points[j]) <= tol) break;
    if (std::find(sel.begin(), sel.end(), j) != sel.end()) break;
    sel.push_back(j);
    w.conservativeResize(w.size() + 1);
    w[w.size() - 1] = 0.0;

    for (int minor = 0; minor < n + 10; ++minor) {
      const Vec alpha = affine_min_norm(points, sel);
      if ((alpha.array() > 1e-14).all()) {
        w = alpha;
        break;
      }
      double theta = 1.0;
      for (int i = 0; i < alpha.size(); ++i) {
        if (alpha[i] <= 1e-14) theta = std::min(theta, w[i] / (w[i] - alpha[i]));
      }
      w = (1.0 - theta) * w + theta * alpha;
      std::vector<int> keep_sel;
      std::vector<double> keep_w;
      for (int i = 0; i < w.size(); ++i) {
        if (w[i] > 1e-14) {
          keep_sel.push_back(sel[static_cast<std::size_t>(i)]);
          keep_w.push_back(w[i]);
        }
      }
      if (keep_sel.empty()) {
        keep_sel.push_back(sel.back());
        keep_w.push_back(1.0);
      }
      sel = keep_sel;
      w = Eigen::Map<Vec>(keep_w.data(), static_cast<Eigen::Index>(keep_w.size()));
      w /= w.sum();
    }
    x = Vec::Zero(points[0].size());
    for (std::size_t i = 0; i < sel.size(); ++i) x += w[static_cast<Eigen::Index>(i)] * points[static_cast<std::size_t>(sel[i])];
  }
  return x;
}

ConvexPolytope ConvexPolytope::hull(const std::vector<Vec>& points) {
  if (points.empty()) throw std::invalid_argument("hull of an empty point set");
  ConvexPolytope out;
  out.dim_ = static_cast<int>(points.front().size());
  for (const auto& p : points) {
    if (p.size() != out.dim_) throw std::invalid_argument("hull points of mixed dimension");
  }
  const auto pts = dedupe(points);
  const int n = static_cast<int>(pts.size());
  if (n == 1) {
    out.affine_dim_ = 0;
    out.vertices_ = pts;
    return out;
  }

  Vec center = Vec::Zero(out.dim_);
  for (const auto& p : pts) center += p;
  center /= n;
  Mat centered(out.dim_, n);
  for (int i = 0; i < n; ++i) centered.col(i) = pts[static_cast<std::size_t>(i)] - center;
  Eigen::JacobiSVD<Mat> svd(centered, Eigen::ComputeThinU);
  const Vec sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > kRankTol * sv[0] && sv[i] > 1e-15) ++rank;
  }
  out.affine_dim_ = rank;

  if (rank == 0) {
    out.vertices_ = {center};
    return out;
  }
  if (rank > 3) {
    out.reduced_ = false;
    out.vertices_ = pts;
    return out;
  }

  const Mat basis = svd.matrixU().leftCols(rank);
  std::vector<Vec> local(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) local[static_cast<std::size_t>(i)] = basis.transpose() * centered.col(i);

  std::vector<int> keep;
  if (rank == 1) {
    int lo = 0;
    int hi = 0;
    for (int i = 1; i < n; ++i) {
      if (local[static_cast<std::size_t>(i)][0] < local[static_cast<std::size_t>(lo)][0]) lo = i;
      if (local[static_cast<std::size_t>(i)][0] > local[static_cast<std::size_t>(hi)][0]) hi = i;
    }
    keep = {lo, hi};
  } else if (rank == 2) {
    keep = hull2(local);
  } else {
    keep = hull3(local);
  }
  for (int i : keep) out.vertices_.push_back(pts[static_cast<std::size_t>(i)]);
  return out;
}

double ConvexPolytope::support(const Vec& h) const {
  if (vertices_.empty()) throw std::logic_error("support of an empty polytope");
  double best = vertices_.front().dot(h);
  for (const auto& v : vertices_) best = std::max(best, v.dot(h));
  return best;
}

Vec ConvexPolytope::nearest_point(const Vec& p) const {
  if (vertices_.empty()) throw std::logic_error("nearest point of an empty polytope");
  std::vector<Vec> shifted;
  shifted.reserve(vertices_.size());
  for (const auto& v : vertices_) shifted.push_back(v - p);
  return min_norm_point(shifted) + p;
}

double ConvexPolytope::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    for (std::size_t j = i + 1; j < vertices_.size(); ++j) d = std::max(d, (vertices_[i] - vertices_[j]).norm());
  }
  return d;
}

Vec ConvexPolytope::centroid() const {
  Vec c = Vec::Zero(dim_);
  for (const auto& v : vertices_) c += v;
  return vertices_.empty() ? c : Vec(c / static_cast<double>(vertices_.size()));
}

ConvexPolytope ConvexPolytope::affine_image(const Vec& shift, double scale) const {
  ConvexPolytope out = *this;
  for (auto& v : out.vertices_) v = (v - shift) / scale;
  return out;
}

double excess(const ConvexPolytope& a, const ConvexPolytope& b) {
  double e = 0.0;
  for (const auto& v : a.vertices()) e = std::max(e, b.distance(v));
  return e;
}

double hausdorff(const ConvexPolytope& a, const ConvexPolytope& b) {
  return std::max(excess(a, b), excess(b, a));
}

}  // namespace carnot
