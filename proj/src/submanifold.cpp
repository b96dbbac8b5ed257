#include "tubevol/submanifold.hpp"

#include "tubevol/model_kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tubevol {

namespace {

constexpr double pi = std::numbers::pi;

// Hyperspherical point on S^{d} from angles (theta_1..theta_{d-1}, phi).
template <class T>
void hyperspherical(const T* ang, int d, T* out) {
  using std::cos;
  using std::sin;
  T s(1.0);
  for (int i = 0; i < d - 1; ++i) {
    out[i] = s * cos(ang[i]);
    s = s * sin(ang[i]);
  }
  out[d - 1] = s * cos(ang[d - 1]);
  out[d] = s * sin(ang[d - 1]);
}

ChartBox angle_box(int d) {
  ChartBox box;
  box.lower = Vec::Zero(d);
  box.upper = Vec::Constant(d, pi);
  box.upper(d - 1) = 2.0 * pi;
  box.periodic.assign(d, false);
  box.periodic[d - 1] = true;
  return box;
}

std::vector<int> angle_resolution(int d, int resolution) {
  std::vector<int> res(d, std::max(4, resolution / 2));
  res[d - 1] = resolution;
  return res;
}

const AmbientEmbedded& ambient_of(const ChartManifold& M) {
  const auto* amb = dynamic_cast<const AmbientEmbedded*>(&M);
  if (amb == nullptr) throw std::invalid_argument("submanifold: ambient manifold has no embedding into R^N");
  return *amb;
}

}  // namespace

EmbeddedSubmanifold::EmbeddedSubmanifold(std::string name, int m, int n, ChartBox parameters,
                                         Embedding embedding, std::vector<int> resolution)
    : name_(std::move(name)), m_(m), n_(n), params_(std::move(parameters)), embedding_(std::move(embedding)) {
  if (m < 0 || m > n - 1) throw std::invalid_argument("submanifold: need 0 <= m <= n-1");
  if (params_.lower.size() != m || params_.upper.size() != m || static_cast<int>(params_.periodic.size()) != m) {
    throw std::invalid_argument("submanifold: parameter box has wrong dimension");
  }
  set_resolution(std::move(resolution));
}

void EmbeddedSubmanifold::set_resolution(std::vector<int> resolution) {
  if (static_cast<int>(resolution.size()) != m_) {
    throw std::invalid_argument("submanifold: one resolution per parameter axis required");
  }
  for (int r : resolution) {
    if (r < 1) throw std::invalid_argument("submanifold: resolution must be >= 1");
  }
  resolution_ = std::move(resolution);
}

Vec EmbeddedSubmanifold::point(const Vec& s) const {
  HyperDual ss[kMaxDim];
  HyperDual xs[kMaxDim];
  for (int a = 0; a < m_; ++a) ss[a] = HyperDual(s(a));
  embedding_(ss, xs);
  Vec x(n_);
  for (int i = 0; i < n_; ++i) x(i) = xs[i].a;
  return x;
}

Mat EmbeddedSubmanifold::differential(const Vec& s) const {
  Mat D(n_, m_);
  HyperDual ss[kMaxDim];
  HyperDual xs[kMaxDim];
  for (int a = 0; a < m_; ++a) {
    for (int b = 0; b < m_; ++b) ss[b] = HyperDual(s(b), a == b ? 1.0 : 0.0, 0.0, 0.0);
    embedding_(ss, xs);
    for (int i = 0; i < n_; ++i) D(i, a) = xs[i].b;
  }
  return D;
}

std::vector<Vec> EmbeddedSubmanifold::second_derivatives(const Vec& s) const {
  std::vector<Vec> out(static_cast<std::size_t>(m_ * m_), Vec::Zero(n_));
  HyperDual ss[kMaxDim];
  HyperDual xs[kMaxDim];
  for (int a = 0; a < m_; ++a) {
    for (int b = a; b < m_; ++b) {
      for (int c = 0; c < m_; ++c) ss[c] = HyperDual(s(c), c == a ? 1.0 : 0.0, c == b ? 1.0 : 0.0, 0.0);
      embedding_(ss, xs);
      Vec v(n_);
      for (int i = 0; i < n_; ++i) v(i) = xs[i].d;
      out[a * m_ + b] = v;
      out[b * m_ + a] = v;
    }
  }
  return out;
}

std::vector<EmbeddedSubmanifold::ParameterNode> EmbeddedSubmanifold::parameter_nodes() const {
  std::vector<quad::Rule> rules;
  for (int a = 0; a < m_; ++a) {
    const double lo = params_.lower(a);
    const double hi = params_.upper(a);
    const int r = resolution_[a];
    if (params_.periodic[a]) {
      quad::Rule rule;
      const double h = (hi - lo) / r;
      for (int i = 0; i < r; ++i) {
        rule.nodes.push_back(lo + (i + 0.5) * h);
        rule.weights.push_back(h);
      }
      rules.push_back(rule);
    } else {
      rules.push_back(quad::composite_gauss_legendre(lo, hi, 1, r));
    }
  }
  std::vector<ParameterNode> nodes;
  std::vector<int> idx(m_, 0);
  while (true) {
    ParameterNode node;
    node.s = Vec(m_);
    node.weight = 1.0;
    for (int a = 0; a < m_; ++a) {
      node.s(a) = rules[a].nodes[idx[a]];
      node.weight *= rules[a].weights[idx[a]];
    }
    nodes.push_back(node);
    int a = 0;
    while (a < m_ && ++idx[a] == static_cast<int>(rules[a].nodes.size())) idx[a++] = 0;
    if (a == m_) break;
  }
  return nodes;
}

LocalFrames frames_at(const EmbeddedSubmanifold& sigma, const ChartManifold& M, const Vec& s) {
  const int n = M.dim();
  const int m = sigma.dim();
  if (sigma.ambient_dim() != n) throw DimensionMismatchError("frames_at: submanifold and manifold dimensions differ");
  LocalFrames f;
  f.s = s;
  f.x = sigma.point(s);
  f.g = M.metric(f.x);
  if (m > 0) {
    const Mat D = sigma.differential(s);
    f.tangent = orthonormalize(f.g, D, 1e-8);
    if (f.tangent.cols() != m) throw RankDeficiencyError("frames_at: embedding differential is rank deficient");
  } else {
    f.tangent = Mat(n, 0);
  }
  Mat all(n, m + n);
  all.leftCols(m) = f.tangent;
  all.rightCols(n) = Mat::Identity(n, n);
  const Mat basis = orthonormalize(f.g, all, 1e-8, n);
  f.normal = basis.rightCols(n - m);
  return f;
}

namespace {

// Second fundamental form B_ab = -<xi, nabla_a d_b x> in the parameter basis,
// returned for each column of `normals`, then moved to the tangent frame.
std::vector<Mat> shape_matrices(const EmbeddedSubmanifold& sigma, const ChartManifold& M, const LocalFrames& f,
                                const Mat& normals) {
  const int n = M.dim();
  const int m = sigma.dim();
  std::vector<Mat> out;
  if (m == 0) {
    for (int c = 0; c < normals.cols(); ++c) out.emplace_back(0, 0);
    return out;
  }
  const Mat D = sigma.differential(f.s);
  const auto dd = sigma.second_derivatives(f.s);
  const Christoffel G = christoffel_at(M, f.x);
  std::vector<Vec> cov(static_cast<std::size_t>(m * m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Vec v = dd[a * m + b];
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) s += G.v[i][j][k] * D(j, a) * D(k, b);
        v(i) += s;
      }
      cov[a * m + b] = v;
    }
  // tangent = D * C
  const Mat induced = D.transpose() * f.g * D;
  const Mat C = induced.ldlt().solve(D.transpose() * f.g * f.tangent);
  for (int c = 0; c < normals.cols(); ++c) {
    const Vec gxi = f.g * normals.col(c);
    Mat B(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) B(a, b) = -gxi.dot(cov[a * m + b]);
    Mat S = C.transpose() * B * C;
    out.push_back(0.5 * (S + S.transpose()));
  }
  return out;
}

}  // namespace

Mat weingarten(const EmbeddedSubmanifold& sigma, const ChartManifold& M, const Vec& s, const Vec& xi) {
  const LocalFrames f = frames_at(sigma, M, s);
  if (xi.size() != M.dim()) throw DimensionMismatchError("weingarten: xi has wrong size");
  if (std::abs(g_norm(f.g, xi) - 1.0) > 1e-8) throw NonNormalVectorError("weingarten: xi is not a unit vector");
  for (int a = 0; a < f.tangent.cols(); ++a) {
    if (std::abs(g_dot(f.g, xi, f.tangent.col(a))) > 1e-8) {
      throw NonNormalVectorError("weingarten: xi is not normal to the submanifold");
    }
  }
  Mat X(M.dim(), 1);
  X.col(0) = xi;
  return shape_matrices(sigma, M, f, X)[0];
}

Vec mean_curvature_vector(const EmbeddedSubmanifold& sigma, const ChartManifold& M, const Vec& s) {
  return make_base_node(sigma, M, s, 1.0).eta;
}

Mat BaseNode::weingarten(const Vec& p) const {
  const int m = static_cast<int>(frames.tangent.cols());
  Mat S = Mat::Zero(m, m);
  for (int c = 0; c < p.size(); ++c) S += p(c) * shape[c];
  return S;
}

double BaseNode::eta_dot(const Vec& p) const { return g_dot(frames.g, eta, normal_vector(p)); }

BaseNode make_base_node(const EmbeddedSubmanifold& sigma, const ChartManifold& M, const Vec& s,
                        double param_weight) {
  BaseNode node;
  node.frames = frames_at(sigma, M, s);
  const int m = sigma.dim();
  double area = 1.0;
  if (m > 0) {
    const Mat D = sigma.differential(s);
    area = std::sqrt((D.transpose() * node.frames.g * D).determinant());
  }
  node.weight = param_weight * area;
  node.shape = shape_matrices(sigma, M, node.frames, node.frames.normal);
  node.eta = Vec::Zero(M.dim());
  if (m > 0) {
    for (int c = 0; c < node.frames.normal.cols(); ++c) {
      node.eta += (node.shape[c].trace() / m) * node.frames.normal.col(c);
    }
  }
  return node;
}

double NormalFiberGrid::volume_sigma() const {
  quad::CompensatedSum s;
  for (const BaseNode& b : base) s.add(b.weight);
  return s.value();
}

double NormalFiberGrid::total_weight() const {
  quad::CompensatedSum f;
  for (double w : fiber.weights) f.add(w);
  return volume_sigma() * f.value();
}

double NormalFiberGrid::max_gram_residual() const {
  double worst = 0.0;
  for (const BaseNode& b : base) {
    const int m = static_cast<int>(b.frames.tangent.cols());
    const int c = static_cast<int>(b.frames.normal.cols());
    Mat all(b.frames.g.rows(), m + c);
    all.leftCols(m) = b.frames.tangent;
    all.rightCols(c) = b.frames.normal;
    worst = std::max(worst, gram_residual(b.frames.g, all));
  }
  return worst;
}

double NormalFiberGrid::max_mean_curvature() const {
  double worst = 0.0;
  for (const BaseNode& b : base) worst = std::max(worst, g_norm(b.frames.g, b.eta));
  return worst;
}

NormalFiberGrid unit_normal_grid(const EmbeddedSubmanifold& sigma, const ChartManifold& M, int fiber_resolution,
                                 double phase) {
  NormalFiberGrid grid;
  for (const auto& node : sigma.parameter_nodes()) {
    grid.base.push_back(make_base_node(sigma, M, node.s, node.weight));
  }
  grid.fiber = quad::product_angle_grid(M.dim() - sigma.dim() - 1, fiber_resolution, phase);
  return grid;
}

NormalSample sample_unit_normal(const NormalFiberGrid& grid, std::mt19937_64& rng) {
  std::vector<double> w;
  for (const BaseNode& b : grid.base) w.push_back(b.weight);
  std::discrete_distribution<int> pick(w.begin(), w.end());
  NormalSample out;
  out.base = pick(rng);
  out.p = quad::uniform_sphere_point(grid.fiber.dim, rng);
  return out;
}

namespace submanifolds {

EmbeddedSubmanifold point(const Vec& x) {
  ChartBox box;
  box.lower = Vec(0);
  box.upper = Vec(0);
  const Vec p = x;
  auto f = [p](const HyperDual*, HyperDual* out) {
    for (int i = 0; i < p.size(); ++i) out[i] = HyperDual(p(i));
  };
  EmbeddedSubmanifold s("point", 0, static_cast<int>(x.size()), box, f, {});
  s.is_minimal_declared = true;
  s.is_totally_geodesic_declared = true;
  return s;
}

EmbeddedSubmanifold sub_torus(const Vec& base, const std::vector<int>& axes, double side, int resolution) {
  const int m = static_cast<int>(axes.size());
  ChartBox box;
  box.lower = Vec::Zero(m);
  box.upper = Vec::Constant(m, side);
  box.periodic.assign(m, true);
  const Vec b = base;
  const std::vector<int> ax = axes;
  auto f = [b, ax](const HyperDual* s, HyperDual* out) {
    for (int i = 0; i < b.size(); ++i) out[i] = HyperDual(b(i));
    for (std::size_t a = 0; a < ax.size(); ++a) out[ax[a]] = s[a];
  };
  EmbeddedSubmanifold sub(m == 1 ? "closed_geodesic" : "sub_torus", m, static_cast<int>(base.size()), box, f,
                          std::vector<int>(m, resolution));
  sub.is_minimal_declared = true;
  return sub;
}

EmbeddedSubmanifold closed_geodesic(const Vec& base, int axis, double side, int resolution) {
  return sub_torus(base, {axis}, side, resolution);
}

EmbeddedSubmanifold great_circle(std::shared_ptr<const Sphere> sphere, int resolution) {
  const int n = sphere->dim();
  ChartBox box;
  box.lower = Vec::Zero(1);
  box.upper = Vec::Constant(1, 2.0 * pi);
  box.periodic = {true};
  const double R = sphere->radius();
  auto f = [sphere, n, R](const HyperDual* s, HyperDual* out) {
    HyperDual X[kMaxDim + 1];
    for (int i = 0; i <= n; ++i) X[i] = HyperDual(0.0);
    X[0] = R * cos(s[0]);
    X[1] = R * sin(s[0]);
    sphere->from_ambient(X, out);
  };
  EmbeddedSubmanifold sub("great_circle", 1, n, box, f, {resolution});
  sub.is_minimal_declared = true;
  sub.is_totally_geodesic_declared = true;
  return sub;
}

EmbeddedSubmanifold equator(std::shared_ptr<const Sphere> sphere, int resolution) {
  const int n = sphere->dim();
  const int m = n - 1;
  const double R = sphere->radius();
  auto f = [sphere, n, m, R](const HyperDual* s, HyperDual* out) {
    HyperDual X[kMaxDim + 1];
    hyperspherical(s, m, X);
    for (int i = 0; i < n; ++i) X[i] = R * X[i];
    X[n] = HyperDual(0.0);
    sphere->from_ambient(X, out);
  };
  EmbeddedSubmanifold sub("equator", m, n, angle_box(m), f, angle_resolution(m, resolution));
  sub.is_minimal_declared = true;
  sub.is_totally_geodesic_declared = true;
  return sub;
}

EmbeddedSubmanifold round_sphere(std::shared_ptr<const ChartManifold> ambient, double a, const Vec& center,
                                 int resolution) {
  const int n = ambient->dim();
  const int m = n - 1;
  if (!(a > 0.0)) throw std::invalid_argument("round_sphere: radius must be positive");
  const AmbientEmbedded& amb = ambient_of(*ambient);
  double height = 0.0;
  const bool in_sphere = amb.ambient_dim() == n + 1;
  if (in_sphere) {
    const double R = static_cast<const Sphere&>(*ambient).radius();
    if (!(a < R)) throw std::invalid_argument("round_sphere: radius must be below the sphere radius");
    height = std::sqrt(R * R - a * a);
  } else if (center.size() != n) {
    throw std::invalid_argument("round_sphere: center must have n components");
  }
  const Vec c = in_sphere ? Vec::Zero(n) : center;
  const AmbientEmbedded* ap = &amb;
  auto f = [ambient, ap, n, m, a, c, height, in_sphere](const HyperDual* s, HyperDual* out) {
    HyperDual X[kMaxDim + 1];
    hyperspherical(s, m, X);
    for (int i = 0; i < n; ++i) X[i] = HyperDual(c(i)) + a * X[i];
    if (in_sphere) X[n] = HyperDual(height);
    ap->from_ambient(X, out);
  };
  return EmbeddedSubmanifold("round_sphere", m, n, angle_box(m), f, angle_resolution(m, resolution));
}

EmbeddedSubmanifold product_factor(const Product& product, const Vec& p, int resolution) {
  const int na = product.first().dim();
  const int nb = product.second().dim();
  if (p.size() != na) throw std::invalid_argument("product_factor: point must lie in the first factor chart");
  const ChartBox box = product.second().domain();
  for (int i = 0; i < nb; ++i) {
    if (!std::isfinite(box.lower(i)) || !std::isfinite(box.upper(i))) {
      throw std::invalid_argument("product_factor: second factor chart must be a bounded box");
    }
  }
  std::vector<int> res(nb, std::max(4, resolution / 2));
  for (int i = 0; i < nb; ++i) {
    if (box.periodic[i]) res[i] = resolution;
  }
  const Vec q = p;
  auto f = [q, na, nb](const HyperDual* s, HyperDual* out) {
    for (int i = 0; i < na; ++i) out[i] = HyperDual(q(i));
    for (int i = 0; i < nb; ++i) out[na + i] = s[i];
  };
  EmbeddedSubmanifold sub("product_factor", nb, na + nb, box, f, res);
  sub.is_minimal_declared = true;
  sub.is_totally_geodesic_declared = true;
  return sub;
}

}  // namespace submanifolds

}  // namespace tubevol
