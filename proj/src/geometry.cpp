#include "tubevol/geometry.hpp"

#include "tubevol/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace tubevol {

ChartManifold::ChartManifold(int n) : n_(n) {
  if (n < 2 || n > kMaxDim) {
    throw std::invalid_argument("ChartManifold: dimension must be in [2, " +
                                std::to_string(kMaxDim) + "]");
  }
  const double inf = std::numeric_limits<double>::infinity();
  domain_.lower = Vec::Constant(n, -inf);
  domain_.upper = Vec::Constant(n, inf);
  domain_.periodic.assign(n, false);
}

MetricJet ChartManifold::jet(const Vec& x, int order) const { return finite_difference_jet(x, order); }

MetricJet ChartManifold::finite_difference_jet(const Vec& x, int order) const {
  MetricJet jet;
  jet.n = n_;
  jet.order = order;
  jet.g = metric(x);
  const double h1 = fd_first;
  for (int c = 0; c < n_; ++c) {
    Vec xp = x, xm = x;
    xp(c) += h1;
    xm(c) -= h1;
    const Mat d = (metric(xp) - metric(xm)) / (2.0 * h1);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b) jet.dg[a][b][c] = d(a, b);
  }
  if (order >= 2) {
    const double h = fd_second;
    for (int c = 0; c < n_; ++c) {
      for (int e = c; e < n_; ++e) {
        Mat d;
        if (c == e) {
          Vec xp = x, xm = x;
          xp(c) += h;
          xm(c) -= h;
          d = (metric(xp) - 2.0 * jet.g + metric(xm)) / (h * h);
        } else {
          Vec pp = x, pm = x, mp = x, mm = x;
          pp(c) += h; pp(e) += h;
          pm(c) += h; pm(e) -= h;
          mp(c) -= h; mp(e) += h;
          mm(c) -= h; mm(e) -= h;
          d = (metric(pp) - metric(pm) - metric(mp) + metric(mm)) / (4.0 * h * h);
        }
        for (int a = 0; a < n_; ++a) {
          for (int b = 0; b < n_; ++b) {
            jet.ddg[a][b][c][e] = d(a, b);
            jet.ddg[a][b][e][c] = d(a, b);
          }
        }
      }
    }
  }
  finish_jet(jet);
  return jet;
}

void ChartManifold::finish_jet(MetricJet& jet) const {
  Eigen::LDLT<Mat> ldlt(jet.g);
  const Vec d = ldlt.vectorD();
  const double scale = jet.g.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !(d.minCoeff() > 1e-14 * scale)) {
    throw SingularMetricError("metric is not positive definite at working precision");
  }
  jet.ginv = ldlt.solve(Mat::Identity(n_, n_));
  jet.ginv = 0.5 * (jet.ginv + jet.ginv.transpose()).eval();
}

Vec ChartManifold::wrap(const Vec& x) const {
  Vec y = x;
  for (int i = 0; i < n_; ++i) {
    if (!domain_.periodic[i]) continue;
    const double lo = domain_.lower(i);
    const double len = domain_.upper(i) - lo;
    y(i) = lo + (x(i) - lo) - len * std::floor((x(i) - lo) / len);
  }
  return y;
}

bool ChartManifold::in_domain(const Vec& x) const {
  for (int i = 0; i < n_; ++i) {
    if (domain_.periodic[i]) continue;
    if (!(x(i) >= domain_.lower(i) && x(i) <= domain_.upper(i))) return false;
  }
  return true;
}

double ChartManifold::volume_element(const Vec& x) const { return std::sqrt(metric(x).determinant()); }

Christoffel christoffel_from_jet(const MetricJet& jet) {
  const int n = jet.n;
  Christoffel G;
  G.n = n;
  double low[kMaxDim][kMaxDim][kMaxDim];
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        const double v = 0.5 * (jet.dg[m][k][j] + jet.dg[m][j][k] - jet.dg[j][k][m]);
        low[m][j][k] = v;
        low[m][k][j] = v;
      }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += jet.ginv(i, m) * low[m][j][k];
        G.v[i][j][k] = s;
        G.v[i][k][j] = s;
      }
  return G;
}

Riemann riemann_from_jet(const MetricJet& jet) {
  if (jet.order < 2) throw std::invalid_argument("riemann_from_jet: second derivatives required");
  const int n = jet.n;
  const Christoffel G = christoffel_from_jet(jet);
  // Gl[p][l][i] = g_pq Gamma^q_li
  double Gl[kMaxDim][kMaxDim][kMaxDim];
  for (int p = 0; p < n; ++p)
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int q = 0; q < n; ++q) s += jet.g(p, q) * G.v[q][l][i];
        Gl[p][l][i] = s;
      }
  Riemann R;
  R.n = n;
  auto d2 = [&](int a, int b, int c, int d) { return jet.ddg[a][b][c][d]; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.5 * (d2(i, l, j, k) + d2(j, k, i, l) - d2(j, l, i, k) - d2(i, k, j, l));
          for (int p = 0; p < n; ++p) v += Gl[p][l][i] * G.v[p][k][j] - Gl[p][k][i] * G.v[p][l][j];
          R.v[i][j][k][l] = v;
        }
  return R;
}

Christoffel christoffel_at(const ChartManifold& M, const Vec& x) {
  return christoffel_from_jet(M.jet(x, 1));
}

Riemann curvature_tensor_at(const ChartManifold& M, const Vec& x) {
  return riemann_from_jet(M.jet(x, 2));
}

Mat curvature_form(const Riemann& R, const Vec& u) {
  const int n = R.n;
  Mat f(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = i; k < n; ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        if (u(j) == 0.0) continue;
        for (int l = 0; l < n; ++l) s += R.v[i][j][k][l] * u(j) * u(l);
      }
      f(i, k) = s;
      f(k, i) = s;
    }
  return f;
}

CurvatureOperatorAt directional_curvature_operator(const ChartManifold& M, const Vec& x,
                                                   const Vec& u) {
  const int n = M.dim();
  if (u.size() != n) throw DimensionMismatchError("directional_curvature_operator: |u| != n");
  const MetricJet jet = M.jet(x, 2);
  const double un = g_norm(jet.g, u);
  if (std::abs(un - 1.0) > 1e-10) {
    throw NonUnitVectorError("directional_curvature_operator: |u|_g = " + std::to_string(un));
  }
  const Riemann R = riemann_from_jet(jet);
  // u first, then coordinate axes; the one that becomes dependent is dropped
  Mat all(n, n + 1);
  all.col(0) = u;
  all.rightCols(n) = Mat::Identity(n, n);
  const Mat basis = orthonormalize(jet.g, all, 1e-8, n);
  CurvatureOperatorAt out;
  out.x = x;
  out.u = u;
  out.frame = basis.rightCols(n - 1);
  const Mat form = curvature_form(R, u);
  out.op = out.frame.transpose() * form * out.frame;
  out.op = 0.5 * (out.op + out.op.transpose()).eval();
  return out;
}

double ric_k(const ChartManifold& M, const Vec& x, const Vec& u, const Mat& V) {
  const int n = M.dim();
  if (u.size() != n || V.rows() != n) throw DimensionMismatchError("ric_k: vector size != n");
  if (V.cols() < 1 || V.cols() > n - 1) throw DimensionMismatchError("ric_k: need 1 <= k <= n-1");
  const MetricJet jet = M.jet(x, 2);
  const Mat on = orthonormalize(jet.g, V, 1e-10);
  if (on.cols() != V.cols()) throw DimensionMismatchError("ric_k: V is rank deficient");
  for (int c = 0; c < on.cols(); ++c) {
    if (std::abs(g_dot(jet.g, on.col(c), u)) > 1e-8 * g_norm(jet.g, u)) {
      throw DimensionMismatchError("ric_k: V is not orthogonal to u");
    }
  }
  const Riemann R = riemann_from_jet(jet);
  const double uu = g_dot(jet.g, u, u);
  const Mat form = curvature_form(R, u);
  return (on.transpose() * form * on).trace() / uu;
}

Riemann orthonormal_curvature(const ChartManifold& M, const Vec& x) {
  const MetricJet jet = M.jet(x, 2);
  const Riemann R = riemann_from_jet(jet);
  const int n = jet.n;
  const Mat F = orthonormalize(jet.g, Mat::Identity(n, n));
  // contract one index at a time
  Riemann a, b;
  a.n = b.n = n;
  for (int p = 0; p < n; ++p)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int i = 0; i < n; ++i) s += F(i, p) * R.v[i][j][k][l];
          a.v[p][j][k][l] = s;
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int j = 0; j < n; ++j) s += F(j, q) * a.v[p][j][k][l];
          b.v[p][q][k][l] = s;
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int l = 0; l < n; ++l) {
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += F(k, r) * b.v[p][q][k][l];
          a.v[p][q][r][l] = s;
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int t = 0; t < n; ++t) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) s += F(l, t) * a.v[p][q][r][l];
          b.v[p][q][r][t] = s;
        }
  return b;
}

double ric_k_min_over_subspaces(const Riemann& Rhat, const Vec& u, int k) {
  const Mat Q = householder_complement(u);
  const Mat op = Q.transpose() * curvature_form(Rhat, u) * Q;
  return smallest_eigen_sum(0.5 * (op + op.transpose()), k);
}

namespace {

const quad::SphereGrid& cached_direction_grid(int n, int count) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, quad::SphereGrid> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, count);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, quad::direction_grid(n, count)).first;
  return it->second;
}

}  // namespace

RhoSearchResult rho_k_search(const Riemann& Rhat, int k, const RhoSearchOptions& opts) {
  const int n = Rhat.n;
  if (k < 1 || k > n - 1) throw std::invalid_argument("rho_k: need 1 <= k <= n-1");
  const auto& grid = cached_direction_grid(n, opts.min_directions);
  const int count = static_cast<int>(grid.points.size());
  std::vector<std::pair<double, int>> vals(count);
  for (int i = 0; i < count; ++i) vals[i] = {ric_k_min_over_subspaces(Rhat, grid.points[i], k), i};
  const int starts = std::min(opts.refine_starts, count);
  std::partial_sort(vals.begin(), vals.begin() + starts, vals.end());
  RhoSearchResult res;
  res.grid_value = vals[0].first;
  res.refined_value = vals[0].first;
  res.argmin = grid.points[vals[0].second];

  const double area = 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
  const double spacing = std::pow(area / count, 1.0 / (n - 1));
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int s = 0; s < starts; ++s) {
    Vec u = grid.points[vals[s].second];
    double best = vals[s].first;
    double step = 2.0 * spacing;
    for (int round = 0; round < opts.refine_rounds; ++round) {
      for (int dir = 0; dir < n - 1; ++dir) {
        const Vec e = householder_complement(u).col(dir);
        auto f = [&](double th) {
          Vec v = std::cos(th) * u + std::sin(th) * e;
          return ric_k_min_over_subspaces(Rhat, v / v.norm(), k);
        };
        double a = -step, b = step;
        double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
        double fc = f(c), fd = f(d);
        for (int it = 0; it < 30; ++it) {
          if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
          } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
          }
        }
        const double th = 0.5 * (a + b);
        const double ft = f(th);
        if (ft < best) {
          best = ft;
          Vec v = std::cos(th) * u + std::sin(th) * e;
          u = v / v.norm();
        }
      }
      step *= 0.25;
    }
    if (best < res.refined_value) {
      res.refined_value = best;
      res.argmin = u;
    }
  }
  return res;
}

std::optional<double> rho_k_exact(const Riemann& Rhat, int k) {
  const int n = Rhat.n;
  bool flat = true;
  for (int i = 0; i < n && flat; ++i)
    for (int j = 0; j < n && flat; ++j)
      for (int a = 0; a < n && flat; ++a)
        for (int b = 0; b < n && flat; ++b) flat = Rhat.v[i][j][a][b] == 0.0;
  if (flat) return 0.0;
  {
    // constant curvature: Rhat = K (d_ia d_jb - d_ib d_ja)
    const double K = Rhat.v[0][1][0][1];
    double scale = 0.0, dev = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) {
            const double model = K * ((i == a && j == b ? 1.0 : 0.0) - (i == b && j == a ? 1.0 : 0.0));
            scale = std::max(scale, std::abs(Rhat.v[i][j][a][b]));
            dev = std::max(dev, std::abs(Rhat.v[i][j][a][b] - model));
          }
    if (dev <= 1e-12 * std::max(1.0, scale)) return k * K;
  }
  if (k == n - 1) {
    Mat ric(n, n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += Rhat.v[i][a][i][b];
        ric(a, b) = s;
      }
    return symmetric_eigenvalues(0.5 * (ric + ric.transpose())).minCoeff();
  }
  if (n == 3 && k == 1) {
    // every 2-vector in dimension 3 is decomposable
    const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    Mat op(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) op(a, b) = Rhat.v[pairs[a][0]][pairs[a][1]][pairs[b][0]][pairs[b][1]];
    return symmetric_eigenvalues(0.5 * (op + op.transpose())).minCoeff();
  }
  return std::nullopt;
}

double rho_k_at(const ChartManifold& M, const Vec& x, int k, const RhoSearchOptions& opts) {
  const Riemann Rhat = orthonormal_curvature(M, x);
  if (auto exact = rho_k_exact(Rhat, k)) return *exact;
  return rho_k_search(Rhat, k, opts).refined_value;
}

namespace {

double box_integral(const ChartManifold& M, const ChartBox& region, int panels, int order,
                    const std::function<double(const Vec&)>& f) {
  const int n = M.dim();
  std::vector<quad::Rule> rules;
  for (int i = 0; i < n; ++i) {
    rules.push_back(quad::composite_gauss_legendre(region.lower(i), region.upper(i), panels, order));
  }
  const int per_axis = panels * order;
  std::vector<int> idx(n, 0);
  quad::CompensatedSum sum;
  Vec x(n);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      x(i) = rules[i].nodes[idx[i]];
      w *= rules[i].weights[idx[i]];
    }
    sum.add(w * f(x));
    int i = n - 1;
    while (i >= 0 && ++idx[i] == per_axis) idx[i--] = 0;
    if (i < 0) break;
  }
  return sum.value();
}

}  // namespace

QuadratureValue lp_deficit_norm(const ChartManifold& M, const ChartBox& region, int k, double H,
                                double p, int panels, int order, const RhoSearchOptions& opts) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_deficit_norm: need p >= 1");
  auto integrand = [&](const Vec& x) {
    const double deficit = std::max(0.0, H - rho_k_at(M, x, k, opts));
    if (deficit == 0.0) return 0.0;
    return std::pow(deficit, p) * M.volume_element(x);
  };
  const double fine = box_integral(M, region, panels, order, integrand);
  const double coarse = panels >= 2 ? box_integral(M, region, panels / 2, order, integrand)
                                    : box_integral(M, region, 1, std::max(1, order / 2), integrand);
  QuadratureValue out;
  out.value = std::pow(std::max(0.0, fine), 1.0 / p);
  out.error_estimate = std::abs(out.value - std::pow(std::max(0.0, coarse), 1.0 / p));
  return out;
}

}  // namespace tubevol
