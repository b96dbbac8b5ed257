#include "tubevol/ray_transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tubevol {

namespace {

struct Layout {
  int n = 0;
  int q = 0;  // n - 1
  int m = 0;
  int d = 0;  // n - m - 1
  int ix = 0, iv = 0, iE = 0, iJ = 0, iK = 0, iacc = 0, total = 0;
  int powers = 0;

  Layout(int n_, int m_, int powers_) : n(n_), q(n_ - 1), m(m_), d(n_ - m_ - 1), powers(powers_) {
    ix = 0;
    iv = n;
    iE = 2 * n;
    iJ = iE + n * q;
    iK = iJ + q * q;
    iacc = iK + q * q;
    total = iacc + kFirstPower + 2 * powers;
  }
};

Mat block(const ode::State& y, int offset, int rows, int cols) {
  Mat out(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) out(r, c) = y(offset + c * rows + r);
  return out;
}

void put(ode::State& y, int offset, const Mat& a) {
  for (int c = 0; c < a.cols(); ++c)
    for (int r = 0; r < a.rows(); ++r) y(offset + c * a.rows() + r) = a(r, c);
}

double neg(double x) { return x < 0.0 ? -x : 0.0; }
double pos(double x) { return x > 0.0 ? x : 0.0; }
double finite_or_zero(double x) { return std::isfinite(x) ? x : 0.0; }

double sigma_min(const Mat& J) {
  if (J.rows() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(J);
  return svd.singularValues().minCoeff();
}

double sigma_max(const Mat& J) {
  if (J.rows() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(J);
  return svd.singularValues().maxCoeff();
}

class RaySystem {
 public:
  RaySystem(const ChartManifold& M, const NormalRay& ray, const RayOptions& opts)
      : M_(M), ray_(ray), opts_(opts),
        L_(M.dim(), static_cast<int>(ray.base->frames.tangent.cols()), static_cast<int>(opts.powers.size())) {}

  const Layout& layout() const { return L_; }

  ode::State initial() const {
    const BaseNode& b = *ray_.base;
    const int n = L_.n, q = L_.q, m = L_.m, d = L_.d;
    if (ray_.p.size() != n - m) throw DimensionMismatchError("integrate_ray: fiber coordinates have wrong size");
    if (std::abs(ray_.p.norm() - 1.0) > 1e-10) throw NonUnitVectorError("integrate_ray: xi is not a unit vector");
    ode::State y = ode::State::Zero(L_.total);
    const Vec xi = b.normal_vector(ray_.p);
    y.segment(L_.ix, n) = Eigen::VectorXd(b.frames.x);
    y.segment(L_.iv, n) = Eigen::VectorXd(xi);
    Mat E(n, q);
    E.leftCols(m) = b.frames.tangent;
    if (d > 0) E.rightCols(d) = b.frames.normal * householder_complement(ray_.p);
    put(y, L_.iE, E);
    Mat J = Mat::Zero(q, q);
    Mat K = Mat::Zero(q, q);
    J.topLeftCorner(m, m) = Mat::Identity(m, m);
    if (m > 0) K.topLeftCorner(m, m) = b.weingarten(ray_.p);
    if (d > 0) K.bottomRightCorner(d, d) = Mat::Identity(d, d);
    put(y, L_.iJ, J);
    put(y, L_.iK, K);
    return y;
  }

  void operator()(double t, const ode::State& y, ode::State& dy) const {
    const int n = L_.n, q = L_.q;
    dy.setZero(L_.total);
    Vec x(n), v(n);
    for (int i = 0; i < n; ++i) {
      x(i) = y(L_.ix + i);
      v(i) = y(L_.iv + i);
    }
    for (int i = 0; i < n; ++i) {
      if (!std::isfinite(x(i)) || !std::isfinite(v(i))) throw RayIntegrationError("ray: non-finite state", t);
    }
    MetricJet jet;
    try {
      jet = M_.jet(x, 2);
    } catch (const SingularMetricError& e) {
      throw RayIntegrationError(e.what(), t);
    }
    const Christoffel G = christoffel_from_jet(jet);
    const Riemann R = riemann_from_jet(jet);
    const Mat E = block(y, L_.iE, n, q);
    const Mat J = block(y, L_.iJ, q, q);
    const Mat K = block(y, L_.iK, q, q);
    for (int i = 0; i < n; ++i) {
      dy(L_.ix + i) = v(i);
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) acc += G.v[i][j][k] * v(j) * v(k);
      dy(L_.iv + i) = -acc;
    }
    Mat dE(n, q);
    for (int a = 0; a < q; ++a)
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) acc += G.v[i][j][k] * v(j) * E(k, a);
        dE(i, a) = -acc;
      }
    put(dy, L_.iE, dE);
    const Mat Ru = E.transpose() * curvature_form(R, v) * E;
    put(dy, L_.iJ, K);
    put(dy, L_.iK, -Ru * J);
    integrands(t, x, J, K, Ru, dy);
  }

 private:
  void integrands(double t, const Vec& x, const Mat& J, const Mat& K, const Mat& Ru, ode::State& dy) const {
    const int m = L_.m, d = L_.d;
    const int a0 = L_.iacc;
    double phi = 0.0, psi_reg = 0.0, psi = 0.0, A = 0.0;
    if (t <= 0.0) {
      phi = m > 0 ? K.topLeftCorner(m, m).trace() : 0.0;
      A = d > 0 ? 0.0 : J.determinant();
    } else {
      A = J.determinant();
      const Mat S = K * J.partialPivLu().inverse();
      phi = m > 0 ? S.topLeftCorner(m, m).trace() : 0.0;
      psi = d > 0 ? S.bottomRightCorner(d, d).trace() : 0.0;
      psi_reg = d > 0 ? psi - d / t : 0.0;
    }
    if (m > 0) dy(a0 + kLogJ) = finite_or_zero(phi / m);
    if (d > 0) dy(a0 + kLogYReg) = finite_or_zero(psi_reg / d);
    if (!opts_.lemma_integrals || m == 0 || d == 0 || t <= 0.0) return;
    const double Ap = std::max(A, 0.0);
    const double Am = std::pow(Ap, 1.0 / m);
    const double Ad = std::pow(Ap, 1.0 / d);
    const double pp = pos(phi) * pos(psi);
    const int k = std::min(m, d);
    const double rho_m = opts_.rho(x, m);
    const double rho_d = d == m ? rho_m : opts_.rho(x, d);
    const double rho_k = k == m ? rho_m : rho_d;
    const double ric_h = Ru.topLeftCorner(m, m).trace() / m;
    const double ric_v = Ru.bottomRightCorner(d, d).trace() / d;
    dy(a0 + kRhoM) = finite_or_zero(neg(rho_m) * Am);
    dy(a0 + kRicHM) = finite_or_zero(neg(ric_h) * Am);
    dy(a0 + kPhiPsiM) = finite_or_zero(pp * Am);
    dy(a0 + kRhoD) = finite_or_zero(neg(rho_d) * Ad);
    dy(a0 + kRicVD) = finite_or_zero(neg(ric_v) * Ad);
    dy(a0 + kPhiPsiD) = finite_or_zero(pp * Ad);
    for (int j = 0; j < L_.powers; ++j) {
      const double p = opts_.powers[j];
      dy(a0 + kFirstPower + 2 * j) = finite_or_zero(std::pow(pp, p) * Ap);
      dy(a0 + kFirstPower + 2 * j + 1) = finite_or_zero(std::pow(neg(rho_k), p) * Ap);
    }
  }

  const ChartManifold& M_;
  const NormalRay& ray_;
  const RayOptions& opts_;
  Layout L_;
};

TransportState unpack(const ChartManifold& M, const Layout& L, double t, const ode::State& y, double det_scale) {
  TransportState s;
  s.t = t;
  s.m = L.m;
  s.x = Vec(L.n);
  s.v = Vec(L.n);
  for (int i = 0; i < L.n; ++i) {
    s.x(i) = y(L.ix + i);
    s.v(i) = y(L.iv + i);
  }
  s.E = block(y, L.iE, L.n, L.q);
  s.J = block(y, L.iJ, L.q, L.q);
  s.K = block(y, L.iK, L.q, L.q);
  s.integrals = y.segment(L.iacc, L.total - L.iacc);
  s.det_scale = det_scale;
  const MetricJet jet = M.jet(s.x, 2);
  s.g = jet.g;
  s.curvature = s.E.transpose() * curvature_form(riemann_from_jet(jet), s.v) * s.E;
  return s;
}

double det_of(const Layout& L, const ode::State& y) { return block(y, L.iJ, L.q, L.q).determinant(); }
double smin_of(const Layout& L, const ode::State& y) { return sigma_min(block(y, L.iJ, L.q, L.q)); }

}  // namespace

RayResult integrate_ray(const ChartManifold& M, const NormalRay& ray, const RayOptions& opts) {
  if (ray.base == nullptr) throw std::invalid_argument("integrate_ray: missing base node");
  if (opts.lemma_integrals && !opts.rho) throw std::invalid_argument("integrate_ray: lemma integrals need rho");
  RaySystem sys(M, ray, opts);
  const Layout& L = sys.layout();
  const ode::State y0 = sys.initial();
  ode::Options o;
  o.rtol = ray.rtol;
  o.atol = ray.rtol;
  o.controlled = L.iacc;
  auto f = [&sys](double t, const ode::State& y, ode::State& dy) { sys(t, y, dy); };

  std::vector<double> outs = opts.output_times;
  std::sort(outs.begin(), outs.end());
  double t_end = ray.t_max;
  if (!outs.empty()) t_end = std::max(t_end, outs.back());

  auto reintegrate = [&](const ode::Point& from, double t) {
    if (t <= from.t) return from.y;
    return ode::integrate(f, from.t, from.y, t, {}, o).back().y;
  };

  RayResult result;
  double sigma_scale = sigma_max(block(y0, L.iJ, L.q, L.q));
  std::vector<ode::Point> recent;  // last three accepted points
  auto observer = [&](const ode::Point& prev, const ode::Point& cur) {
    if (!opts.detect_focal) return true;
    if (recent.empty()) recent.push_back(prev);
    recent.push_back(cur);
    if (recent.size() > 3) recent.erase(recent.begin());
    sigma_scale = std::max(sigma_scale, sigma_max(block(cur.y, L.iJ, L.q, L.q)));
    const double da = det_of(L, prev.y);
    const double db = det_of(L, cur.y);
    if (prev.t > 0.0 && ((da > 0.0 && db <= 0.0) || (da < 0.0 && db >= 0.0))) {
      // locate on the Hermite interpolant first, then confirm by re-integration
      double lo = prev.t, hi = cur.t;
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double dm = det_of(L, ode::hermite(prev, cur, mid));
        if ((dm > 0.0) == (da > 0.0) && dm != 0.0) lo = mid;
        else hi = mid;
      }
      double a = std::max(prev.t, lo - 1e-8), b = std::min(cur.t, hi + 1e-8);
      double fa = det_of(L, reintegrate(prev, a));
      double fb = det_of(L, reintegrate(prev, b));
      if ((fa > 0.0) == (fb > 0.0) && fb != 0.0) {
        a = prev.t;
        b = cur.t;
        fa = da;
      }
      while (b - a > 1e-11) {
        const double mid = 0.5 * (a + b);
        const double fm = det_of(L, reintegrate(prev, mid));
        if ((fm > 0.0) == (fa > 0.0) && fm != 0.0) a = mid;
        else b = mid;
      }
      result.focal_time = 0.5 * (a + b);
      return false;
    }
    if (recent.size() == 3 && recent[0].t > 0.0) {
      const double s0 = smin_of(L, recent[0].y);
      const double s1 = smin_of(L, recent[1].y);
      const double s2 = smin_of(L, recent[2].y);
      if (s1 < s0 && s1 < s2 && s1 < 0.2 * sigma_scale) {
        // golden section on the interpolant over [t0, t2], then on re-integrated states
        auto interp = [&](double t) {
          return t <= recent[1].t ? ode::hermite(recent[0], recent[1], t) : ode::hermite(recent[1], recent[2], t);
        };
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        auto golden = [&](double a, double b, const std::function<double(double)>& fn, double tol) {
          double c = b - gr * (b - a), e = a + gr * (b - a);
          double fc = fn(c), fe = fn(e);
          while (b - a > tol) {
            if (fc < fe) {
              b = e;
              e = c;
              fe = fc;
              c = b - gr * (b - a);
              fc = fn(c);
            } else {
              a = c;
              c = e;
              fc = fe;
              e = a + gr * (b - a);
              fe = fn(e);
            }
          }
          return 0.5 * (a + b);
        };
        const double guess =
            golden(recent[0].t, recent[2].t, [&](double t) { return smin_of(L, interp(t)); }, 1e-12);
        const double w = 1e-5;
        const double lo = std::max(recent[0].t, guess - w), hi = std::min(recent[2].t, guess + w);
        const ode::Point& from = recent[0];
        const double tmin =
            golden(lo, hi, [&](double t) { return smin_of(L, reintegrate(from, t)); }, 1e-11);
        const double smin = smin_of(L, reintegrate(from, tmin));
        if (smin <= 1e-6 * std::max(1.0, sigma_scale)) {
          result.focal_time = tmin;
          result.focal_double_root = true;
          return false;
        }
      }
    }
    return true;
  };

  // The regularized log Y integrand cancels two O(1/t) terms, and RK stage
  // values near t = 0 are not accurate enough for that. Over a short initial
  // segment log Y is taken from det J = J^m Y^d instead.
  const int d = L.q - L.m;
  const double t_start = std::min(0.02, 0.25 * t_end);
  auto set_log_y = [&](ode::State& y, double t) {
    const double det = det_of(L, y);
    if (d == 0 || !(t > 0.0) || !(det > 0.0)) return;
    const double log_jm = L.m > 0 ? L.m * y(L.iacc + kLogJ) : 0.0;
    y(L.iacc + kLogYReg) = (std::log(det) - log_jm) / d - std::log(t);
  };
  std::vector<ode::Point> points;
  try {
    if (d > 0 && t_start > 0.0) {
      std::vector<double> first_stops;
      for (double s : outs)
        if (s < t_start) first_stops.push_back(s);
      points = ode::integrate(f, 0.0, y0, t_start, first_stops, o, observer);
      for (auto& p : points) set_log_y(p.y, p.t);
      // Just past t_start the steps are comparable to t and the log integrands
      // need error control; near a focal point log J diverges, so control is
      // dropped again for the rest of the ray (or on collapse).
      const double t_mid = std::min(t_end, 0.5);
      auto extend = [&](double to, int controlled) {
        ode::Point start = points.back();
        f(start.t, start.y, start.dy);
        ode::Options seg = o;
        seg.controlled = controlled;
        std::vector<ode::Point> more = ode::integrate(f, start.t, start.y, to, outs, seg, observer);
        points.insert(points.end(), more.begin() + 1, more.end());
      };
      if (!result.focal_time && t_mid > t_start) {
        const auto saved_recent = recent;
        const double saved_scale = sigma_scale;
        try {
          extend(t_mid, L.iacc + 2);
        } catch (const ode::StepCollapseError&) {
          recent = saved_recent;
          sigma_scale = saved_scale;
          result.focal_time.reset();
          result.focal_double_root = false;
          extend(t_mid, L.iacc);
        }
      }
      if (!result.focal_time && t_end > points.back().t) extend(t_end, L.iacc);
    } else {
      points = ode::integrate(f, 0.0, y0, t_end, outs, o, observer);
    }
  } catch (const ode::StepCollapseError& e) {
    throw RayIntegrationError(e.what(), e.t);
  }
  result.steps = static_cast<int>(points.size()) - 1;
  double det_scale = 1.0;
  std::size_t next = 0;
  for (const auto& p : points) {
    det_scale = std::max(det_scale, std::abs(det_of(L, p.y)));
    while (next < outs.size() && outs[next] < p.t) ++next;
    while (next < outs.size() && outs[next] == p.t) {
      if (!result.focal_time || p.t < *result.focal_time) result.outputs.push_back(unpack(M, L, p.t, p.y, det_scale));
      ++next;
    }
  }
  return result;
}

TransportState state_at(const ChartManifold& M, const NormalRay& ray, double t, const RayOptions& opts) {
  RayOptions o = opts;
  o.output_times = {t};
  o.detect_focal = false;
  NormalRay r = ray;
  r.t_max = t;
  RayResult res = integrate_ray(M, r, o);
  return res.outputs.at(0);
}

double volume_density(const TransportState& s) { return s.J.determinant(); }

Mat shape_operator(const TransportState& s) {
  const double det = s.J.determinant();
  if (s.t <= 0.0 || std::abs(det) < 1e-12 * std::max(1.0, s.det_scale)) {
    throw FocalSingularityError("shape_operator: J is singular at t = " + std::to_string(s.t));
  }
  return s.K * s.J.partialPivLu().inverse();
}

PhiPsi split_mean_curvature(const TransportState& s) {
  const Mat S = shape_operator(s);
  const int m = s.m;
  const int d = static_cast<int>(S.rows()) - m;
  PhiPsi out;
  if (m > 0) out.phi = S.topLeftCorner(m, m).trace();
  if (d > 0) out.psi = S.bottomRightCorner(d, d).trace();
  return out;
}

double partial_trace_shape(const TransportState& s, const Mat& W) {
  const Mat S = shape_operator(s);
  if (W.rows() != S.rows()) throw DimensionMismatchError("partial_trace_shape: W has wrong row count");
  const Mat sym = 0.5 * (S + S.transpose());
  return (W.transpose() * sym * W).trace();
}

std::optional<double> focal_distance(const ChartManifold& M, const NormalRay& ray, double t_max) {
  NormalRay r = ray;
  r.t_max = t_max;
  const RayResult res = integrate_ray(M, r);
  if (res.focal_time && *res.focal_time <= t_max) return res.focal_time;
  return std::nullopt;
}

JY jy_factors(const TransportState& s) {
  const int q = static_cast<int>(s.J.rows());
  const int d = q - s.m;
  JY out;
  if (s.m > 0) out.J = std::exp(s.integrals(kLogJ));
  if (d > 0) out.Y = s.t * std::exp(s.integrals(kLogYReg));
  return out;
}

Mat wronskian(const TransportState& s) { return s.K.transpose() * s.J - s.J.transpose() * s.K; }

}  // namespace tubevol
