#include "tubevol/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace tubevol {

namespace {

// One projection sweep of column `v` against the accepted columns.
void project_out(const Mat& g, const Mat& basis, int count, Vec& v) {
  for (int j = 0; j < count; ++j) {
    const Vec b = basis.col(j);
    v -= g_dot(g, b, v) * b;
  }
}

}  // namespace

Mat orthonormalize(const Mat& g, const Mat& vectors, double drop_tol) {
  return orthonormalize(g, vectors, drop_tol, static_cast<int>(vectors.cols()));
}

Mat orthonormalize(const Mat& g, const Mat& vectors, double drop_tol, int max_cols) {
  const int n = static_cast<int>(vectors.rows());
  Mat out(n, std::min<int>(max_cols, static_cast<int>(vectors.cols())));
  int count = 0;
  for (int c = 0; c < vectors.cols() && count < out.cols(); ++c) {
    Vec v = vectors.col(c);
    const double original = g_norm(g, v);
    if (original == 0.0) continue;
    project_out(g, out, count, v);
    double norm = g_norm(g, v);
    if (norm < drop_tol * original) continue;
    v /= norm;
    // re-orthogonalize when the first pass left visible overlap
    double worst = 0.0;
    for (int j = 0; j < count; ++j) worst = std::max(worst, std::abs(g_dot(g, out.col(j), v)));
    if (worst > 1e-12) {
      project_out(g, out, count, v);
      norm = g_norm(g, v);
      v /= norm;
    }
    out.col(count++) = v;
  }
  if (count < out.cols()) out.conservativeResize(n, count);
  return out;
}

double gram_residual(const Mat& g, const Mat& frame) {
  const Mat gram = frame.transpose() * g * frame;
  return (gram - Mat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

Mat householder_complement(const Vec& u) {
  const int n = static_cast<int>(u.size());
  // reflect e_j onto u where j is chosen to keep the reflection well-conditioned
  int j = 0;
  u.cwiseAbs().maxCoeff(&j);
  Vec e = Vec::Zero(n);
  e(j) = u(j) >= 0.0 ? 1.0 : -1.0;
  Vec w = e - u;
  const double wn = w.squaredNorm();
  Mat h = Mat::Identity(n, n);
  if (wn > 0.0) h -= 2.0 * w * w.transpose() / wn;
  // h maps e -> u, so the other columns of h span u^perp
  Mat basis(n, n - 1);
  int c = 0;
  for (int col = 0; col < n; ++col) {
    if (col == j) continue;
    basis.col(c++) = h.col(col);
  }
  return basis;
}

Vec symmetric_eigenvalues(const Mat& a) {
  const int n = static_cast<int>(a.rows());
  Vec ev(n);
  if (n == 0) return ev;
  if (n == 1) {
    ev(0) = a(0, 0);
    return ev;
  }
  if (n == 2) {
    const double mean = 0.5 * (a(0, 0) + a(1, 1));
    const double half = 0.5 * (a(0, 0) - a(1, 1));
    const double off = 0.5 * (a(0, 1) + a(1, 0));
    const double rad = std::hypot(half, off);
    ev(0) = mean - rad;
    ev(1) = mean + rad;
    return ev;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double smallest_eigen_sum(const Mat& a, int k) {
  const Vec ev = symmetric_eigenvalues(a);
  double s = 0.0;
  for (int i = 0; i < k && i < ev.size(); ++i) s += ev(i);
  return s;
}

}  // namespace tubevol
