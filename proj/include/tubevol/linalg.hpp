#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace tubevol {

/// Largest chart dimension supported by the fixed-capacity matrix types.
inline constexpr int kMaxDim = 7;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

struct SingularMetricError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Metric inner product <a, b>_g.
inline double g_dot(const Mat& g, const Vec& a, const Vec& b) { return a.dot(g * b); }

inline double g_norm(const Mat& g, const Vec& a) { return std::sqrt(g_dot(g, a, a)); }

/// Modified Gram-Schmidt in the inner product `g`.
///
/// Columns of `vectors` are processed left to right; a column whose residual
/// norm falls below `drop_tol` times its original norm is discarded. Each
/// projection pass is repeated once when the Gram residual of the output
/// exceeds 1e-12.
Mat orthonormalize(const Mat& g, const Mat& vectors, double drop_tol = 1e-8);

/// Same as orthonormalize but keeps at most `max_cols` columns.
Mat orthonormalize(const Mat& g, const Mat& vectors, double drop_tol, int max_cols);

/// Max-abs entry of (F^T g F - I).
double gram_residual(const Mat& g, const Mat& frame);

/// Orthonormal basis of the Euclidean complement of unit vector `u`, built
/// from a Householder reflection so that it varies smoothly with u.
Mat householder_complement(const Vec& u);

/// Eigenvalues of a small symmetric matrix in ascending order.
Vec symmetric_eigenvalues(const Mat& a);

/// Sum of the k smallest eigenvalues of a symmetric matrix.
double smallest_eigen_sum(const Mat& a, int k);

}  // namespace tubevol
