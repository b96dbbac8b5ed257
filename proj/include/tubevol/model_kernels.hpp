#pragma once

#include "tubevol/bound_report.hpp"

#include <optional>
#include <stdexcept>

/// Closed-form model functions for constant curvature H and the tube-volume
/// bound evaluators. Everything here is a pure function of its arguments.
namespace tubevol::model {

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Below this |H| the flat branch sn = r, cs = 1 is used.
inline constexpr double kFlatThreshold = 1e-8;

struct SnCs {
  double sn;
  double cs;
};

/// Generalized sine/cosine: sn'' + H sn = 0, sn(0) = 0, sn'(0) = 1, cs = sn'.
SnCs sn_cs(double H, double r);

/// First positive zero of cs_H + w0 sn_H (tangential branch) or of sn_H
/// (when w0 is empty). Returns +inf when there is none.
double denominator_first_zero(double H, std::optional<double> w0);

/// Model partial trace of the level-set shape operator over a k-plane:
/// k (w0 cs - H sn)/(cs + w0 sn) when w0 is given, k cs/sn otherwise.
/// Throws DomainError when t is not inside (0, first zero of the denominator).
double model_shape_trace(double H, int k, std::optional<double> w0, double t);

/// Comparison density (cs + eta_dot_xi sn)^m sn^(n-m-1).
double hk_integrand(double H, int n, int m, double eta_dot_xi, double t);

/// min(r, first t > 0 where hk_integrand vanishes); march-and-bisect.
double first_zero(double H, int n, int m, double eta_dot_xi, double r);

/// Volume of the unit sphere S^d.
double sphere_volume(int d);

struct BoundConstants {
  int n = 0;
  int m = 0;
  int k = 0;
  double p = 0.0;
  double H = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
};

/// Constants of the integral-curvature tube bound. Requires n >= 3,
/// 0 < m < n-1, p > n-k and H <= 0; throws ParameterError otherwise.
BoundConstants thm1_constants(int n, int m, double p, double H);

/// The auxiliary radius function w(r) of the integral bound.
double thm1_w(const BoundConstants& c, double vol_sigma, double deficit_norm, double r);

/// Upper bound on vol T(Sigma, r) from the L^p norm of (rho_k - H)_-.
double thm1_bound(const BoundConstants& c, double vol_sigma, double deficit_norm, double r);

/// Largest submanifold volume delta with thm1_bound(delta, epsilon, D) <= v0.
/// Throws InfeasibleError if the bound already exceeds v0 as delta -> 0+.
double cheeger_delta(int n, int m, double p, double H, double v0, double D, double epsilon);

}  // namespace tubevol::model
