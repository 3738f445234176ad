#pragma once

#include "ouk/common.hpp"
#include "ouk/operator_model.hpp"

#include <cstdint>
#include <vector>

namespace ouk {

/// A Gaussian measure N(mean, covariance) together with the clipped symmetric
/// square root R (R R^T = Q on the retained eigenspace) and the spectral data
/// needed to apply the pseudo-inverse of Q^{1/2}.
struct GaussianLaw {
  Vec mean;
  Mat covariance;
  Mat sqrt_factor;          // R = V diag(sqrt(lambda_clipped)) V^T
  Vec spectrum;             // clipped eigenvalues, ascending
  Mat eigvecs;              // V, columns match spectrum
  double clip_threshold = 1e-12;
  int effective_rank = 0;
  double trace = 0.0;

  /// Apply Q^{-1/2} on the retained eigenspace; annihilates the clipped one.
  Vec apply_pinv_sqrt(const Vec& y) const;
  /// Columns of V spanning the retained eigenspace (ascending eigenvalue order).
  Mat retained_basis() const;
  /// sqrt of the retained eigenvalues, aligned with retained_basis().
  Vec retained_sqrt_spectrum() const;
};

/// Spectral square root with eigenvalue clipping. Throws on asymmetric input
/// (relative 1e-12) or a significantly negative spectrum (< -1e-8 * trace).
GaussianLaw psd_sqrt(const Mat& q, double clip_threshold = 1e-12);

/// Q(t,s) = int_s^t U(t,r) B(r) B^*(r) U^*(t,r) dr by composite Gauss-Legendre,
/// panels doubled until the trace moves by < 1e-10 relative. Mean is zero.
GaussianLaw covariance(const OperatorFamily& model, double s, double t, int quad_order = 12,
                       double clip_threshold = 1e-12);

/// m^x(t,s) = U(t,s) x + int_s^t U(t,r) f(r) dr.
Vec mean_vector(const OperatorFamily& model, const Vec& x, double s, double t,
                int quad_order = 12);

/// Per-mode covariance oracle for diagonal models: t_k(t,s) by nested adaptive
/// quadrature (independent of the composite Gauss-Legendre path).
double diagonal_mode_variance_oracle(const DiagonalCoefficients& d, int k, double s, double t);

/// The triple (U, Q, Lambda) for a fixed time pair, with conditioning diagnostics.
struct SmoothingBundle {
  double s = 0.0;
  double t = 0.0;
  EvolutionMatrix u;
  GaussianLaw law;          // mean zero
  Mat lambda;               // Q^{-1/2}(t,s) U(t,s) on the retained eigenspace
  double lambda_op_norm = 0.0;
  double range_residual = 0.0;  // max over basis vectors of the relative LS residual
  bool degenerate = false;      // set when range_residual > tau_range
};

SmoothingBundle smoothing_bundle(const OperatorFamily& model, double s, double t,
                                 int quad_order = 12, double clip_threshold = 1e-12,
                                 double tau_range = 1e-6);

/// y_i = mean + R z_i with z_i standard normal from a counter-based stream;
/// rows are samples. Deterministic for fixed (seed, count) at any worker count.
Mat sample(const GaussianLaw& law, std::int64_t count, std::uint64_t seed);

/// Cameron-Martin density of N(eps U h, Q) against N(0, Q) evaluated at y:
/// exp(-eps^2 |Lambda h|^2 / 2 + eps <Lambda h, Q^{-1/2} y>).
double cm_weight(const SmoothingBundle& bundle, const Vec& shift_direction, double scale,
                 const Vec& y);

/// Traces of leading principal submatrices at the requested truncations.
std::vector<std::pair<int, double>> trace_truncation_curve(const OperatorFamily& model, double s,
                                                           double t,
                                                           const std::vector<int>& truncations,
                                                           int quad_order = 12);

}  // namespace ouk
