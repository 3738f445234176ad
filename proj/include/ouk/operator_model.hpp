#pragma once

#include "ouk/common.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace ouk {

enum class OperatorStructure { scalar, diagonal, dense };

/// Per-mode coefficients of the diagonal family A(t)e_k = alpha_k(t)e_k,
/// B(t)e_k = beta_k(t)e_k (k is 1-based).
struct DiagonalCoefficients {
  int mode_count = 0;
  double drift_exponent = 2.0;    // a
  double diffusion_decay = 1.0;   // b
  double drift_scale = 1.0;       // c1
  double drift_scale_min = 0.5;   // c2
  double modulation = 0.25;       // eps
  double frequency = 6.283185307179586476925287;  // omega

  std::function<double(int, double)> alpha;  // alpha_k(t)
  std::function<double(int, double)> beta;   // beta_k(t)

  double theta_star() const { return 0.5 + diffusion_decay / drift_exponent; }

  /// lambda_k = max_t alpha_k(t) over a fine grid on [0, horizon].
  double lambda_max(int k, double horizon, int grid = 512) const;
  /// sup_t |beta_k(t)| over a fine grid.
  double beta_sup(int k, double horizon, int grid = 512) const;
  /// Trace proxy: sum over retained modes of beta_sup^2 / |lambda_k|.
  double trace_proxy(double horizon) const;
  /// Tail of the trace proxy beyond mode n_keep (variance bound sum_{k>n} beta_sup^2/(2|lambda_k|)).
  double trace_tail(int n_keep, double horizon) const;
};

/// Memoized per-model numerical artifacts, shared across copies of the model.
/// Keys are exact input tuples, so the cache never changes results, only cost.
struct ModelCaches {
  std::mutex mu;
  std::map<std::array<double, 3>, Mat> evolution;  // (s, t, tolerance) -> U(t,s)
  std::shared_ptr<void> gaussian;                  // laws and forcing integrals
};

struct OperatorFamily {
  int dimension = 1;
  double horizon = 1.0;
  std::function<Mat(double)> drift;              // A(t)
  std::function<Mat(double)> diffusion;          // B(t)
  std::function<Vec(double)> forcing;            // f(t)
  OperatorStructure structure = OperatorStructure::dense;
  std::optional<std::function<Mat(double, double)>> closed_form_u;  // (s,t) -> U(t,s)
  std::shared_ptr<const DiagonalCoefficients> diagonal;             // set for diagonal families
  std::shared_ptr<ModelCaches> caches = std::make_shared<ModelCaches>();
  std::string label;

  /// sup over a fine time grid of the operator norm of B(t) (Hypothesis-level bound, recorded).
  double sup_diffusion_norm(int grid = 256) const;
  /// sup over a fine time grid of |f(t)|.
  double sup_forcing_norm(int grid = 256) const;
};

struct EvolutionMatrix {
  double s = 0.0;
  double t = 0.0;
  Mat entries;
  double integrator_tolerance = 1e-10;
};

/// U(t,s): closed form when available (diagonal: exp of the per-mode drift
/// integral, resolved by adaptive quadrature to 1e-12); otherwise RK4 on
/// dU/dt = A(t)U with global step halving until the midpoint cocycle defect
/// is below tolerance.
EvolutionMatrix evolve(const OperatorFamily& model, double s, double t,
                       double tolerance = 1e-10);

struct Example1Params {
  int mode_count = 16;
  double horizon = 2.0;
  double drift_exponent = 2.0;    // a > 0
  double diffusion_decay = 1.0;   // b >= 0
  double drift_scale = 1.0;       // c1
  double drift_scale_min = 0.5;   // c2, requires c1 >= c2 > 0
  double modulation = 0.25;       // eps in [0,1), eps < c1
  double frequency = 6.283185307179586476925287;  // omega >= 0
};

/// The built-in diagonal family: alpha_k(t) = -k^a (c1 + eps sin(omega t)),
/// beta_k(t) = k^{-b} (1 + eps cos(omega t)).
OperatorFamily make_example1(const Example1Params& params);

/// Scalar model with constant coefficients dX = (a X + f) dt + b dW.
OperatorFamily make_scalar(double a, double b, double f = 0.0, double horizon = 2.0);

/// Parse a model description (JSON): {"type": "scalar"|"diagonal"|"dense", "N", "T",
/// "params" {...} or sampled coefficient tables for dense models}.
OperatorFamily model_from_json(const nlohmann::json& j);

}  // namespace ouk
