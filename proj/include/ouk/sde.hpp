#pragma once

#include "ouk/common.hpp"
#include "ouk/fields.hpp"
#include "ouk/operator_model.hpp"
#include "ouk/transition.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ouk {

struct PathEnsemble {
  double start_time = 0.0;
  double end_time = 0.0;
  double step = 0.0;
  std::int64_t path_count = 0;
  Mat terminal;  // path_count x N
  std::uint64_t seed = 0;
};

/// Euler-Maruyama on dX = (A(t)X + f(t)) dt + B(t) dW with per-path counter
/// streams; bitwise identical terminal states for any worker count.
PathEnsemble simulate(const OperatorFamily& model, const Vec& x, double s, double t, double dt,
                      std::int64_t path_count, std::uint64_t seed);

struct LawCheck {
  Vec mean_z;       // componentwise z-scores of the empirical mean
  Mat cov_z;        // entrywise z-scores of the empirical covariance
  Vec mean_bias;    // dt-halving bias allowance for the mean
  Mat cov_bias;     // dt-halving bias allowance for the covariance
  double max_mean_z = 0.0;
  double max_cov_z = 0.0;
  bool pass = false;  // all z-scores <= threshold after bias allowance
};

/// Compare ensemble mean/covariance against the Gaussian analytics at the same
/// (s,t,x); the Euler weak bias allowance comes from a dt/2 companion run.
LawCheck law_check(const PathEnsemble& ensemble, const OperatorFamily& model, const Vec& x,
                   double z_threshold = 4.0);

struct WeakCheck {
  double ensemble_mean = 0.0;
  double ensemble_stderr = 0.0;
  double transition_value = 0.0;
  double transition_stderr = 0.0;
  double bias_allowance = 0.0;
  double difference = 0.0;
  bool pass = false;
};

WeakCheck weak_check(const PathEnsemble& ensemble, const FieldFunction& phi,
                     const OperatorFamily& model, double s, double t, const Vec& x,
                     EstimateMethod method = EstimateMethod::automatic, const Budget& budget = {},
                     double z_threshold = 4.0);

/// Flat binary persistence: header (u64 N, u64 pathCount, f64 dt), then rows of
/// little-endian 64-bit floats.
void save_ensemble(const PathEnsemble& ensemble, const std::string& path);
PathEnsemble load_ensemble(const std::string& path);

}  // namespace ouk
