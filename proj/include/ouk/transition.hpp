#pragma once

#include "ouk/common.hpp"
#include "ouk/fields.hpp"
#include "ouk/gaussian.hpp"
#include "ouk/operator_model.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace ouk {

enum class EstimateMethod { automatic, monteCarlo, tensorQuadrature };

struct Budget {
  std::int64_t samples = 200000;        // Monte Carlo sample count
  std::int64_t max_samples = 8000000;   // cap for variance-driven auto-scaling
  // >0: Monte Carlo scales samples toward this absolute stderr; quadrature
  // treats it as the relative refinement tolerance (default 1e-9 tensor,
  // 1e-10 for the 1-D adaptive path).
  double tolerance = 0.0;
};

struct MCEstimate {
  double value = 0.0;
  double stderr_ = 0.0;  // MC standard error, or quadrature refinement delta
  std::int64_t sample_count = 0;
  EstimateMethod method = EstimateMethod::automatic;
  std::uint64_t seed = 0;
};

/// Expectation of f under N(0, Q) for the law in `bundle`-free form. The
/// integrand receives the point y in state space and its coordinates zeta in
/// the retained eigenbasis (y = V_r diag(sqrt(lambda_r)) zeta, Q^{-1/2}y = V_r zeta).
MCEstimate gaussian_expectation(const GaussianLaw& law,
                                const std::function<double(const Vec&, const Vec&)>& f,
                                EstimateMethod method, const Budget& budget, std::uint64_t seed);

/// All ways to choose `pair_count` disjoint unordered pairs from {1..n}
/// (0-based indices internally); pairs sorted, pair list sorted by first element.
struct PartialMatching {
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> leftover;
};

std::vector<PartialMatching> enumerate_partial_matchings(int n, int pair_count);

/// Cached enumeration over all pair counts 0..r_n for a given n.
const std::vector<PartialMatching>& all_partial_matchings(int n);

/// Default cap on the derivative order of the Cameron-Martin weight.
inline constexpr int kMaxWeightOrder = 6;

/// The integration-by-parts weight I_n(t,s)(y)(h_1..h_n): the signed sum over
/// partial matchings of products of pair couplings <Lambda h_i, Lambda h_j>
/// and leftover factors <Lambda h_i, Q^{-1/2} y>.
double weight_I_n(const SmoothingBundle& bundle, const Vec& y, const std::vector<Vec>& dirs);

/// P_{s,t} phi (x). Exact at s == t. Tensor Gauss-Hermite for retained rank <= 6
/// (adaptive in 1-D), Monte Carlo beyond.
MCEstimate apply_P(const OperatorFamily& model, const FieldFunction& phi, double s, double t,
                   const Vec& x, EstimateMethod method = EstimateMethod::automatic,
                   const Budget& budget = {}, std::uint64_t seed = 1);

/// D^n P_{s,t} phi (x)(h_1..h_n) for bounded phi via the weight I_n.
MCEstimate derivative_P(const OperatorFamily& model, const FieldFunction& phi, double s, double t,
                        const Vec& x, const std::vector<Vec>& dirs,
                        EstimateMethod method = EstimateMethod::automatic,
                        const Budget& budget = {}, std::uint64_t seed = 1);

/// Same, with a precomputed bundle (and mean), for callers probing many x.
MCEstimate derivative_P(const OperatorFamily& model, const SmoothingBundle& bundle,
                        const FieldFunction& phi, const Vec& x, const std::vector<Vec>& dirs,
                        EstimateMethod method = EstimateMethod::automatic,
                        const Budget& budget = {}, std::uint64_t seed = 1);

/// Derivative transfer for phi in C^k: P_{s,t}[ D^k phi (.) (U h_1, ..., U h_k) ](x).
/// Valid at s == t.
MCEstimate derivative_P_transfer(const OperatorFamily& model, const FieldFunction& phi, double s,
                                 double t, const Vec& x, const std::vector<Vec>& dirs,
                                 EstimateMethod method = EstimateMethod::automatic,
                                 const Budget& budget = {}, std::uint64_t seed = 1);

/// Mixed formula: the first k directions go through the derivative transfer,
/// the remaining ones through the weight I_n.
MCEstimate derivative_P_mixed(const OperatorFamily& model, const FieldFunction& phi, double s,
                              double t, const Vec& x, const std::vector<Vec>& dirs, int k,
                              EstimateMethod method = EstimateMethod::automatic,
                              const Budget& budget = {}, std::uint64_t seed = 1);

/// Prebound D^n P estimator for probing many x against one bundle: the weight
/// precomputation happens once here, not per evaluation. The bundle is copied
/// into the returned closure.
std::function<MCEstimate(const Vec&)> derivative_P_evaluator(
    const OperatorFamily& model, const SmoothingBundle& bundle, const FieldFunction& phi,
    std::vector<Vec> dirs, EstimateMethod method = EstimateMethod::automatic,
    const Budget& budget = {}, std::uint64_t seed = 1);

}  // namespace ouk
