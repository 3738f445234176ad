#pragma once

#include "ouk/common.hpp"
#include "ouk/fields.hpp"
#include "ouk/gaussian.hpp"
#include "ouk/kolmogorov.hpp"
#include "ouk/transition.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace ouk {

/// Seeded probe geometry: base points in a ball, unit directions, log-spaced scales.
struct ProbeSet {
  std::vector<Vec> base_points;
  std::vector<Vec> directions;
  std::vector<double> deltas;
};

ProbeSet make_probe_set(int dim, int base_count = 16, int dir_count = 16, int scale_count = 12,
                        double delta_min = 1e-4, double delta_max = 1e-1, double radius = 2.0,
                        std::uint64_t seed = 2024, bool include_origin = false);

enum class Verdict { bounded, growing };

/// Multi-scale seminorm probe: per-scale sup ratios, their max, and the
/// log-log slope; growing iff slope < -0.1.
struct SeminormReport {
  std::vector<double> per_scale_sup;
  double global_estimate = 0.0;
  double slope = 0.0;
  Verdict verdict = Verdict::bounded;
};

SeminormReport report_from_scales(const std::vector<double>& deltas,
                                  const std::vector<double>& sups);

/// sup over probes of |f(x + delta e) - f(x)| / delta^alpha, per scale.
SeminormReport holder_seminorm(const std::function<double(const Vec&)>& f, double alpha,
                               const ProbeSet& probes);

/// sup over probes of |f(x + 2 delta e) - 2 f(x + delta e) + f(x)| / delta, per scale.
SeminormReport zygmund_seminorm(const std::function<double(const Vec&)>& f,
                                const ProbeSet& probes);

/// Raw per-scale max tables of first and second differences (shared between
/// exponents so sharpness probes reuse the same field evaluations).
struct DifferenceTable {
  std::vector<double> deltas;
  std::vector<double> first_diff_sup;   // max |f(x+de) - f(x)|
  std::vector<double> second_diff_sup;  // max |f(x+2de) - 2f(x+de) + f(x)|
};

DifferenceTable difference_table(const std::function<double(const Vec&)>& f,
                                 const ProbeSet& probes);

SeminormReport holder_report_from_table(const DifferenceTable& tab, double alpha);
SeminormReport second_diff_report_from_table(const DifferenceTable& tab, double exponent);

/// Fit log |Lambda(t_i, s_i)| = log C - theta log(t_i - s_i).
struct ThetaFit {
  double theta_hat = 0.0;
  double log_c = 0.0;
  double residual = 0.0;
  std::vector<double> separations;
  std::vector<double> lambda_norms;
};

ThetaFit estimate_theta(const OperatorFamily& model,
                        const std::vector<std::pair<double, double>>& time_pairs);

/// Lower-bound fit: per separation the minimum of |Lambda| over jittered start
/// times, then the same log-log fit. Certifies optimality when
/// theta_low >= theta_star - 0.1.
struct ThetaLowerBound {
  double theta_low = 0.0;
  double log_c = 0.0;
  bool certified = false;
  double theta_star = 0.0;
};

ThetaLowerBound theta_optimality(const OperatorFamily& model,
                                 const std::vector<double>& separations,
                                 const std::vector<double>& start_jitters,
                                 double window_constant = 1.0);

/// Saturation-aware separations for Example-1 models: the sup over retained
/// modes tracks the infinite family only for t-s >= w / N^a.
std::vector<double> theta_separations(const OperatorFamily& model, double requested_min,
                                      double requested_max, int count,
                                      double window_constant = 1.0);

/// Smoothing-bound verification: R_n(t,s) = sup over probes of
/// |D^n P phi (h..)| / (|phi|_inf prod |h_j|) / |Lambda|^n, and the slope of
/// log R_n against log(t-s). Bounded iff |slope| <= 0.1.
struct SmoothingRow {
  int order = 0;
  std::string phi_label;
  double max_ratio = 0.0;
  double slope = 0.0;
  Verdict verdict = Verdict::bounded;
  std::vector<double> separations;
  std::vector<double> ratios;
};

std::vector<SmoothingRow> smoothing_suite(const OperatorFamily& model,
                                          const std::vector<FieldFunction>& phi_set, int n_max,
                                          const std::vector<std::pair<double, double>>& time_pairs,
                                          const std::vector<Vec>& probe_points,
                                          EstimateMethod method = EstimateMethod::automatic,
                                          const Budget& budget = {}, std::uint64_t seed = 5);

/// Holder-regularity verification of the mild solution: for
/// n = floor(alpha + 1/theta), probes [D^n u1(s,.)]_{C^{alpha + 1/theta - n}}
/// over an s-grid, plus a sharpness probe at exponent +0.2.
struct SchauderReport {
  int derivative_order = 0;       // n
  double exponent = 0.0;          // alpha + 1/theta - n
  std::vector<double> s_grid;
  std::vector<SeminormReport> per_s;            // at `exponent`
  std::vector<SeminormReport> per_s_sharpness;  // at exponent + 0.2
  double sup_over_s = 0.0;
  double data_norm = 1.0;   // |phi|_{C^{alpha+1/theta}} + |psi| norm proxy
  double ratio = 0.0;       // sup_over_s / data_norm
  bool all_bounded = false;
  bool sharpness_growing = false;
};

SchauderReport schauder_suite(const OperatorFamily& model, const FieldFunction& phi,
                              const SourceTerm& psi, double alpha, double t,
                              const std::vector<double>& s_grid, const ProbeSet& probes,
                              double theta_hat, int mesh_nodes = 512,
                              EstimateMethod method = EstimateMethod::automatic,
                              const Budget& budget = {}, std::uint64_t seed = 6);

/// Borderline (integer alpha + 1/theta) verification: [D^{k-1} u1]_{Z^1}
/// bounded, with the plain second-derivative proxy (same second differences
/// divided by delta^2) reported for contrast.
struct ZygmundReport {
  int k = 0;
  std::vector<double> s_grid;
  std::vector<SeminormReport> per_s_zygmund;
  std::vector<SeminormReport> per_s_proxy;
  double sup_over_s = 0.0;
  bool zygmund_bounded = false;
  bool proxy_growing = false;
};

ZygmundReport zygmund_suite(const OperatorFamily& model, const FieldFunction& phi,
                            const SourceTerm& psi, double alpha, double t,
                            const std::vector<double>& s_grid, const ProbeSet& probes,
                            double theta_hat, int mesh_nodes = 512,
                            EstimateMethod method = EstimateMethod::automatic,
                            const Budget& budget = {}, std::uint64_t seed = 7);

/// Near-integer routing threshold between the Holder and Zygmund suites.
inline constexpr double kIntegerRoutingWindow = 0.05;

/// Interpolation inequality check over a function family: single fitted C with
/// |psi|_{C^alpha} <= C |psi|_{C^{a1}}^{(a2-a)/(a2-a1)} |psi|_{C^{a2}}^{(a-a1)/(a2-a1)}.
struct InterpolationRow {
  std::string label;
  double norm_alpha1 = 0.0;
  double norm_alpha = 0.0;
  double norm_alpha2 = 0.0;
  double c_required = 0.0;
};

struct InterpolationReport {
  std::vector<InterpolationRow> rows;
  double c_fit = 0.0;
};

InterpolationReport interpolation_check(const std::vector<FieldFunction>& psi_set, double alpha1,
                                        double alpha, double alpha2, const ProbeSet& probes);

/// Probe-based C^alpha norm: sup-norm over probes plus the Holder seminorm
/// (alpha = 0 gives just the sup; alpha = 1 the Lipschitz seminorm).
double probe_holder_norm(const std::function<double(const Vec&)>& f, double alpha,
                         const ProbeSet& probes);

}  // namespace ouk
