#include "ouk/gaussian.hpp"

#include "ouk/parallel.hpp"
#include "ouk/quadrature.hpp"
#include "ouk/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>

namespace ouk {

Vec GaussianLaw::apply_pinv_sqrt(const Vec& y) const {
  const int n = static_cast<int>(spectrum.size());
  Vec c = eigvecs.transpose() * y;
  for (int i = 0; i < n; ++i) c(i) = spectrum(i) > 0.0 ? c(i) / std::sqrt(spectrum(i)) : 0.0;
  return eigvecs * c;
}

Mat GaussianLaw::retained_basis() const {
  const int n = static_cast<int>(spectrum.size());
  Mat v(n, effective_rank);
  int j = 0;
  for (int i = 0; i < n; ++i)
    if (spectrum(i) > 0.0) v.col(j++) = eigvecs.col(i);
  return v;
}

Vec GaussianLaw::retained_sqrt_spectrum() const {
  Vec out(effective_rank);
  int j = 0;
  for (int i = 0; i < spectrum.size(); ++i)
    if (spectrum(i) > 0.0) out(j++) = std::sqrt(spectrum(i));
  return out;
}

GaussianLaw psd_sqrt(const Mat& q, double clip_threshold) {
  const double qnorm = q.norm();
  require((q - q.transpose()).norm() <= 1e-12 * std::max(qnorm, 1e-300) || qnorm == 0.0,
          "psd_sqrt: input not symmetric within tolerance");
  const Mat qs = 0.5 * (q + q.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(qs);
  require(es.info() == Eigen::Success, "psd_sqrt: eigendecomposition failed");

  GaussianLaw law;
  law.mean = Vec::Zero(q.rows());
  law.covariance = qs;
  law.eigvecs = es.eigenvectors();
  Vec lam = es.eigenvalues();
  const double tr = lam.sum();
  require(lam.minCoeff() >= -1e-8 * std::max(tr, 1e-300),
          "psd_sqrt: significantly negative spectrum");
  const double cut = clip_threshold * std::max(lam.maxCoeff(), 0.0);
  int rank = 0;
  for (int i = 0; i < lam.size(); ++i) {
    if (lam(i) <= cut)
      lam(i) = 0.0;
    else
      ++rank;
  }
  law.spectrum = lam;
  law.effective_rank = rank;
  law.trace = lam.sum();
  law.clip_threshold = clip_threshold;
  law.sqrt_factor = law.eigvecs * lam.cwiseSqrt().asDiagonal() * law.eigvecs.transpose();
  return law;
}

namespace {

// Adaptive drift integral int_a^b alpha_k with a magnitude-aware tolerance:
// 1e-12 relative to the integral scale (an absolute 1e-12 is below machine
// precision once |integral| reaches the thousands).
double mode_drift_integral(const DiagonalCoefficients& d, int k, double a, double b) {
  if (a == b) return 0.0;
  const double mag =
      (b - a) *
      (std::abs(d.alpha(k, a)) + std::abs(d.alpha(k, 0.5 * (a + b))) + std::abs(d.alpha(k, b))) /
      3.0;
  const double tol = 1e-13 * std::max(1.0, mag);
  return adaptive_integrate([&](double tau) { return d.alpha(k, tau); }, a, b, tol);
}

double mode_alpha_max(const DiagonalCoefficients& d, int k, double s, double t, int grid = 256) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) best = std::max(best, d.alpha(k, s + (t - s) * i / grid));
  return best;
}

// Composite Gauss-Legendre of one diagonal mode's variance integrand,
// panels doubled until the mode value stabilizes at 1e-10 relative. Stiff
// modes concentrate near r = t, so the panel count is per mode, not global;
// nodes whose exponential factor provably underflows are skipped outright.
double diagonal_mode_variance_gl(const DiagonalCoefficients& d, int k, double s, double t,
                                 const Rule& rule) {
  const double alpha_bar = mode_alpha_max(d, k, s, t);
  auto integrand = [&](double r) {
    if (alpha_bar < 0.0 && 2.0 * alpha_bar * (t - r) < -745.0) return 0.0;
    const double e = mode_drift_integral(d, k, r, t);
    if (2.0 * e < -745.0) return 0.0;
    return std::exp(2.0 * e) * sqr(d.beta(k, r));
  };
  double prev = composite_gl(integrand, s, t, 1, rule);
  for (int panels = 2; panels <= 65536; panels *= 2) {
    const double cur = composite_gl(integrand, s, t, panels, rule);
    const bool done = std::abs(cur - prev) < 1e-10 * std::max(std::abs(cur), 1e-300);
    prev = cur;
    if (done) return cur;
  }
  throw Error("covariance: mode " + std::to_string(k) + " quadrature did not stabilize");
}

Mat covariance_matrix(const OperatorFamily& model, double s, double t, int quad_order) {
  const int n = model.dimension;
  if (t == s) return Mat::Zero(n, n);
  const Rule rule = gauss_legendre(quad_order);
  if (model.diagonal) {
    Mat q = Mat::Zero(n, n);
    for (int k = 1; k <= n; ++k)
      q(k - 1, k - 1) = diagonal_mode_variance_gl(*model.diagonal, k, s, t, rule);
    return q;
  }
  auto integrand = [&](double r) -> Mat {
    const Mat u = evolve(model, r, t).entries;
    const Mat b = model.diffusion(r);
    const Mat ub = u * b;
    return ub * ub.transpose();
  };
  auto run = [&](int panels) -> Mat {
    const double h = (t - s) / panels;
    Mat acc = Mat::Zero(n, n);
    for (int p = 0; p < panels; ++p) {
      const double lo = s + p * h;
      for (size_t i = 0; i < rule.nodes.size(); ++i)
        acc += (0.5 * h * rule.weights[i]) * integrand(lo + 0.5 * h * (rule.nodes[i] + 1.0));
    }
    return acc;
  };
  Mat q = run(1);
  double tr = q.trace();
  for (int panels = 2; panels <= 4096; panels *= 2) {
    const Mat q2 = run(panels);
    const double tr2 = q2.trace();
    const bool done = std::abs(tr2 - tr) < 1e-10 * std::max(std::abs(tr2), 1e-300);
    q = q2;
    tr = tr2;
    if (done) return q;
  }
  throw Error("covariance: quadrature did not stabilize");
}

}  // namespace

namespace {

// Per-model cache for laws and forcing integrals (hangs off ModelCaches).
struct GaussianCache {
  std::mutex mu;
  std::map<std::array<double, 4>, std::shared_ptr<const GaussianLaw>> laws;
  std::map<std::array<double, 3>, std::shared_ptr<const Vec>> forcing_integrals;
  int forcing_probe = -1;  // 0: forcing identically zero on probe grid, 1: active
};

GaussianCache* gaussian_cache(const OperatorFamily& model) {
  if (!model.caches) return nullptr;
  std::lock_guard<std::mutex> lock(model.caches->mu);
  if (!model.caches->gaussian)
    model.caches->gaussian = std::make_shared<GaussianCache>();
  return static_cast<GaussianCache*>(model.caches->gaussian.get());
}

}  // namespace

GaussianLaw covariance(const OperatorFamily& model, double s, double t, int quad_order,
                       double clip_threshold) {
  require(s <= t, "covariance: need s <= t");
  GaussianCache* cache = gaussian_cache(model);
  const std::array<double, 4> key{s, t, static_cast<double>(quad_order), clip_threshold};
  if (cache) {
    std::lock_guard<std::mutex> lock(cache->mu);
    const auto it = cache->laws.find(key);
    if (it != cache->laws.end()) return *it->second;
  }
  const Mat q = covariance_matrix(model, s, t, quad_order);
  auto law = std::make_shared<const GaussianLaw>(psd_sqrt(0.5 * (q + q.transpose()),
                                                          clip_threshold));
  if (cache) {
    std::lock_guard<std::mutex> lock(cache->mu);
    cache->laws.emplace(key, law);
  }
  return *law;
}

Vec mean_vector(const OperatorFamily& model, const Vec& x, double s, double t, int quad_order) {
  require(s <= t, "mean_vector: need s <= t");
  const int n = model.dimension;
  require(x.size() == n, "mean_vector: dimension mismatch");
  const Vec ux = evolve(model, s, t).entries * x;
  if (t == s) return ux;

  GaussianCache* cache = gaussian_cache(model);
  if (cache) {
    std::lock_guard<std::mutex> lock(cache->mu);
    if (cache->forcing_probe < 0) {
      double sup = 0.0;
      for (int i = 0; i <= 16; ++i)
        sup = std::max(sup, model.forcing(model.horizon * i / 16.0).norm());
      cache->forcing_probe = sup == 0.0 ? 0 : 1;
    }
    if (cache->forcing_probe == 0) return ux;
    const auto it = cache->forcing_integrals.find({s, t, static_cast<double>(quad_order)});
    if (it != cache->forcing_integrals.end()) return ux + *it->second;
  }

  const Rule rule = gauss_legendre(quad_order);
  auto run = [&](int panels) -> Vec {
    const double h = (t - s) / panels;
    Vec acc = Vec::Zero(n);
    for (int p = 0; p < panels; ++p) {
      const double lo = s + p * h;
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double r = lo + 0.5 * h * (rule.nodes[i] + 1.0);
        acc += (0.5 * h * rule.weights[i]) * (evolve(model, r, t).entries * model.forcing(r));
      }
    }
    return acc;
  };
  Vec g = run(1);
  for (int panels = 2; panels <= 4096; panels *= 2) {
    const Vec g2 = run(panels);
    const bool done = (g2 - g).norm() < 1e-10 * std::max(g2.norm(), 1e-300) ||
                      (g2.norm() == 0.0 && g.norm() == 0.0);
    g = g2;
    if (done) break;
  }
  if (cache) {
    std::lock_guard<std::mutex> lock(cache->mu);
    cache->forcing_integrals.emplace(std::array<double, 3>{s, t, static_cast<double>(quad_order)},
                                     std::make_shared<const Vec>(g));
  }
  return ux + g;
}

double diagonal_mode_variance_oracle(const DiagonalCoefficients& d, int k, double s, double t) {
  if (t == s) return 0.0;
  const double alpha_bar = mode_alpha_max(d, k, s, t);
  auto inner = [&](double sigma) {
    if (alpha_bar < 0.0 && 2.0 * alpha_bar * (t - sigma) < -745.0) return 0.0;
    const double drift_int = mode_drift_integral(d, k, sigma, t);
    if (2.0 * drift_int < -745.0) return 0.0;
    return std::exp(2.0 * drift_int) * sqr(d.beta(k, sigma));
  };
  // Tolerance scale: analytic floor (the integrand is alive on a window of
  // width ~ 1/(2|alpha_k|) next to t) combined with a cheap quadrature
  // pre-pass. The inner integrals carry ~1e-12 relative noise, so the outer
  // tolerance stays above it at 1e-11 of the scale.
  const double abar = std::abs(d.alpha(k, t)) + 1e-30;
  const double width = std::min(t - s, 1.0 / (2.0 * abar));
  double beta_loc = sqr(d.beta(k, t));
  for (int i = 0; i <= 8; ++i)
    beta_loc = std::max(beta_loc, 1e-4 * sqr(d.beta(k, s + (t - s) * i / 8.0)));
  const double floor = 0.1 * beta_loc * width;
  const double prepass = std::abs(composite_gl(inner, s, t, 64, gauss_legendre(4)));
  const double scale = std::max({floor, prepass, 1e-280});
  return adaptive_integrate(inner, s, t, 1e-11 * scale, 40);
}

SmoothingBundle smoothing_bundle(const OperatorFamily& model, double s, double t, int quad_order,
                                 double clip_threshold, double tau_range) {
  require(s < t, "smoothing_bundle: need s < t strictly");
  SmoothingBundle b;
  b.s = s;
  b.t = t;
  b.u = evolve(model, s, t);
  b.law = covariance(model, s, t, quad_order, clip_threshold);
  const int n = model.dimension;
  b.lambda = Mat(n, n);
  for (int j = 0; j < n; ++j) b.lambda.col(j) = b.law.apply_pinv_sqrt(b.u.entries.col(j));
  b.lambda_op_norm = b.lambda.jacobiSvd().singularValues()(0);
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const Vec rhs = b.u.entries.col(j);
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) continue;
    const double res = (b.law.sqrt_factor * b.lambda.col(j) - rhs).norm() / rhs_norm;
    worst = std::max(worst, res);
  }
  b.range_residual = worst;
  b.degenerate = worst > tau_range;
  return b;
}

Mat sample(const GaussianLaw& law, std::int64_t count, std::uint64_t seed) {
  require(count >= 1, "sample: count >= 1");
  const int n = static_cast<int>(law.mean.size());
  Mat out(count, n);
  run_chunks(count, kDefaultChunk, [&](std::int64_t, std::int64_t b, std::int64_t e) {
    Vec z(n);
    for (std::int64_t i = b; i < e; ++i) {
      for (int j = 0; j < n; ++j)
        z(j) = counter_normal(seed, 0, static_cast<std::uint64_t>(i) * n + j);
      out.row(i) = (law.mean + law.sqrt_factor * z).transpose();
    }
  });
  return out;
}

double cm_weight(const SmoothingBundle& bundle, const Vec& shift_direction, double scale,
                 const Vec& y) {
  require(!bundle.degenerate, "cm_weight: degenerate bundle");
  const Vec lh = bundle.lambda * shift_direction;
  const Vec qy = bundle.law.apply_pinv_sqrt(y);
  return std::exp(-0.5 * sqr(scale) * lh.squaredNorm() + scale * lh.dot(qy));
}

std::vector<std::pair<int, double>> trace_truncation_curve(const OperatorFamily& model, double s,
                                                           double t,
                                                           const std::vector<int>& truncations,
                                                           int quad_order) {
  require(!truncations.empty(), "trace_truncation_curve: empty truncation list");
  for (size_t i = 1; i < truncations.size(); ++i)
    require(truncations[i] > truncations[i - 1], "trace_truncation_curve: must be increasing");
  require(truncations.back() <= model.dimension,
          "trace_truncation_curve: truncation exceeds dimension");
  const Mat q = covariance(model, s, t, quad_order).covariance;
  std::vector<std::pair<int, double>> curve;
  curve.reserve(truncations.size());
  for (int m : truncations) curve.emplace_back(m, q.topLeftCorner(m, m).trace());
  return curve;
}

}  // namespace ouk
