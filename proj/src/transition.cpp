#include "ouk/transition.hpp"

#include "ouk/parallel.hpp"
#include "ouk/quadrature.hpp"
#include "ouk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace ouk {

namespace {

void enumerate_rec(std::vector<int>& free_idx, std::vector<std::pair<int, int>>& pairs,
                   std::vector<int>& leftover, std::vector<PartialMatching>& out) {
  if (free_idx.empty()) {
    PartialMatching m;
    m.pairs = pairs;
    m.leftover = leftover;
    std::sort(m.leftover.begin(), m.leftover.end());
    out.push_back(std::move(m));
    return;
  }
  const int a = free_idx.front();
  std::vector<int> rest(free_idx.begin() + 1, free_idx.end());
  // a stays unpaired
  leftover.push_back(a);
  enumerate_rec(rest, pairs, leftover, out);
  leftover.pop_back();
  // a pairs with each later index
  for (size_t j = 0; j < rest.size(); ++j) {
    std::vector<int> rest2;
    rest2.reserve(rest.size() - 1);
    for (size_t i = 0; i < rest.size(); ++i)
      if (i != j) rest2.push_back(rest[i]);
    pairs.emplace_back(a, rest[j]);
    enumerate_rec(rest2, pairs, leftover, out);
    pairs.pop_back();
  }
}

}  // namespace

std::vector<PartialMatching> enumerate_partial_matchings(int n, int pair_count) {
  require(n >= 0, "enumerate_partial_matchings: n >= 0");
  const int r_n = n / 2;
  require(pair_count >= 0 && pair_count <= r_n,
          "enumerate_partial_matchings: pair count exceeds r_n");
  std::vector<PartialMatching> filtered;
  for (const auto& m : all_partial_matchings(n))
    if (static_cast<int>(m.pairs.size()) == pair_count) filtered.push_back(m);
  return filtered;
}

const std::vector<PartialMatching>& all_partial_matchings(int n) {
  require(n >= 0 && n <= 12, "all_partial_matchings: n out of cached range");
  static std::map<int, std::vector<PartialMatching>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    std::vector<PartialMatching> out;
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> leftover;
    enumerate_rec(idx, pairs, leftover, out);
    it = cache.emplace(n, std::move(out)).first;
  }
  return it->second;
}

namespace {

// Precomputed pieces of I_n for one bundle and direction set.
struct WeightData {
  Mat what;  // column i: V_r^T Lambda h_i  (so w_i = what_i . zeta)
  Mat gram;  // g_ij = <Lambda h_i, Lambda h_j>
  int n = 0;

  double eval(const Vec& zeta) const {
    Vec w = what.transpose() * zeta;
    double total = 0.0;
    for (const auto& m : all_partial_matchings(n)) {
      double term = (m.pairs.size() % 2 == 0) ? 1.0 : -1.0;
      for (const auto& [i, j] : m.pairs) term *= gram(i, j);
      for (int i : m.leftover) term *= w(i);
      total += term;
    }
    return total;
  }

  // Wick-style magnitude bound of E|I_n|: tolerance scale for the quadrature.
  double magnitude() const {
    double total = 0.0;
    for (const auto& m : all_partial_matchings(n)) {
      double term = 1.0;
      for (const auto& [i, j] : m.pairs) term *= std::abs(gram(i, j));
      for (int i : m.leftover) term *= what.col(i).norm();
      total += term;
    }
    return std::max(total, 1e-300);
  }
};

WeightData make_weight_data(const SmoothingBundle& bundle, const std::vector<Vec>& dirs) {
  const int n = static_cast<int>(dirs.size());
  require(n >= 1 && n <= kMaxWeightOrder, "weight order capped at " +
                                              std::to_string(kMaxWeightOrder));
  require(!bundle.degenerate, "degenerate smoothing bundle (range condition failed)");
  WeightData d;
  d.n = n;
  const Mat vr = bundle.law.retained_basis();
  d.what.resize(vr.cols(), n);
  Mat lam_h(bundle.lambda.rows(), n);
  for (int i = 0; i < n; ++i) {
    lam_h.col(i) = bundle.lambda * dirs[i];
    d.what.col(i) = vr.transpose() * lam_h.col(i);
  }
  d.gram = lam_h.transpose() * lam_h;
  return d;
}

// Tensor Gauss-Hermite refinement ladder (points per axis).
constexpr int kAxisOrders[] = {8, 12, 17, 24, 34, 48};

double tensor_pass(const GaussianLaw& law, const std::function<double(const Vec&, const Vec&)>& f,
                   int order) {
  const int r = law.effective_rank;
  const Rule rule = gauss_hermite_prob(order);
  const Mat vr = law.retained_basis();
  const Vec sq = law.retained_sqrt_spectrum();
  Vec zeta(r);
  std::vector<int> idx(r, 0);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (int a = 0; a < r; ++a) {
      zeta(a) = rule.nodes[idx[a]];
      w *= rule.weights[idx[a]];
    }
    const Vec y = vr * sq.cwiseProduct(zeta).eval();
    total += w * f(y, zeta);
    int a = 0;
    for (; a < r; ++a) {
      if (++idx[a] < order) break;
      idx[a] = 0;
    }
    if (a == r) break;
  }
  return total;
}

// 1-D path: adaptive quadrature in the retained coordinate handles kinks that
// defeat fixed Gauss-Hermite grids. scale_hint (when positive) supplies the
// magnitude used for the relative tolerance; otherwise a coarse Gauss-Hermite
// pass estimates it.
MCEstimate line_quadrature(const GaussianLaw& law,
                           const std::function<double(const Vec&, const Vec&)>& f,
                           double rel_tol, double scale_hint) {
  const Mat vr = law.retained_basis();
  const Vec sq = law.retained_sqrt_spectrum();
  MCEstimate e;
  e.method = EstimateMethod::tensorQuadrature;
  // cheap Gauss-Hermite ladder first; integrands that are smooth inside the
  // effective range converge here and skip the adaptive pass entirely
  double prev = tensor_pass(law, f, 8);
  const double scale = std::max(scale_hint, 1.0);
  for (int order : {12, 17, 24}) {
    const double cur = tensor_pass(law, f, order);
    const double delta = std::abs(cur - prev);
    prev = cur;
    if (delta <= rel_tol * std::max(scale, std::abs(cur))) {
      e.value = cur;
      e.stderr_ = delta;
      return e;
    }
  }
  Vec zeta(1), y(vr.rows());
  auto g = [&](double z) {
    zeta(0) = z;
    y.noalias() = vr * (sq(0) * z);
    return f(y, zeta) * std::exp(-0.5 * z * z) * 0.3989422804014326779399461;
  };
  const double tol = rel_tol * std::max(scale, std::abs(prev));
  const double val = adaptive_integrate(g, -9.0, 9.0, tol);
  e.value = val;
  e.stderr_ = tol;
  return e;
}

MCEstimate gaussian_expectation_impl(const GaussianLaw& law,
                                     const std::function<double(const Vec&, const Vec&)>& f,
                                     EstimateMethod method, const Budget& budget,
                                     std::uint64_t seed, double scale_hint) {
  const int r = law.effective_rank;
  if (r == 0) {
    // Dirac at the mean-zero point.
    MCEstimate e;
    e.value = f(Vec::Zero(law.mean.size()), Vec::Zero(0));
    e.method = EstimateMethod::tensorQuadrature;
    return e;
  }
  const bool tensor = method == EstimateMethod::tensorQuadrature ||
                      (method == EstimateMethod::automatic && r <= 6);
  if (tensor) {
    require(r <= 8, "tensor quadrature limited to rank <= 8");
    if (r == 1)
      return line_quadrature(law, f, budget.tolerance > 0.0 ? budget.tolerance : 1e-10,
                             scale_hint);
    const double rel = budget.tolerance > 0.0 ? budget.tolerance : 1e-9;
    MCEstimate e;
    e.method = EstimateMethod::tensorQuadrature;
    double prev = tensor_pass(law, f, kAxisOrders[0]);
    for (size_t i = 1; i < std::size(kAxisOrders); ++i) {
      if (std::pow(static_cast<double>(kAxisOrders[i]), r) > 6.0e6) break;
      const double cur = tensor_pass(law, f, kAxisOrders[i]);
      e.stderr_ = std::abs(cur - prev);
      prev = cur;
      if (e.stderr_ < rel * std::max(std::max(1.0, scale_hint), std::abs(cur))) break;
    }
    e.value = prev;
    return e;
  }
  // Monte Carlo over the retained coordinates.
  const std::int64_t n = std::min(budget.max_samples, std::max<std::int64_t>(budget.samples, 16));
  const Mat vr = law.retained_basis();
  const Vec sq = law.retained_sqrt_spectrum();
  const auto ms = chunked_mean(n, [&](std::int64_t i) {
    Vec zeta(r);
    for (int a = 0; a < r; ++a)
      zeta(a) = counter_normal(seed, 17, static_cast<std::uint64_t>(i) * r + a);
    const Vec y = vr * sq.cwiseProduct(zeta).eval();
    return f(y, zeta);
  });
  MCEstimate e;
  e.value = ms.mean;
  e.stderr_ = ms.stderr_;
  e.sample_count = n;
  e.method = EstimateMethod::monteCarlo;
  e.seed = seed;
  return e;
}

}  // namespace

MCEstimate gaussian_expectation(const GaussianLaw& law,
                                const std::function<double(const Vec&, const Vec&)>& f,
                                EstimateMethod method, const Budget& budget, std::uint64_t seed) {
  return gaussian_expectation_impl(law, f, method, budget, seed, 0.0);
}

double weight_I_n(const SmoothingBundle& bundle, const Vec& y, const std::vector<Vec>& dirs) {
  const WeightData d = make_weight_data(bundle, dirs);
  const Vec zeta = bundle.law.retained_basis().transpose() * bundle.law.apply_pinv_sqrt(y);
  // zeta here equals V_r^T Q^{-1/2} y, consistent with w_i = <Lambda h_i, Q^{-1/2}y>.
  return d.eval(zeta);
}

MCEstimate apply_P(const OperatorFamily& model, const FieldFunction& phi, double s, double t,
                   const Vec& x, EstimateMethod method, const Budget& budget,
                   std::uint64_t seed) {
  require(s <= t, "apply_P: need s <= t");
  if (s == t) {
    MCEstimate e;
    e.value = phi.value(x);
    e.method = EstimateMethod::tensorQuadrature;
    return e;
  }
  const GaussianLaw law = covariance(model, s, t);
  const Vec m = mean_vector(model, x, s, t);
  return gaussian_expectation(
      law, [&](const Vec& y, const Vec&) { return phi.value(m + y); }, method, budget, seed);
}

MCEstimate derivative_P(const OperatorFamily& model, const SmoothingBundle& bundle,
                        const FieldFunction& phi, const Vec& x, const std::vector<Vec>& dirs,
                        EstimateMethod method, const Budget& budget, std::uint64_t seed) {
  require(bundle.t > bundle.s, "derivative_P: need s < t strictly");
  const WeightData d = make_weight_data(bundle, dirs);
  const Vec m = mean_vector(model, x, bundle.s, bundle.t);
  Budget b = budget;
  const bool mc = method == EstimateMethod::monteCarlo ||
                  (method == EstimateMethod::automatic && bundle.law.effective_rank > 6);
  if (mc && b.tolerance > 0.0) {
    // Weight variance grows like |Lambda|^{2n}; scale the sample count toward
    // the requested stderr, capped by max_samples.
    double scale = 1.0;
    for (size_t i = 0; i < dirs.size(); ++i)
      scale *= bundle.lambda_op_norm * dirs[i].norm();
    const double want = sqr(scale / b.tolerance);
    b.samples = std::min<double>(static_cast<double>(b.max_samples),
                                 std::max<double>(b.samples, want));
  }
  const double scale_hint = phi.sup_norm.value_or(1.0) * d.magnitude();
  return gaussian_expectation_impl(
      bundle.law, [&](const Vec& y, const Vec& zeta) { return phi.value(m + y) * d.eval(zeta); },
      method, b, seed, scale_hint);
}

MCEstimate derivative_P(const OperatorFamily& model, const FieldFunction& phi, double s, double t,
                        const Vec& x, const std::vector<Vec>& dirs, EstimateMethod method,
                        const Budget& budget, std::uint64_t seed) {
  const SmoothingBundle bundle = smoothing_bundle(model, s, t);
  return derivative_P(model, bundle, phi, x, dirs, method, budget, seed);
}

MCEstimate derivative_P_transfer(const OperatorFamily& model, const FieldFunction& phi, double s,
                                 double t, const Vec& x, const std::vector<Vec>& dirs,
                                 EstimateMethod method, const Budget& budget,
                                 std::uint64_t seed) {
  require(s <= t, "derivative_P_transfer: need s <= t");
  const int k = static_cast<int>(dirs.size());
  require(phi.derivative && phi.derivative_order >= k,
          "derivative_P_transfer: phi lacks analytic derivatives of order " + std::to_string(k));
  const Mat u = evolve(model, s, t).entries;
  std::vector<Vec> udirs(dirs.size());
  for (size_t i = 0; i < dirs.size(); ++i) udirs[i] = u * dirs[i];
  FieldFunction transferred;
  transferred.label = phi.label + ".transfer";
  transferred.declared = FieldClass::Bb;
  transferred.value = [&phi, udirs](const Vec& y) { return phi.deriv(y, udirs); };
  return apply_P(model, transferred, s, t, x, method, budget, seed);
}

std::function<MCEstimate(const Vec&)> derivative_P_evaluator(
    const OperatorFamily& model, const SmoothingBundle& bundle, const FieldFunction& phi,
    std::vector<Vec> dirs, EstimateMethod method, const Budget& budget, std::uint64_t seed) {
  require(bundle.t > bundle.s, "derivative_P_evaluator: need s < t strictly");
  auto shared_bundle = std::make_shared<const SmoothingBundle>(bundle);
  auto weights = std::make_shared<const WeightData>(make_weight_data(*shared_bundle, dirs));
  auto shared_phi = std::make_shared<const FieldFunction>(phi);
  const double scale_hint = phi.sup_norm.value_or(1.0) * weights->magnitude();
  return [&model, shared_bundle, weights, shared_phi, method, budget, seed,
          scale_hint](const Vec& x) {
    const Vec m = mean_vector(model, x, shared_bundle->s, shared_bundle->t);
    return gaussian_expectation_impl(
        shared_bundle->law,
        [&](const Vec& y, const Vec& zeta) {
          return shared_phi->value(m + y) * weights->eval(zeta);
        },
        method, budget, seed, scale_hint);
  };
}

MCEstimate derivative_P_mixed(const OperatorFamily& model, const FieldFunction& phi, double s,
                              double t, const Vec& x, const std::vector<Vec>& dirs, int k,
                              EstimateMethod method, const Budget& budget, std::uint64_t seed) {
  const int total = static_cast<int>(dirs.size());
  require(k >= 0 && k <= total, "derivative_P_mixed: invalid split");
  const int n = total - k;
  if (n == 0) return derivative_P_transfer(model, phi, s, t, x, dirs, method, budget, seed);
  require(s < t, "derivative_P_mixed: need s < t strictly when n >= 1");
  if (k == 0) return derivative_P(model, phi, s, t, x, dirs, method, budget, seed);
  require(phi.derivative && phi.derivative_order >= k,
          "derivative_P_mixed: phi lacks analytic derivatives of order " + std::to_string(k));
  const SmoothingBundle bundle = smoothing_bundle(model, s, t);
  std::vector<Vec> udirs(dirs.begin(), dirs.begin() + k);
  for (auto& h : udirs) h = bundle.u.entries * h;
  std::vector<Vec> wdirs(dirs.begin() + k, dirs.end());
  const WeightData d = make_weight_data(bundle, wdirs);
  const Vec m = mean_vector(model, x, s, t);
  return gaussian_expectation(
      bundle.law,
      [&](const Vec& y, const Vec& zeta) { return phi.deriv(m + y, udirs) * d.eval(zeta); },
      method, budget, seed);
}

}  // namespace ouk
