#include "ouk/quadrature.hpp"
#include <limits>

#include <Eigen/Eigenvalues>

#include <cmath>

namespace ouk {

namespace {

// Gauss-Kronrod 7-15 pair on [-1,1] (nodes symmetric about 0).
constexpr double kKronrodNodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kKronrodWeights[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kGaussWeights[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct PanelResult {
  double kronrod;
  double err;
  double resabs;  // h * sum w |f|: the round-off resolution scale
};

PanelResult gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fk[15];
  for (int i = 0; i < 7; ++i) {
    fk[i] = f(c - h * kKronrodNodes[i]);
    fk[14 - i] = f(c + h * kKronrodNodes[i]);
  }
  fk[7] = f(c);
  double kron = 0.0, resabs = 0.0;
  for (int i = 0; i < 7; ++i) {
    kron += kKronrodWeights[i] * (fk[i] + fk[14 - i]);
    resabs += kKronrodWeights[i] * (std::abs(fk[i]) + std::abs(fk[14 - i]));
  }
  kron += kKronrodWeights[7] * fk[7];
  resabs += kKronrodWeights[7] * std::abs(fk[7]);
  kron *= h;
  resabs *= std::abs(h);
  // embedded 7-point Gauss uses the odd Kronrod nodes
  double gauss = 0.0;
  for (int i = 0; i < 3; ++i) gauss += kGaussWeights[i] * (fk[2 * i + 1] + fk[13 - 2 * i]);
  gauss += kGaussWeights[3] * fk[7];
  gauss *= h;
  return {kron, std::abs(kron - gauss), resabs};
}

double adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
  const PanelResult r = gk15(f, a, b);
  // accept at the requested tolerance or at the round-off resolution of the
  // panel; splitting further cannot improve on either
  const double floor_tol = 50.0 * std::numeric_limits<double>::epsilon() * r.resabs;
  if (r.err <= std::max(tol, floor_tol) || depth <= 0) return r.kronrod;
  const double c = 0.5 * (a + b);
  if (c <= a || c >= b) return r.kronrod;  // interval at machine resolution
  return adapt(f, a, c, 0.5 * tol, depth - 1) + adapt(f, c, b, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_integrate(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  return adapt(f, a, b, abs_tol, max_depth);
}

Rule gauss_legendre(int n) {
  require(n >= 1, "gauss_legendre: n >= 1");
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  // Newton iteration on Legendre polynomials, Chebyshev initial guesses.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  return r;
}

Rule gauss_hermite_prob(int n) {
  require(n >= 1, "gauss_hermite_prob: n >= 1");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite recurrence.
  Mat J = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = std::sqrt(static_cast<double>(k));
    J(k, k - 1) = off;
    J(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = es.eigenvalues()(i);
    r.weights[i] = sqr(es.eigenvectors()(0, i));
  }
  return r;
}

double composite_gl(const std::function<double(double)>& f, double a, double b, int panels,
                    const Rule& rule) {
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * h;
    double s = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i)
      s += rule.weights[i] * f(lo + 0.5 * h * (rule.nodes[i] + 1.0));
    total += 0.5 * h * s;
  }
  return total;
}

}  // namespace ouk
