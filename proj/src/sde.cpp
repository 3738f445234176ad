#include "ouk/sde.hpp"

#include "ouk/gaussian.hpp"
#include "ouk/parallel.hpp"
#include "ouk/rng.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace ouk {

PathEnsemble simulate(const OperatorFamily& model, const Vec& x, double s, double t, double dt,
                      std::int64_t path_count, std::uint64_t seed) {
  require(dt > 0.0, "simulate: dt > 0");
  require(path_count >= 1, "simulate: pathCount >= 1");
  const double span = t - s;
  const std::int64_t steps = static_cast<std::int64_t>(std::llround(span / dt));
  require(steps >= 1 && std::abs(steps * dt - span) <= 1e-12 * std::max(1.0, span),
          "simulate: dt must divide t - s");
  const int n = model.dimension;
  require(x.size() == n, "simulate: dimension mismatch");

  // coefficients sampled once per step, shared across paths
  std::vector<Mat> a_k(steps), b_k(steps);
  std::vector<Vec> f_k(steps);
  for (std::int64_t k = 0; k < steps; ++k) {
    const double tk = s + k * dt;
    a_k[k] = model.drift(tk);
    b_k[k] = model.diffusion(tk);
    f_k[k] = model.forcing(tk);
  }
  const double root_dt = std::sqrt(dt);

  PathEnsemble ens;
  ens.start_time = s;
  ens.end_time = t;
  ens.step = dt;
  ens.path_count = path_count;
  ens.seed = seed;
  ens.terminal.resize(path_count, n);
  run_chunks(path_count, 1024, [&](std::int64_t, std::int64_t b, std::int64_t e) {
    Vec state(n), noise(n);
    for (std::int64_t p = b; p < e; ++p) {
      state = x;
      for (std::int64_t k = 0; k < steps; ++k) {
        const std::uint64_t base = (static_cast<std::uint64_t>(p) * steps + k) * n;
        for (int j = 0; j < n; ++j) noise(j) = counter_normal(seed, 3, base + j);
        state += dt * (a_k[k] * state + f_k[k]) + root_dt * (b_k[k] * noise);
      }
      ens.terminal.row(p) = state.transpose();
    }
  });
  return ens;
}

namespace {

struct Moments {
  Vec mean;
  Mat cov;
};

Moments ensemble_moments(const Mat& rows) {
  Moments m;
  const std::int64_t n = rows.rows();
  m.mean = rows.colwise().mean().transpose();
  Mat centered = rows.rowwise() - m.mean.transpose();
  m.cov = centered.transpose() * centered / static_cast<double>(n - 1);
  return m;
}

}  // namespace

LawCheck law_check(const PathEnsemble& ensemble, const OperatorFamily& model, const Vec& x,
                   double z_threshold) {
  const int n = static_cast<int>(ensemble.terminal.cols());
  const std::int64_t paths = ensemble.path_count;
  const Moments emp = ensemble_moments(ensemble.terminal);

  const Vec m_exact = mean_vector(model, x, ensemble.start_time, ensemble.end_time);
  const Mat q_exact =
      covariance(model, ensemble.start_time, ensemble.end_time).covariance;

  // Companion run at dt/2 for the weak-bias allowance (first-order Euler:
  // bias ~ 2 |stat(dt) - stat(dt/2)|).
  const PathEnsemble half = simulate(model, x, ensemble.start_time, ensemble.end_time,
                                     0.5 * ensemble.step, paths, ensemble.seed + 1);
  const Moments emp_half = ensemble_moments(half.terminal);

  LawCheck out;
  out.mean_z.resize(n);
  out.cov_z.resize(n, n);
  out.mean_bias = 2.0 * (emp.mean - emp_half.mean).cwiseAbs();
  out.cov_bias = 2.0 * (emp.cov - emp_half.cov).cwiseAbs();

  for (int i = 0; i < n; ++i) {
    const double se = std::sqrt(std::max(q_exact(i, i), 1e-300) / paths);
    const double excess =
        std::max(0.0, std::abs(emp.mean(i) - m_exact(i)) - out.mean_bias(i));
    out.mean_z(i) = excess / se;
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double var_entry = q_exact(i, i) * q_exact(j, j) + sqr(q_exact(i, j));
      const double se = std::sqrt(std::max(var_entry, 1e-300) / paths);
      const double excess =
          std::max(0.0, std::abs(emp.cov(i, j) - q_exact(i, j)) - out.cov_bias(i, j));
      out.cov_z(i, j) = excess / se;
    }
  }
  out.max_mean_z = out.mean_z.maxCoeff();
  out.max_cov_z = out.cov_z.maxCoeff();
  out.pass = out.max_mean_z <= z_threshold && out.max_cov_z <= z_threshold;
  return out;
}

WeakCheck weak_check(const PathEnsemble& ensemble, const FieldFunction& phi,
                     const OperatorFamily& model, double s, double t, const Vec& x,
                     EstimateMethod method, const Budget& budget, double z_threshold) {
  require(std::abs(ensemble.start_time - s) < 1e-12 && std::abs(ensemble.end_time - t) < 1e-12,
          "weak_check: ensemble does not match (s,t)");
  WeakCheck out;
  const std::int64_t paths = ensemble.path_count;
  const auto ms = chunked_mean(paths, [&](std::int64_t i) {
    return phi.value(ensemble.terminal.row(i).transpose());
  });
  out.ensemble_mean = ms.mean;
  out.ensemble_stderr = ms.stderr_;

  const PathEnsemble half =
      simulate(model, x, s, t, 0.5 * ensemble.step, paths, ensemble.seed + 1);
  const auto ms_half = chunked_mean(paths, [&](std::int64_t i) {
    return phi.value(half.terminal.row(i).transpose());
  });
  out.bias_allowance = 2.0 * std::abs(ms.mean - ms_half.mean);

  const MCEstimate pe = apply_P(model, phi, s, t, x, method, budget, ensemble.seed + 2);
  out.transition_value = pe.value;
  out.transition_stderr = pe.stderr_;
  out.difference = std::abs(out.ensemble_mean - out.transition_value);
  const double combined =
      std::sqrt(sqr(out.ensemble_stderr) + sqr(out.transition_stderr));
  out.pass = out.difference <= z_threshold * combined + out.bias_allowance;
  return out;
}

void save_ensemble(const PathEnsemble& ensemble, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), "save_ensemble: cannot open " + path);
  const std::uint64_t n = static_cast<std::uint64_t>(ensemble.terminal.cols());
  const std::uint64_t paths = static_cast<std::uint64_t>(ensemble.path_count);
  f.write(reinterpret_cast<const char*>(&n), 8);
  f.write(reinterpret_cast<const char*>(&paths), 8);
  f.write(reinterpret_cast<const char*>(&ensemble.step), 8);
  std::vector<double> row(n);
  for (std::int64_t p = 0; p < ensemble.path_count; ++p) {
    for (std::uint64_t j = 0; j < n; ++j) row[j] = ensemble.terminal(p, j);
    f.write(reinterpret_cast<const char*>(row.data()), 8 * n);
  }
  require(f.good(), "save_ensemble: write failed");
}

PathEnsemble load_ensemble(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(f.good(), "load_ensemble: cannot open " + path);
  std::uint64_t n = 0, paths = 0;
  double dt = 0.0;
  f.read(reinterpret_cast<char*>(&n), 8);
  f.read(reinterpret_cast<char*>(&paths), 8);
  f.read(reinterpret_cast<char*>(&dt), 8);
  require(f.good() && n >= 1 && paths >= 1, "load_ensemble: bad header");
  PathEnsemble ens;
  ens.step = dt;
  ens.path_count = static_cast<std::int64_t>(paths);
  ens.terminal.resize(paths, n);
  std::vector<double> row(n);
  for (std::uint64_t p = 0; p < paths; ++p) {
    f.read(reinterpret_cast<char*>(row.data()), 8 * n);
    for (std::uint64_t j = 0; j < n; ++j) ens.terminal(p, j) = row[j];
  }
  require(f.good(), "load_ensemble: truncated file");
  return ens;
}

}  // namespace ouk
