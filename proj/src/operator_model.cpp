#include "ouk/operator_model.hpp"

#include "ouk/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace ouk {

double DiagonalCoefficients::lambda_max(int k, double horizon, int grid) const {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid; ++i) best = std::max(best, alpha(k, horizon * i / grid));
  return best;
}

double DiagonalCoefficients::beta_sup(int k, double horizon, int grid) const {
  double best = 0.0;
  for (int i = 0; i <= grid; ++i) best = std::max(best, std::abs(beta(k, horizon * i / grid)));
  return best;
}

double DiagonalCoefficients::trace_proxy(double horizon) const {
  double s = 0.0;
  for (int k = 1; k <= mode_count; ++k) {
    const double lam = lambda_max(k, horizon);
    require(lam < 0, "trace_proxy: lambda_k must be negative for the default family");
    s += sqr(beta_sup(k, horizon)) / std::abs(lam);
  }
  return s;
}

double DiagonalCoefficients::trace_tail(int n_keep, double horizon) const {
  double s = 0.0;
  for (int k = n_keep + 1; k <= mode_count; ++k) {
    const double lam = lambda_max(k, horizon);
    if (lam >= 0) return std::numeric_limits<double>::infinity();
    s += sqr(beta_sup(k, horizon)) / (2.0 * std::abs(lam));
  }
  return s;
}

double OperatorFamily::sup_diffusion_norm(int grid) const {
  double best = 0.0;
  for (int i = 0; i <= grid; ++i) {
    const double t = horizon * i / grid;
    best = std::max(best, diffusion(t).operatorNorm());
  }
  return best;
}

double OperatorFamily::sup_forcing_norm(int grid) const {
  double best = 0.0;
  for (int i = 0; i <= grid; ++i) best = std::max(best, forcing(horizon * i / grid).norm());
  return best;
}

namespace {

Mat rk4_sweep(const OperatorFamily& model, double s, double t, int steps) {
  const int n = model.dimension;
  Mat u = Mat::Identity(n, n);
  const double h = (t - s) / steps;
  for (int i = 0; i < steps; ++i) {
    const double ti = s + i * h;
    const Mat k1 = model.drift(ti) * u;
    const Mat k2 = model.drift(ti + 0.5 * h) * (u + 0.5 * h * k1);
    const Mat k3 = model.drift(ti + 0.5 * h) * (u + 0.5 * h * k2);
    const Mat k4 = model.drift(ti + h) * (u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

}  // namespace

EvolutionMatrix evolve(const OperatorFamily& model, double s, double t, double tolerance) {
  require(0.0 <= s && s <= t && t <= model.horizon + 1e-12,
          "evolve: need 0 <= s <= t <= horizon");
  EvolutionMatrix ev;
  ev.s = s;
  ev.t = t;
  ev.integrator_tolerance = tolerance;
  const int n = model.dimension;
  if (t == s) {
    ev.entries = Mat::Identity(n, n);
    return ev;
  }
  const std::array<double, 3> key{s, t, tolerance};
  if (model.caches) {
    std::lock_guard<std::mutex> lock(model.caches->mu);
    const auto it = model.caches->evolution.find(key);
    if (it != model.caches->evolution.end()) {
      ev.entries = it->second;
      return ev;
    }
  }
  auto finish = [&](Mat u) {
    ev.entries = std::move(u);
    if (model.caches) {
      std::lock_guard<std::mutex> lock(model.caches->mu);
      model.caches->evolution.emplace(key, ev.entries);
    }
    return ev;
  };
  if (model.closed_form_u) {
    return finish((*model.closed_form_u)(s, t));
  }
  if (model.diagonal) {
    const auto& d = *model.diagonal;
    Mat u = Mat::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
      // tolerance 1e-12 relative to the drift-integral magnitude (absolute
      // 1e-12 is unreachable once the integral reaches the thousands)
      const double mag = (t - s) * (std::abs(d.alpha(k, s)) + std::abs(d.alpha(k, t)) +
                                    std::abs(d.alpha(k, 0.5 * (s + t)))) /
                         3.0;
      const double I = adaptive_integrate([&](double tau) { return d.alpha(k, tau); }, s, t,
                                          1e-12 * std::max(1.0, mag));
      u(k - 1, k - 1) = I < -745.0 ? 0.0 : std::exp(I);
    }
    return finish(std::move(u));
  }
  // Dense path: RK4, halving the global step until the cocycle defect at the
  // midpoint is below tolerance. The direct sweep runs at step h while the
  // composed sweep through the midpoint runs at h/2, so the defect tracks the
  // true error instead of cancelling; the finer composition is returned.
  const double r = 0.5 * (s + t);
  int steps = 16;
  const int max_steps = 1 << 22;
  double defect = std::numeric_limits<double>::infinity();
  while (steps <= max_steps) {
    const Mat u_st = rk4_sweep(model, s, t, steps);
    const Mat u_sr = rk4_sweep(model, s, r, steps);
    const Mat u_rt = rk4_sweep(model, r, t, steps);
    const Mat composed = u_rt * u_sr;
    defect = (u_st - composed).norm();
    if (defect <= tolerance) {
      return finish(composed);
    }
    steps *= 2;
  }
  throw Error("evolve: integrator did not converge; achieved cocycle defect " +
              std::to_string(defect));
}

OperatorFamily make_example1(const Example1Params& p) {
  require(p.drift_exponent > 0, "make_example1: a > 0");
  require(p.diffusion_decay >= 0, "make_example1: b >= 0");
  require(p.mode_count >= 1, "make_example1: N >= 1");
  require(p.drift_scale >= p.drift_scale_min && p.drift_scale_min > 0,
          "make_example1: c1 >= c2 > 0");
  require(p.modulation >= 0 && p.modulation < 1 && p.modulation < p.drift_scale,
          "make_example1: eps in [0,1) with eps < c1");
  require(p.frequency >= 0, "make_example1: omega >= 0");

  auto d = std::make_shared<DiagonalCoefficients>();
  d->mode_count = p.mode_count;
  d->drift_exponent = p.drift_exponent;
  d->diffusion_decay = p.diffusion_decay;
  d->drift_scale = p.drift_scale;
  d->drift_scale_min = p.drift_scale_min;
  d->modulation = p.modulation;
  d->frequency = p.frequency;
  const double a = p.drift_exponent, b = p.diffusion_decay;
  const double c1 = p.drift_scale, eps = p.modulation, w = p.frequency;
  d->alpha = [a, c1, eps, w](int k, double t) {
    return -std::pow(static_cast<double>(k), a) * (c1 + eps * std::sin(w * t));
  };
  d->beta = [b, eps, w](int k, double t) {
    return std::pow(static_cast<double>(k), -b) * (1.0 + eps * std::cos(w * t));
  };

  OperatorFamily m;
  m.dimension = p.mode_count;
  m.horizon = p.horizon;
  m.structure = p.mode_count == 1 ? OperatorStructure::scalar : OperatorStructure::diagonal;
  m.diagonal = d;
  m.label = "example1";
  m.drift = [d, n = p.mode_count](double t) {
    Mat a_t = Mat::Zero(n, n);
    for (int k = 1; k <= n; ++k) a_t(k - 1, k - 1) = d->alpha(k, t);
    return a_t;
  };
  m.diffusion = [d, n = p.mode_count](double t) {
    Mat b_t = Mat::Zero(n, n);
    for (int k = 1; k <= n; ++k) b_t(k - 1, k - 1) = d->beta(k, t);
    return b_t;
  };
  m.forcing = [n = p.mode_count](double) { return Vec::Zero(n); };
  return m;
}

OperatorFamily make_scalar(double a, double b, double f, double horizon) {
  OperatorFamily m;
  m.dimension = 1;
  m.horizon = horizon;
  m.structure = OperatorStructure::scalar;
  m.label = "scalar";
  m.drift = [a](double) { return Mat::Constant(1, 1, a); };
  m.diffusion = [b](double) { return Mat::Constant(1, 1, b); };
  m.forcing = [f](double) { return Vec::Constant(1, f); };
  m.closed_form_u = [a](double s, double t) { return Mat::Constant(1, 1, std::exp(a * (t - s))); };
  return m;
}

namespace {

// Piecewise-linear interpolation of matrices sampled on a time grid.
struct TableInterp {
  std::vector<double> grid;
  std::vector<Mat> values;
  Mat operator()(double t) const {
    if (t <= grid.front()) return values.front();
    if (t >= grid.back()) return values.back();
    const auto it = std::upper_bound(grid.begin(), grid.end(), t);
    const size_t i = static_cast<size_t>(it - grid.begin());
    const double w = (t - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return (1.0 - w) * values[i - 1] + w * values[i];
  }
};

Mat parse_matrix(const nlohmann::json& j, int n) {
  Mat m(n, n);
  require(j.is_array() && static_cast<int>(j.size()) == n, "model: bad matrix table row count");
  for (int r = 0; r < n; ++r) {
    require(j[r].is_array() && static_cast<int>(j[r].size()) == n, "model: bad matrix row");
    for (int c = 0; c < n; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

OperatorFamily model_from_json(const nlohmann::json& j) {
  require(j.is_object(), "model: expected object");
  require(j.contains("type"), "model: missing type");
  require(j.contains("N"), "model: missing N");
  const std::string type = j.at("type").get<std::string>();
  const int n = j.at("N").get<int>();
  require(n >= 1, "model: N >= 1");
  const double horizon = j.value("T", 2.0);
  require(horizon > 0, "model: T > 0");

  if (type == "scalar") {
    require(n == 1, "model: scalar type requires N = 1");
    const auto params = j.value("params", nlohmann::json::object());
    auto m = make_scalar(params.value("a", -1.0), params.value("b", 1.0), params.value("f", 0.0),
                         horizon);
    m.label = j.value("label", std::string("scalar"));
    return m;
  }
  if (type == "diagonal") {
    const auto params = j.value("params", nlohmann::json::object());
    Example1Params p;
    p.mode_count = n;
    p.horizon = horizon;
    p.drift_exponent = params.value("a", p.drift_exponent);
    p.diffusion_decay = params.value("b", p.diffusion_decay);
    p.drift_scale = params.value("c1", p.drift_scale);
    p.drift_scale_min = params.value("c2", p.drift_scale_min);
    p.modulation = params.value("eps", p.modulation);
    p.frequency = params.value("omega", p.frequency);
    auto m = make_example1(p);
    m.label = j.value("label", std::string("example1"));
    return m;
  }
  if (type == "dense") {
    require(j.contains("grid"), "model: dense type requires a time grid");
    auto grid = j.at("grid").get<std::vector<double>>();
    require(grid.size() >= 2 && std::is_sorted(grid.begin(), grid.end()),
            "model: grid must be sorted with >= 2 samples");
    auto a_tab = std::make_shared<TableInterp>();
    auto b_tab = std::make_shared<TableInterp>();
    a_tab->grid = grid;
    b_tab->grid = grid;
    require(j.contains("A") && j.contains("B"), "model: dense type requires A and B tables");
    require(j.at("A").size() == grid.size() && j.at("B").size() == grid.size(),
            "model: coefficient tables must match the grid");
    for (size_t i = 0; i < grid.size(); ++i) {
      a_tab->values.push_back(parse_matrix(j.at("A")[i], n));
      b_tab->values.push_back(parse_matrix(j.at("B")[i], n));
    }
    std::vector<Vec> f_vals;
    if (j.contains("f")) {
      require(j.at("f").size() == grid.size(), "model: forcing table must match the grid");
      for (size_t i = 0; i < grid.size(); ++i) {
        auto row = j.at("f")[i].get<std::vector<double>>();
        require(static_cast<int>(row.size()) == n, "model: bad forcing row");
        f_vals.push_back(Eigen::Map<const Vec>(row.data(), n));
      }
    } else {
      f_vals.assign(grid.size(), Vec::Zero(n));
    }
    auto f_tab = std::make_shared<TableInterp>();
    f_tab->grid = grid;
    for (const auto& v : f_vals) f_tab->values.push_back(v);

    OperatorFamily m;
    m.dimension = n;
    m.horizon = horizon;
    m.structure = OperatorStructure::dense;
    m.label = j.value("label", std::string("dense"));
    m.drift = [a_tab](double t) { return (*a_tab)(t); };
    m.diffusion = [b_tab](double t) { return (*b_tab)(t); };
    m.forcing = [f_tab](double t) { return Vec((*f_tab)(t).col(0)); };
    return m;
  }
  throw Error("model: unknown type '" + type + "'");
}

}  // namespace ouk
