#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ouk/operator_model.hpp"
#include "ouk/quadrature.hpp"
#include "ouk/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

using namespace ouk;

namespace {

// seeded dense test family: A(t) = A0 + sin(t) A1 with mild entries
OperatorFamily dense_test_model(int n, std::uint64_t seed) {
  Mat a0(n, n), a1(n, n);
  std::uint64_t c = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a0(i, j) = 0.4 * counter_normal(seed, 11, c++);
      a1(i, j) = 0.2 * counter_normal(seed, 12, c++);
    }
  a0.diagonal().array() -= 1.0;
  OperatorFamily m;
  m.dimension = n;
  m.horizon = 2.0;
  m.structure = OperatorStructure::dense;
  m.drift = [a0, a1](double t) { return a0 + std::sin(t) * a1; };
  m.diffusion = [n](double) { return Mat::Identity(n, n); };
  m.forcing = [n](double) { return Vec::Zero(n); };
  return m;
}

}  // namespace

TEST_CASE("scalar closed form: A == -1 gives U = exp(-(t-s))") {
  const auto m = make_scalar(-1.0, 1.0);
  const auto ev = evolve(m, 0.0, 1.0);
  CHECK(ev.entries(0, 0) == doctest::Approx(0.36787944117144233).epsilon(1e-12));
}

TEST_CASE("U(t,t) is the identity exactly") {
  const auto m = dense_test_model(3, 5);
  const auto ev = evolve(m, 0.7, 0.7);
  CHECK((ev.entries - Mat::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("diagonal evolve matches the per-mode quadrature value") {
  // alpha_k(t) = -k^2 (1 + 0.5 sin t): frozen from an independent scalar
  // quadrature of the mode-2 drift integral on [0, 0.5]
  Example1Params p;
  p.mode_count = 4;
  p.drift_exponent = 2.0;
  p.diffusion_decay = 0.0;
  p.drift_scale = 1.0;
  p.drift_scale_min = 0.5;
  p.modulation = 0.5;
  p.frequency = 1.0;
  auto m = make_example1(p);
  const auto ev = evolve(m, 0.0, 0.5);
  CHECK(ev.entries(1, 1) == doctest::Approx(0.10594503297367933).epsilon(1e-11));
  // entrywise agreement with per-mode adaptive quadrature
  for (int k = 1; k <= 4; ++k) {
    const double I = adaptive_integrate(
        [&](double t) { return m.diagonal->alpha(k, t); }, 0.0, 0.5, 1e-13);
    CHECK(ev.entries(k - 1, k - 1) == doctest::Approx(std::exp(I)).epsilon(1e-10));
  }
}

TEST_CASE("cocycle property holds on random dense models") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto m = dense_test_model(3, seed);
    const double tol = 1e-10;
    for (auto [s, r, t] : {std::array<double, 3>{0.1, 0.5, 1.1},
                           std::array<double, 3>{0.0, 0.9, 1.6},
                           std::array<double, 3>{0.3, 0.35, 0.5}}) {
      const Mat u_st = evolve(m, s, t, tol).entries;
      const Mat u_sr = evolve(m, s, r, tol).entries;
      const Mat u_rt = evolve(m, r, t, tol).entries;
      CHECK((u_st - u_rt * u_sr).norm() <= 10.0 * tol);
    }
  }
}

TEST_CASE("dense evolve matches the scalar closed form embedded diagonally") {
  OperatorFamily m;
  m.dimension = 2;
  m.horizon = 2.0;
  m.structure = OperatorStructure::dense;
  m.drift = [](double t) {
    Mat a = Mat::Zero(2, 2);
    a(0, 0) = -1.0;
    a(1, 1) = -2.0 * (1.0 + 0.25 * std::cos(t));
    return a;
  };
  m.diffusion = [](double) { return Mat::Identity(2, 2); };
  m.forcing = [](double) { return Vec::Zero(2); };
  const auto ev = evolve(m, 0.2, 1.4);
  CHECK(ev.entries(0, 0) == doctest::Approx(std::exp(-1.2)).epsilon(1e-9));
  const double I = adaptive_integrate(
      [](double t) { return -2.0 * (1.0 + 0.25 * std::cos(t)); }, 0.2, 1.4, 1e-13);
  CHECK(ev.entries(1, 1) == doctest::Approx(std::exp(I)).epsilon(1e-9));
  CHECK(std::abs(ev.entries(0, 1)) < 1e-9);
}

TEST_CASE("boundedness diagnostic |U(t,s)| <= M_emp over a grid") {
  const auto m = dense_test_model(3, 9);
  double m_emp = 0.0;
  for (double s = 0.0; s < 1.5; s += 0.3)
    for (double t = s; t <= 1.8; t += 0.3)
      m_emp = std::max(m_emp, evolve(m, s, t).entries.operatorNorm());
  CHECK(m_emp < 10.0);
  CHECK(m_emp >= 1.0);  // includes U(t,t) = I
}

TEST_CASE("make_example1 records the blow-up exponent") {
  Example1Params p;
  p.drift_exponent = 2.0;
  p.diffusion_decay = 1.0;
  CHECK(make_example1(p).diagonal->theta_star() == doctest::Approx(1.0));
  p.diffusion_decay = 0.0;
  CHECK(make_example1(p).diagonal->theta_star() == doctest::Approx(0.5));
  p.drift_exponent = 1.0;
  p.diffusion_decay = 1.0;
  CHECK(make_example1(p).diagonal->theta_star() == doctest::Approx(1.5));
}

TEST_CASE("example1 invariants: negative lambda_k, bounded beta, finite trace proxy") {
  Example1Params p;
  p.mode_count = 32;
  const auto m = make_example1(p);
  const auto& d = *m.diagonal;
  double lam_sup = -1e300;
  for (int k = 1; k <= d.mode_count; ++k) lam_sup = std::max(lam_sup, d.lambda_max(k, m.horizon));
  CHECK(lam_sup < 0.0);
  CHECK(m.sup_diffusion_norm() <= 1.0 + p.modulation + 1e-12);
  CHECK(std::isfinite(d.trace_proxy(m.horizon)));
  CHECK(d.trace_tail(16, m.horizon) < d.trace_tail(8, m.horizon));
}

TEST_CASE("invalid example1 parameters are rejected") {
  Example1Params p;
  p.drift_exponent = -1.0;
  CHECK_THROWS_AS(make_example1(p), Error);
  p = {};
  p.modulation = 1.5;
  CHECK_THROWS_AS(make_example1(p), Error);
  p = {};
  p.drift_scale_min = 2.0;  // c2 > c1
  CHECK_THROWS_AS(make_example1(p), Error);
  const auto m = make_example1(Example1Params{});
  CHECK_THROWS_AS(evolve(m, 0.5, 0.2), Error);     // s > t
  CHECK_THROWS_AS(evolve(m, 0.0, 100.0), Error);   // beyond horizon
}

TEST_CASE("model json: scalar, diagonal, dense with interpolated tables") {
  using nlohmann::json;
  const json scalar = {{"type", "scalar"}, {"N", 1}, {"T", 2.0},
                       {"params", {{"a", -1.0}, {"b", 1.0}}}};
  const auto ms = model_from_json(scalar);
  CHECK(evolve(ms, 0.0, 1.0).entries(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  const json diag = {{"type", "diagonal"}, {"N", 8}, {"T", 2.0},
                     {"params", {{"a", 2.0}, {"b", 1.0}, {"eps", 0.0}}}};
  const auto md = model_from_json(diag);
  CHECK(md.diagonal->mode_count == 8);
  CHECK(md.diagonal->theta_star() == doctest::Approx(1.0));

  // dense: A(t) linear in t between two samples; B constant
  const json dense = {
      {"type", "dense"}, {"N", 2}, {"T", 1.0}, {"grid", {0.0, 1.0}},
      {"A", {{{-1.0, 0.0}, {0.0, -1.0}}, {{-3.0, 0.0}, {0.0, -1.0}}}},
      {"B", {{{1.0, 0.0}, {0.0, 1.0}}, {{1.0, 0.0}, {0.0, 1.0}}}}};
  const auto mdense = model_from_json(dense);
  // A_00(t) = -1 - 2t  =>  int_0^1 = -2
  CHECK(evolve(mdense, 0.0, 1.0).entries(0, 0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-8));
  CHECK(evolve(mdense, 0.0, 1.0).entries(1, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));

  CHECK_THROWS_AS(model_from_json(json{{"type", "nope"}, {"N", 1}}), Error);
  CHECK_THROWS_AS(model_from_json(json{{"type", "scalar"}}), Error);  // missing N
}
