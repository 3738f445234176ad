#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ouk/regularity.hpp"

#include <cmath>

using namespace ouk;

TEST_CASE("probe sets: unit directions, log-spaced increasing scales, ball-bounded bases") {
  const ProbeSet p = make_probe_set(3, 10, 8, 9, 1e-4, 1e-1, 2.0, 7);
  CHECK(p.base_points.size() == 10);
  CHECK(p.directions.size() == 8);
  CHECK(p.deltas.size() == 9);
  for (const auto& e : p.directions) CHECK(std::abs(e.norm() - 1.0) < 1e-12);
  for (const auto& x : p.base_points) CHECK(x.norm() <= 2.0 + 1e-12);
  for (size_t i = 1; i < p.deltas.size(); ++i) CHECK(p.deltas[i] > p.deltas[i - 1]);
  const ProbeSet q = make_probe_set(1, 4, 4, 5, 1e-3, 1e-1, 1.0, 8, true);
  CHECK(q.base_points.front().norm() == 0.0);  // origin included on request
  CHECK(q.directions.size() == 2);             // 1-D has only two unit directions
}

TEST_CASE("holder seminorm: linear, constant, square-root cusp") {
  ProbeSet p = make_probe_set(1, 6, 2, 8, 1e-4, 1e-1, 2.0, 3, true);
  auto lin = [](const Vec& x) { return 2.5 * x(0); };
  const auto rep = holder_seminorm(lin, 1.0, p);
  CHECK(rep.global_estimate == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(rep.verdict == Verdict::bounded);

  auto cst = [](const Vec&) { return 4.0; };
  const auto rep0 = holder_seminorm(cst, 0.5, p);
  CHECK(rep0.global_estimate == 0.0);
  for (double v : rep0.per_scale_sup) CHECK(v == 0.0);

  auto root = [](const Vec& x) { return std::sqrt(std::abs(x(0))); };
  const auto rep1 = holder_seminorm(root, 0.5, p);
  for (double v : rep1.per_scale_sup) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep1.verdict == Verdict::bounded);
}

TEST_CASE("zygmund seminorm: affine kills it, square grows linearly, |x| saturates at 2") {
  ProbeSet p = make_probe_set(1, 5, 2, 8, 1e-3, 1e-1, 1.5, 9, true);
  auto aff = [](const Vec& x) { return 3.0 - 1.7 * x(0); };
  const auto repa = zygmund_seminorm(aff, p);
  CHECK(repa.global_estimate < 1e-12);

  auto square = [](const Vec& x) { return x(0) * x(0); };
  const auto reps = zygmund_seminorm(square, p);
  for (size_t l = 0; l < p.deltas.size(); ++l)
    CHECK(reps.per_scale_sup[l] == doctest::Approx(2.0 * p.deltas[l]).epsilon(1e-8));
  CHECK(reps.slope == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(reps.verdict == Verdict::bounded);

  // base point at -delta on direction +1 gives |x|: ratio exactly 2 per scale
  ProbeSet custom;
  custom.deltas = {1e-3, 1e-2, 1e-1};
  custom.directions = {Vec::Constant(1, 1.0)};
  for (double d : custom.deltas) custom.base_points.push_back(Vec::Constant(1, -d));
  auto absf = [](const Vec& x) { return std::abs(x(0)); };
  const auto repb = zygmund_seminorm(absf, custom);
  for (double v : repb.per_scale_sup) CHECK(v == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("seminorm estimates are monotone under probe enlargement") {
  auto f = [](const Vec& x) { return std::cos(3.0 * x(0)) + 0.3 * std::abs(x(0)); };
  ProbeSet small = make_probe_set(1, 4, 2, 6, 1e-3, 1e-1, 1.0, 11, false);
  ProbeSet big = small;
  const ProbeSet extra = make_probe_set(1, 8, 2, 6, 1e-3, 1e-1, 2.0, 12, true);
  big.base_points.insert(big.base_points.end(), extra.base_points.begin(),
                         extra.base_points.end());
  const auto rs = holder_seminorm(f, 0.7, small), rb = holder_seminorm(f, 0.7, big);
  CHECK(rb.global_estimate >= rs.global_estimate);
  for (size_t l = 0; l < rs.per_scale_sup.size(); ++l)
    CHECK(rb.per_scale_sup[l] >= rs.per_scale_sup[l]);
}

TEST_CASE("estimate_theta: exact square-root law for flat diffusion") {
  OperatorFamily heat;
  heat.dimension = 2;
  heat.horizon = 2.0;
  heat.structure = OperatorStructure::dense;
  heat.drift = [](double) { return Mat::Zero(2, 2); };
  heat.diffusion = [](double) { return Mat::Identity(2, 2); };
  heat.forcing = [](double) { return Vec::Zero(2); };
  heat.closed_form_u = [](double, double) { return Mat::Identity(2, 2); };
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 10; ++i) {
    const double sep = 1e-4 * std::pow(10.0, 3.0 * i / 9.0);
    pairs.emplace_back(0.2, 0.2 + sep);
  }
  const ThetaFit fit = estimate_theta(heat, pairs);
  CHECK(fit.theta_hat == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fit.residual <= 1e-10);
}

TEST_CASE("estimate_theta: scalar OU in [0.49, 0.51]") {
  const auto m = make_scalar(-1.0, 1.0);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 10; ++i) {
    const double sep = 1e-4 * std::pow(10.0, 3.0 * i / 9.0);
    pairs.emplace_back(0.1, 0.1 + sep);
  }
  const ThetaFit fit = estimate_theta(m, pairs);
  CHECK(fit.theta_hat > 0.49);
  CHECK(fit.theta_hat < 0.51);
}

TEST_CASE("estimate_theta: example 1 with a=2, b=1 lands on theta = 1") {
  Example1Params p;
  p.mode_count = 64;
  p.drift_exponent = 2.0;
  p.diffusion_decay = 1.0;
  const auto m = make_example1(p);
  const auto seps = theta_separations(m, 1e-4, 1e-1, 9);
  std::vector<std::pair<double, double>> pairs;
  for (double sep : seps)
    for (double s0 : {0.05, 0.3, 0.55, 0.8}) pairs.emplace_back(s0, s0 + sep);
  const ThetaFit fit = estimate_theta(m, pairs);
  CHECK(fit.theta_hat > 0.95);
  CHECK(fit.theta_hat < 1.05);
}

TEST_CASE("estimate_theta preconditions") {
  const auto m = make_scalar(-1.0, 1.0);
  std::vector<std::pair<double, double>> few = {{0.0, 0.5}, {0.0, 1.0}};
  CHECK_THROWS_AS(estimate_theta(m, few), Error);
  std::vector<std::pair<double, double>> narrow;
  for (int i = 0; i < 9; ++i) narrow.emplace_back(0.0, 0.1 + 0.01 * i);
  CHECK_THROWS_AS(estimate_theta(m, narrow), Error);  // under two decades
}

TEST_CASE("theta_optimality: certified lower bounds and the saturation guard") {
  std::vector<double> jit = {0.05, 0.3, 0.55, 0.8};
  {
    Example1Params p;
    p.mode_count = 64;
    p.drift_exponent = 2.0;
    p.diffusion_decay = 0.0;
    const auto m = make_example1(p);
    const auto seps = theta_separations(m, 1e-4, 1e-1, 9);
    const auto low = theta_optimality(m, seps, jit);
    CHECK(low.theta_low >= 0.45);
    CHECK(low.theta_star == doctest::Approx(0.5));
  }
  {
    Example1Params p;
    p.mode_count = 128;
    p.drift_exponent = 2.0;
    p.diffusion_decay = 1.0;
    const auto m = make_example1(p);
    const auto seps = theta_separations(m, 1e-4, 1e-1, 9);
    const auto low = theta_optimality(m, seps, jit);
    CHECK(low.theta_low >= 0.9);
    CHECK(low.certified);
  }
  {
    Example1Params p;
    p.mode_count = 4;  // far too few modes for the sup to saturate at 1e-4
    const auto m = make_example1(p);
    CHECK_THROWS_AS(theta_optimality(m, {1e-4, 1e-3}, jit), Error);
  }
}

TEST_CASE("smoothing_suite: saturating field bounded, smooth field decays, const vanishes") {
  Example1Params p;
  p.mode_count = 3;
  p.drift_exponent = 1.0;
  p.diffusion_decay = 0.5;
  const auto m = make_example1(p);
  std::vector<std::pair<double, double>> pairs;
  for (int i = 0; i < 7; ++i)
    pairs.emplace_back(0.25, 0.25 + 1e-3 * std::pow(10.0, 2.0 * i / 6.0));
  std::vector<Vec> probes;
  for (double v : {-0.8, -0.2, 0.1, 0.6}) probes.push_back(Vec::Constant(3, v));
  const std::vector<FieldFunction> phis = {field_step(Vec::Ones(3), Vec::Zero(3)),
                                           field_cosine(Vec::Ones(3)),
                                           field_const(2.0, 3)};
  const auto rows = smoothing_suite(m, phis, 2, pairs, probes);
  REQUIRE(rows.size() == 6);
  for (const auto& row : rows) {
    if (row.phi_label == "step") {
      CHECK(std::abs(row.slope) <= 0.1);
      CHECK(row.verdict == Verdict::bounded);
      CHECK(row.max_ratio > 0.05);
      CHECK(row.max_ratio < 5.0);
    }
    if (row.phi_label == "cosine") CHECK(row.slope > 0.1);  // normalized ratio decays
    if (row.phi_label == "const") CHECK(row.max_ratio < 1e-8);
  }
}

TEST_CASE("first-order smoothing ratio approaches the gaussian first-moment constant") {
  // scalar heat: DP step at the jump saturates R1 = sqrt(2/pi)
  const auto m = make_scalar(0.0, 1.0);
  const auto b = smoothing_bundle(m, 0.0, 0.5);
  const FieldFunction phi = field_step(Vec::Ones(1), Vec::Zero(1));
  const MCEstimate d = derivative_P(m, b, phi, Vec::Zero(1), {Vec::Ones(1)});
  const double r1 = std::abs(d.value) / b.lambda_op_norm;
  CHECK(r1 == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-6));
}

TEST_CASE("interpolation inequality: sine family fits a single modest constant") {
  std::vector<FieldFunction> sines;
  for (double w : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    FieldFunction f;
    f.label = "sine" + std::to_string(w);
    f.value = [w](const Vec& x) { return std::sin(w * x(0)); };
    sines.push_back(f);
  }
  const ProbeSet probes = make_probe_set(1, 16, 2, 12, 1e-4, 1e-1, 2.0, 21);
  const auto rep = interpolation_check(sines, 0.0, 0.5, 1.0, probes);
  CHECK(rep.c_fit <= 5.0);
  CHECK(rep.c_fit > 0.2);
  // scaling invariance: psi -> 2 psi leaves the fitted constant unchanged
  std::vector<FieldFunction> doubled;
  for (auto f : sines) {
    auto v = f.value;
    f.value = [v](const Vec& x) { return 2.0 * v(x); };
    doubled.push_back(f);
  }
  const auto rep2 = interpolation_check(doubled, 0.0, 0.5, 1.0, probes);
  CHECK(rep2.c_fit == doctest::Approx(rep.c_fit).epsilon(1e-12));
  // constant member: inequality degenerates gracefully
  const auto rep3 =
      interpolation_check({field_const(3.0, 1)}, 0.0, 0.5, 1.0, probes);
  CHECK(rep3.rows[0].c_required <= 1.0 + 1e-12);
}

TEST_CASE("schauder suite: cusp data scale-stable at the gain, sharpness probe grows") {
  const auto m = make_scalar(0.0, std::sqrt(2.0));  // theta = 1/2
  const FieldFunction phi = field_const(0.0, 1);
  const SourceTerm psi = source_from_field(field_holder_cusp(0.4, Vec::Zero(1)));
  const ProbeSet probes = make_probe_set(1, 5, 2, 7, 1e-3, 1e-1, 1.0, 31, true);
  const auto rep = schauder_suite(m, phi, psi, 0.4, 1.0, {0.0, 0.3, 0.6}, probes, 0.5, 192);
  CHECK(rep.derivative_order == 2);
  CHECK(rep.exponent == doctest::Approx(0.4));
  CHECK(rep.all_bounded);
  CHECK(rep.sharpness_growing);
  CHECK(rep.sup_over_s > 0.0);
  // homogeneity: doubling the data doubles the seminorm but not the verdicts
  SourceTerm psi2 = psi;
  auto v = psi.value;
  psi2.value = [v](double s, const Vec& x) { return 2.0 * v(s, x); };
  const auto rep2 = schauder_suite(m, phi, psi2, 0.4, 1.0, {0.3}, probes, 0.5, 192);
  CHECK(rep2.per_s[0].global_estimate ==
        doctest::Approx(2.0 * rep.per_s[1].global_estimate).epsilon(1e-4));
}

TEST_CASE("zygmund suite: rough cusp stays Zygmund-bounded while the C2 proxy grows") {
  const auto m = make_scalar(0.0, std::sqrt(2.0));
  const FieldFunction phi = field_const(0.0, 1);
  SourceTerm psi = source_from_field(field_holder_cusp(0.5, Vec::Zero(1)));
  psi.declared = FieldClass::Bb;  // treat as merely bounded: borderline k = 2
  psi.holder_exponent = 0.0;
  const ProbeSet probes = make_probe_set(1, 5, 2, 7, 1e-3, 1e-1, 1.0, 32, true);
  const auto rep = zygmund_suite(m, phi, psi, 0.0, 1.0, {0.0, 0.3}, probes, 0.5, 192);
  CHECK(rep.k == 2);
  CHECK(rep.zygmund_bounded);
  CHECK(rep.proxy_growing);
}

TEST_CASE("suite routing: near-integer exponents go to the zygmund suite") {
  const auto m = make_scalar(0.0, std::sqrt(2.0));
  const FieldFunction phi = field_const(0.0, 1);
  const SourceTerm psi = source_from_field(field_holder_cusp(0.4, Vec::Zero(1)));
  const ProbeSet probes = make_probe_set(1, 3, 2, 5, 1e-2, 1e-1, 1.0, 33, true);
  CHECK_THROWS_AS(schauder_suite(m, phi, psi, 0.02, 1.0, {0.3}, probes, 0.5, 64), Error);
  CHECK_THROWS_AS(zygmund_suite(m, phi, psi, 0.4, 1.0, {0.3}, probes, 0.5, 64), Error);
}
