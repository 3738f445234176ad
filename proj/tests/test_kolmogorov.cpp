#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ouk/kolmogorov.hpp"

#include <cmath>

using namespace ouk;

namespace {

OperatorFamily dense2_model() {
  Mat a(2, 2), b(2, 2);
  a << -1.0, 0.3, 0.1, -1.4;
  b << 1.0, 0.2, 0.0, 0.8;
  OperatorFamily m;
  m.dimension = 2;
  m.horizon = 2.0;
  m.structure = OperatorStructure::dense;
  m.drift = [a](double) { return a; };
  m.diffusion = [b](double) { return b; };
  m.forcing = [](double) { return Vec::Zero(2); };
  return m;
}

}  // namespace

TEST_CASE("graded mesh: monotone nodes, first-interval scaling, endpoint exactness") {
  GradedTimeMesh mesh{0.2, 1.2, 0.8, 64};
  const auto nodes = mesh.nodes();
  CHECK(nodes.front() == 0.2);
  CHECK(nodes.back() == 1.2);
  for (size_t i = 1; i < nodes.size(); ++i) CHECK(nodes[i] > nodes[i - 1]);
  // first interval ~ (t-s) M^{-1/(1-gamma)} = 1.0 * 64^{-5}
  CHECK(nodes[1] - nodes[0] == doctest::Approx(std::pow(64.0, -5.0)).epsilon(1e-10));
  GradedTimeMesh uniform{0.0, 1.0, 0.0, 10};
  const auto un = uniform.nodes();
  CHECK(un[3] == doctest::Approx(0.3));
  CHECK_THROWS_AS((GradedTimeMesh{0.0, 1.0, 1.2, 8}.nodes()), Error);
}

TEST_CASE("solve_u: psi == 0 reduces to the transition value") {
  const auto m = make_scalar(-1.0, 1.0);
  const FieldFunction phi = field_quadratic(Mat::Identity(1, 1));
  const SourceTerm zero = source_constant(0.0);
  const auto table = solve_u(m, phi, zero, 1.0, {0.0}, {Vec::Constant(1, 1.0)});
  CHECK(table.size() == 1);
  CHECK(table[0].u1 == 0.0);
  CHECK(table[0].u == doctest::Approx(0.5676676416183064).epsilon(1e-9));
}

TEST_CASE("solve_u: constant source integrates to -c (t - s)") {
  const auto m = make_scalar(-1.0, 1.0);
  const FieldFunction phi = field_const(0.0, 1);
  const SourceTerm psi = source_constant(2.5);
  const auto table = solve_u(m, phi, psi, 1.0, {0.0, 0.4}, {Vec::Zero(1)});
  CHECK(table[0].u1 == doctest::Approx(-2.5).epsilon(1e-9));
  CHECK(table[1].u1 == doctest::Approx(-2.5 * 0.6).epsilon(1e-9));
}

TEST_CASE("solve_u: scalar linear source closed form -x (1 - e^{-(t-s)})") {
  const auto m = make_scalar(-1.0, 1.0);
  const FieldFunction phi = field_const(0.0, 1);
  const SourceTerm psi = source_linear_in_x(Vec::Constant(1, 1.0));
  const double x0 = 1.7;
  const auto table = solve_u(m, phi, psi, 1.0, {0.0, 0.5}, {Vec::Constant(1, x0)});
  CHECK(table[0].u1 == doctest::Approx(-x0 * (1.0 - std::exp(-1.0))).epsilon(1e-8));
  CHECK(table[1].u1 == doctest::Approx(-x0 * (1.0 - std::exp(-0.5))).epsilon(1e-8));
}

TEST_CASE("sup bound |u1| <= t |psi|_inf on a probe table") {
  const auto m = make_scalar(-1.0, 1.0);
  const FieldFunction phi = field_const(0.0, 1);
  const SourceTerm psi = source_from_field(field_cosine(Vec::Constant(1, 2.0)));
  const auto table =
      solve_u(m, phi, psi, 1.0, {0.0, 0.3, 0.6}, {Vec::Zero(1), Vec::Constant(1, 0.8)});
  for (const auto& cell : table) CHECK(std::abs(cell.u1) <= 1.0 + 1e-9);
}

TEST_CASE("derivative_u1: constant source has zero spatial derivative") {
  const auto m = make_scalar(-1.0, 1.0);
  const SourceTerm psi = source_constant(3.0);
  const Vec h = Vec::Constant(1, 1.0);
  const MCEstimate d = derivative_u1(m, psi, 0.0, 1.0, Vec::Zero(1), {h}, 0.5);
  CHECK(std::abs(d.value) < 1e-8);
}

TEST_CASE("derivative_u1: scalar linear source closed form") {
  const auto m = make_scalar(-1.0, 1.0);
  const SourceTerm psi = source_linear_in_x(Vec::Constant(1, 1.0));
  const Vec h = Vec::Constant(1, 1.0);
  const MCEstimate d = derivative_u1(m, psi, 0.0, 1.0, Vec::Constant(1, 0.3), {h}, 0.5);
  CHECK(d.value == doctest::Approx(-(1.0 - std::exp(-1.0))).epsilon(2e-4));
}

TEST_CASE("derivative_u1 matches a central finite difference of solve_u's u1, N=2") {
  const auto m = dense2_model();
  const SourceTerm psi = source_from_field(field_cosine((Vec(2) << 1.0, -0.7).finished()));
  Vec x(2);
  x << 0.4, -0.2;
  Vec h(2);
  h << 1.0, 0.5;
  const double s = 0.2, t = 1.0;
  const FieldFunction zero_phi = field_const(0.0, 2);
  auto u1_at = [&](const Vec& xx) {
    return solve_u(m, zero_phi, psi, t, {s}, {xx}).front().u1;
  };
  const double eps = 1e-3;
  const double fd = (u1_at(x + eps * h) - u1_at(x - eps * h)) / (2.0 * eps);
  const MCEstimate d = derivative_u1(m, psi, s, t, x, {h}, 0.5);
  CHECK(std::abs(d.value - fd) <= std::max(3.0 * d.stderr_, 1e-3));
}

TEST_CASE("derivative_u1 refuses non-integrable grading") {
  const auto m = make_scalar(-1.0, 1.0);
  // cusp source: Holder 0.4 and no analytic derivatives
  SourceTerm psi = source_from_field(field_holder_cusp(0.4, Vec::Zero(1)));
  std::vector<Vec> dirs(3, Vec::Constant(1, 1.0));
  // k = 3, alpha = 0.4, theta = 0.5 -> gamma = 1.3 >= 1
  CHECK_THROWS_AS(derivative_u1(m, psi, 0.0, 1.0, Vec::Zero(1), dirs, 0.5), Error);
}

TEST_CASE("graded-mesh estimates stabilize under node doubling") {
  const auto m = make_scalar(0.0, std::sqrt(2.0));  // heat-like, theta = 1/2
  SourceTerm psi = source_from_field(field_holder_cusp(0.4, Vec::Zero(1)));
  const Vec h = Vec::Constant(1, 1.0);
  const Vec x = Vec::Constant(1, 0.15);
  double prev = 0.0;
  bool first = true;
  for (int nodes : {128, 256, 512}) {
    U1DerivativeField field(m, psi, 0.1, 1.0, {h, h}, 0.5, nodes);
    CHECK(field.grading_exponent() == doctest::Approx((2.0 - 0.4) * 0.5));
    const double v = field.eval(x).value;
    if (!first) CHECK(std::abs(v - prev) < 2e-3 * std::max(1.0, std::abs(v)));
    prev = v;
    first = false;
  }
}

TEST_CASE("u is continuous on probe refinement: adjacent-cell jumps shrink") {
  const auto m = make_scalar(-1.0, 1.0);
  const FieldFunction phi = field_cosine(Vec::Constant(1, 1.0));
  const SourceTerm psi = source_from_field(field_cosine(Vec::Constant(1, 2.0)));
  auto max_jump = [&](int cells) {
    std::vector<double> sgrid;
    std::vector<Vec> xset;
    for (int i = 0; i <= cells; ++i) {
      sgrid.push_back(0.8 * i / cells);
      xset.push_back(Vec::Constant(1, -1.0 + 2.0 * i / cells));
    }
    const auto table = solve_u(m, phi, psi, 1.0, sgrid, xset);
    // table rows ordered by (s, x); measure jumps along both axes
    const int nx = static_cast<int>(xset.size());
    double jump = 0.0;
    for (size_t r = 1; r < table.size(); ++r) {
      if (static_cast<int>(r) % nx != 0)
        jump = std::max(jump, std::abs(table[r].u - table[r - 1].u));
      if (r >= static_cast<size_t>(nx))
        jump = std::max(jump, std::abs(table[r].u - table[r - nx].u));
    }
    return jump;
  };
  const double coarse = max_jump(6), fine = max_jump(24);
  CHECK(fine < coarse);
  CHECK(fine < 0.5 * coarse + 1e-6);
}

TEST_CASE("pde residual: scalar quadratic closed form stays below 1e-3") {
  const auto m = make_scalar(-1.0, 1.0);
  const FieldFunction phi = field_quadratic(Mat::Identity(1, 1));
  const SourceTerm psi = source_constant(0.0);
  for (double s : {0.3, 0.5}) {
    for (double x0 : {0.0, 0.7}) {
      const double r = pde_residual(m, phi, psi, 1.0, s, Vec::Constant(1, x0), 0.5);
      CHECK(r <= 1e-3);
    }
  }
}

TEST_CASE("pde residual: constant solution case at the drift-free point") {
  const auto m = make_scalar(-1.0, 1.0);
  const FieldFunction phi = field_const(2.0, 1);
  const SourceTerm psi = source_constant(0.0);
  const double r = pde_residual(m, phi, psi, 1.0, 0.4, Vec::Zero(1), 0.5);
  CHECK(r <= 1e-6);
}

TEST_CASE("pde residual: N=2 dense model with smooth data below 1e-2") {
  const auto m = dense2_model();
  const FieldFunction phi = field_cosine((Vec(2) << 0.8, -0.5).finished());
  const SourceTerm psi = source_from_field(field_cosine((Vec(2) << 0.6, 0.4).finished()));
  const double r = pde_residual(m, phi, psi, 1.0, 0.5, (Vec(2) << 0.3, -0.4).finished(), 0.5);
  CHECK(r <= 1e-2);
  CHECK_THROWS_AS(
      pde_residual(m, phi, psi, 1.0, 0.0, Vec::Zero(2), 0.5), Error);  // s not interior
}
