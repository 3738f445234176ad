#include "ouk/fields.hpp"

#include <cmath>

namespace ouk {

FieldFunction field_const(double c, int /*dim*/) {
  FieldFunction f;
  f.label = "const";
  f.declared = FieldClass::Ck;
  f.class_index = 8;
  f.sup_norm = std::abs(c);
  f.derivative_order = 8;
  f.value = [c](const Vec&) { return c; };
  f.derivative = [c](const Vec&, const std::vector<Vec>& dirs) {
    return dirs.empty() ? c : 0.0;
  };
  return f;
}

FieldFunction field_linear(const Vec& c) {
  FieldFunction f;
  f.label = "linear";
  f.declared = FieldClass::Ck;
  f.class_index = 8;
  f.derivative_order = 8;
  f.value = [c](const Vec& x) { return c.dot(x); };
  f.derivative = [c](const Vec& x, const std::vector<Vec>& dirs) {
    if (dirs.empty()) return c.dot(x);
    if (dirs.size() == 1) return c.dot(dirs[0]);
    return 0.0;
  };
  return f;
}

FieldFunction field_quadratic(const Mat& m) {
  FieldFunction f;
  f.label = "quadratic";
  f.declared = FieldClass::Ck;
  f.class_index = 8;
  f.derivative_order = 8;
  const Mat sym = m + m.transpose();
  f.value = [m](const Vec& x) { return x.dot(m * x); };
  f.derivative = [m, sym](const Vec& x, const std::vector<Vec>& dirs) {
    if (dirs.empty()) return x.dot(m * x);
    if (dirs.size() == 1) return dirs[0].dot(sym * x);
    if (dirs.size() == 2) return dirs[0].dot(sym * dirs[1]);
    return 0.0;
  };
  return f;
}

FieldFunction field_cosine(const Vec& c) {
  FieldFunction f;
  f.label = "cosine";
  f.declared = FieldClass::Ck;
  f.class_index = 8;
  f.sup_norm = 1.0;
  f.derivative_order = 8;
  f.value = [c](const Vec& x) { return std::cos(c.dot(x)); };
  // D^k cos(<c,x>)(h_1..h_k) = cos(<c,x> + k pi/2) prod <c,h_j>
  f.derivative = [c](const Vec& x, const std::vector<Vec>& dirs) {
    double amp = 1.0;
    for (const auto& h : dirs) amp *= c.dot(h);
    return amp * std::cos(c.dot(x) + 0.5 * M_PI * static_cast<double>(dirs.size()));
  };
  return f;
}

FieldFunction field_holder_cusp(double alpha, const Vec& x0) {
  require(alpha > 0.0 && alpha <= 1.0, "holderCusp: alpha in (0,1]");
  FieldFunction f;
  f.label = "holderCusp";
  f.declared = FieldClass::Holder;
  f.class_index = alpha;
  f.sup_norm = 1.0;
  f.declared_seminorm = 1.0;  // [min(1,|x-x0|^a)]_{C^a} = 1
  f.value = [alpha, x0](const Vec& x) {
    return std::min(1.0, std::pow((x - x0).norm(), alpha));
  };
  return f;
}

FieldFunction field_absolute(const Vec& c) {
  FieldFunction f;
  f.label = "absolute";
  f.declared = FieldClass::Holder;
  f.class_index = 1.0;
  f.declared_seminorm = c.norm();
  f.value = [c](const Vec& x) { return std::abs(c.dot(x)); };
  return f;
}

FieldFunction field_step(const Vec& c, const Vec& x0) {
  FieldFunction f;
  f.label = "step";
  f.declared = FieldClass::Bb;
  f.sup_norm = 1.0;
  f.value = [c, x0](const Vec& x) { return c.dot(x - x0) >= 0.0 ? 1.0 : -1.0; };
  return f;
}

std::vector<std::string> builtin_field_names() {
  return {"const", "linear", "quadratic", "cosine", "holderCusp", "absolute", "step"};
}

FieldFunction make_builtin_field(const std::string& label, int dim, const Vec& c_or_x0,
                                 double alpha) {
  if (label == "const") return field_const(c_or_x0.size() ? c_or_x0(0) : 1.0, dim);
  if (label == "linear") return field_linear(c_or_x0);
  if (label == "quadratic") return field_quadratic(Mat(c_or_x0.asDiagonal()));
  if (label == "cosine") return field_cosine(c_or_x0);
  if (label == "holderCusp") return field_holder_cusp(alpha, c_or_x0);
  if (label == "absolute") return field_absolute(c_or_x0);
  if (label == "step") return field_step(Vec::Ones(dim), c_or_x0);
  throw Error("unknown field label '" + label + "'");
}

SourceTerm source_constant(double c) {
  SourceTerm s;
  s.label = "constSource";
  s.declared = FieldClass::Bb;
  s.value = [c](double, const Vec&) { return c; };
  s.derivative_order = 8;
  s.derivative = [c](double, const Vec&, const std::vector<Vec>& dirs) {
    return dirs.empty() ? c : 0.0;
  };
  return s;
}

SourceTerm source_linear_in_x(const Vec& c) {
  SourceTerm s;
  s.label = "linearSource";
  s.declared = FieldClass::Bb;
  s.value = [c](double, const Vec& x) { return c.dot(x); };
  s.derivative_order = 8;
  s.derivative = [c](double, const Vec& x, const std::vector<Vec>& dirs) {
    if (dirs.empty()) return c.dot(x);
    if (dirs.size() == 1) return c.dot(dirs[0]);
    return 0.0;
  };
  return s;
}

SourceTerm source_from_field(const FieldFunction& f) {
  SourceTerm s;
  s.label = f.label;
  s.declared = f.declared == FieldClass::Holder ? FieldClass::Holder : FieldClass::Bb;
  s.holder_exponent = f.declared == FieldClass::Holder ? f.class_index : 0.0;
  s.declared_holder_bound = f.declared_seminorm;
  auto v = f.value;
  s.value = [v](double, const Vec& x) { return v(x); };
  if (f.derivative_order > 0 && f.derivative) {
    s.derivative_order = f.derivative_order;
    auto d = f.derivative;
    s.derivative = [d](double, const Vec& x, const std::vector<Vec>& dirs) {
      return d(x, dirs);
    };
  }
  return s;
}

}  // namespace ouk
