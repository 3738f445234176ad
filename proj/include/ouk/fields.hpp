#pragma once

#include "ouk/common.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ouk {

enum class FieldClass { Bb, Holder, Ck, Zk };

/// A bounded scalar field with a declared regularity class and, when the
/// class provides them, analytic directional derivatives
/// D^k f(x)(h_1, ..., h_k) up to derivative_order.
struct FieldFunction {
  std::string label;
  std::function<double(const Vec&)> value;
  FieldClass declared = FieldClass::Bb;
  double class_index = 0.0;              // alpha for Holder, k for Ck/Zk
  std::optional<double> declared_seminorm;
  std::optional<double> sup_norm;        // declared sup-norm when known
  int derivative_order = 0;
  std::function<double(const Vec&, const std::vector<Vec>&)> derivative;

  double deriv(const Vec& x, const std::vector<Vec>& dirs) const {
    require(derivative && static_cast<int>(dirs.size()) <= derivative_order,
            "FieldFunction: analytic derivative of order " + std::to_string(dirs.size()) +
                " not available for '" + label + "'");
    return derivative(x, dirs);
  }
};

// Built-in library (addressable by label from the CLI).
FieldFunction field_const(double c, int dim);
FieldFunction field_linear(const Vec& c);
FieldFunction field_quadratic(const Mat& m);
FieldFunction field_cosine(const Vec& c);
FieldFunction field_holder_cusp(double alpha, const Vec& x0);  // min(1, |x-x0|^alpha)
FieldFunction field_absolute(const Vec& c);                    // |<c,x>|
FieldFunction field_step(const Vec& c, const Vec& x0);         // sign<c, x-x0>, in B_b only

/// Names of the built-in fields, stable ordering.
std::vector<std::string> builtin_field_names();

/// Construct a built-in by label with a direction/shape parameter; throws on
/// unknown labels.
FieldFunction make_builtin_field(const std::string& label, int dim, const Vec& c_or_x0,
                                 double alpha = 0.5);

/// Time-dependent source term psi(sigma, x) with per-sigma regularity class
/// and, for smooth sources, analytic spatial derivatives.
struct SourceTerm {
  std::string label;
  std::function<double(double, const Vec&)> value;
  FieldClass declared = FieldClass::Bb;  // C0_b or C^{0,alpha}
  double holder_exponent = 0.0;          // alpha when declared Holder
  std::optional<double> declared_holder_bound;
  int derivative_order = 0;
  std::function<double(double, const Vec&, const std::vector<Vec>&)> derivative;

  /// Freeze sigma; the slice is a plain field carrying the derivatives through.
  FieldFunction slice(double sigma) const {
    FieldFunction f;
    f.label = label + "@sigma";
    f.declared = declared == FieldClass::Holder ? FieldClass::Holder : FieldClass::Bb;
    f.class_index = holder_exponent;
    auto v = value;
    f.value = [v, sigma](const Vec& x) { return v(sigma, x); };
    if (derivative_order > 0) {
      f.derivative_order = derivative_order;
      auto d = derivative;
      f.derivative = [d, sigma](const Vec& x, const std::vector<Vec>& dirs) {
        return d(sigma, x, dirs);
      };
    }
    return f;
  }
};

SourceTerm source_constant(double c);
SourceTerm source_linear_in_x(const Vec& c);          // psi(sigma, x) = <c, x>
SourceTerm source_from_field(const FieldFunction& f); // time-independent

}  // namespace ouk
