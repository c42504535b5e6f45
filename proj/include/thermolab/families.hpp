#pragma once

#include <cstdint>

#include "thermolab/fields.hpp"

namespace thermolab {

/// Constant curvature -c^2 and constant magnetic intensity f0; slopes are the
/// constant roots -+sqrt(c^2 - f0^2). For f0^2 >= c^2 the flow is not Anosov
/// and the magnitude is NaN.
ThermostatSpec make_theoremA_spec(double c, double f0);
double theoremA_slope_magnitude(double c, double f0);

/// f = epsilon * bump, h = sqrt(c^2 - f^2), e = i (f grad h - h grad f) / c^2.
/// The external field is stored as the rotated gradient of W = -arcsin(f/c),
/// which is the same vector field.
struct TheoremBSpec {
    ThermostatSpec spec;
    double c = 1.0;
    std::shared_ptr<const RadialBumpField> f, h, W;

    /// Predicted slope of the smooth weak bundle: -h(x) - theta_x(v). It is the
    /// stable (plus) side in this lab's orientation.
    double r_pred(const BasePoint& b, double phi) const;
    double r_pred(const UnitTangentState& s) const;
};
TheoremBSpec make_theoremB_spec(double c, double epsilon, double rho0, Complex center = 0.0);

/// Spec of the reparametrized flow after the conformal change g1 = exp(-2U) g:
/// (g1, exp(U) f, theta + dU, exp(-U) q). Opposite gradient terms with the
/// same potential cancel.
ThermostatSpec apply_time_change(const ThermostatSpec& spec, FieldPtr U);

/// Gradient thermostat e = -grad U (lambda = -dU(iv)).
ThermostatSpec make_gradient_thermostat(double c, FieldPtr U);
/// e = i grad U.
ThermostatSpec make_rotated_thermostat(double c, FieldPtr U);

/// The normalized Poincare-series differential of w0 = 1 (default options),
/// built once per process.
const QuadDiffField& shared_invariant_qd();

/// Random small-amplitude spec: a magnetic bump with |f| <= epsilon and a
/// gradient or rotated gradient external field whose potential has Hessian of
/// order epsilon, both supported in the inscribed disk, and optionally a
/// random complex multiple of shared_invariant_qd() with max |q| <= epsilon/4.
ThermostatSpec make_random_spec(std::uint64_t seed, double epsilon, bool with_q = true);

}  // namespace thermolab
