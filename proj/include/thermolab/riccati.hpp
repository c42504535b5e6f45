#pragma once

// Weak-bundle slopes r_pm with H + r V tangent to the weak stable (plus) and
// weak unstable (minus) bundles, from projective integration of the cocycle.
// Convention: on the geodesic flow r_plus = -c and r_minus = +c.

#include <vector>

#include "thermolab/flow.hpp"

namespace thermolab {

enum class Side { Plus, Minus };

struct SlopeOptions {
    double T = 40.0;  // in units of 1/c
    double dt = 1e-2;
    double gap_tol = 1e-6;  // allowed |r(T) - r(T/2)|
};

struct SlopeSample {
    UnitTangentState state;
    double r_plus = 0, r_minus = 0;
    double convergence_gap = 0;  // max over both sides
    bool certified = true;
};

/// Slope of the solution arriving at s from a seed (1, 0) at time -+T.
double slope_at(const ThermostatSpec& spec, const UnitTangentState& s, Side which, const SlopeOptions& opt,
                double* convergence_gap = nullptr);
SlopeSample slopes_at(const ThermostatSpec& spec, const UnitTangentState& s, const SlopeOptions& opt);

struct SlopeFiberProfile {
    Complex z;
    int N_theta = 0;
    std::vector<double> theta, r_plus, r_minus, v_r_plus, v_r_minus;
    double max_convergence_gap = 0;
    bool certified = true;
};
SlopeFiberProfile slope_fiber_profile(const ThermostatSpec& spec, Complex z, int N_theta, const SlopeOptions& opt);

/// Slope series along one orbit from stored step propagators: r_minus by
/// forward iteration from a seed `buffer` time units before the window,
/// r_plus by backward iteration from `buffer` units after it.
struct OrbitSlopes {
    Orbit orbit;  // the window [0, T]
    std::vector<double> r_plus, r_minus;
};
OrbitSlopes slopes_along_orbit(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt,
                               double buffer = 20.0);

/// max |F(r - V lambda) + r (r - V lambda) + kappa0 + F(V lambda)| with F by
/// 4th-order differences in t (end points excluded).
double riccati_residual(const Orbit& orbit, const std::vector<double>& r);
/// max |F log|r_+ - r_-| - V lambda + (r_+ + r_-)|.
double lemma_vol_check(const Orbit& orbit, const std::vector<double>& r_plus, const std::vector<double>& r_minus);

/// Action of a cocycle matrix on slopes: the slope of P (1, r).
double transport_slope(const Mat2& P, double r);

struct HyperbolicityReport {
    double delta_min = 0;       // min of r_minus - r_plus
    double max_gap = 0;         // worst convergence gap
    double max_abs_slope = 0;
    int n_samples = 0;
    int n_flagged = 0;
    bool certified = false;
    std::vector<SlopeSample> samples;
};
HyperbolicityReport hyperbolicity_certificate(const ThermostatSpec& spec, const std::vector<UnitTangentState>& states,
                                              const SlopeOptions& opt, double margin = 1e-3);

/// Slopes on base points x a uniform fiber grid (row-major: base, angle).
struct SlopeField {
    std::vector<Complex> bases;
    int N_theta = 0;
    std::vector<double> r_plus, r_minus, v_r_plus, v_r_minus;
    double max_convergence_gap = 0;
    int n_flagged = 0;
    bool certified() const { return n_flagged == 0; }
    const std::vector<double>& r(Side s) const { return s == Side::Plus ? r_plus : r_minus; }
    const std::vector<double>& v_r(Side s) const { return s == Side::Plus ? v_r_plus : v_r_minus; }
};
SlopeField compute_slope_field(const ThermostatSpec& spec, const std::vector<Complex>& bases, int N_theta,
                               const SlopeOptions& opt);

}  // namespace thermolab
