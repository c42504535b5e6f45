#pragma once

#include <functional>
#include <vector>

#include "thermolab/fields.hpp"

namespace thermolab {

struct Mat2 {
    double a = 1, b = 0, c = 0, d = 1;  // [[a, b], [c, d]]

    double det() const { return a * d - b * c; }
    double norm() const;  // max abs entry
    Mat2 inverse() const;
    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    Mat2& operator*=(double s) {
        a *= s; b *= s; c *= s; d *= s;
        return *this;
    }
};

struct OrbitSample {
    double t = 0;
    UnitTangentState state;
    double lambda = 0, vlambda = 0, kappa0 = 0;
};

/// Fundamental matrix of (x, y)' = [[0, 1], [-kappa0, V(lambda)]] (x, y),
/// stored as Phi = exp(log_scale) * M.
struct CocycleState {
    Mat2 M;
    double log_scale = 0.0;
    double int_vlambda = 0.0;  // integral of V(lambda) along the orbit
    // det M loses every digit once M is nearly rank one, so the determinant
    // is accumulated from the step propagators
    double log_abs_det = 0.0;

    double log_det() const { return log_abs_det; }
    Mat2 phi() const;  // may overflow for long times
};

/// Values of the thermostat vector field and the cocycle generator at a state.
struct FlowRhs {
    Complex dz;
    double dphi = 0;
    double lambda = 0, vlambda = 0, kappa0 = 0;
};
FlowRhs flow_rhs(const ThermostatSpec& spec, Complex z, double phi, bool with_cocycle = true);

/// Fixed-step RK4 integrator for the coupled (orbit, cocycle) system. The
/// state is reduced to the fundamental octagon after every step.
class FlowIntegrator {
  public:
    FlowIntegrator(const ThermostatSpec& spec, UnitTangentState s0, double dt, bool with_cocycle = true);

    void step();
    double time() const { return t_; }
    double dt() const { return dt_; }
    const UnitTangentState& state() const { return s_; }
    /// Generators applied by the reductions so far, in order; the state is
    /// g_m ... g_1 applied to the unreduced lift.
    const std::vector<std::int8_t>& deck_letters() const { return letters_; }
    /// Cocycle propagator of the last step and its V(lambda) integral.
    const Mat2& step_propagator() const { return P_; }
    double step_int_vlambda() const { return step_iv_; }
    /// |chart speed| * exp(sigma) - 1 measured on the last step's stage values.
    double speed_defect() const { return speed_defect_; }
    OrbitSample sample() const;

  private:
    const ThermostatSpec& spec_;
    UnitTangentState s_;
    double dt_, t_ = 0.0;
    bool cocycle_;
    std::vector<std::int8_t> letters_;
    Mat2 P_;
    double step_iv_ = 0.0;
    double speed_defect_ = 0.0;
};

/// Samples at t = 0, dt, ..., T (inclusive, rounded to whole steps).
struct Orbit {
    std::vector<OrbitSample> samples;
    std::vector<std::int8_t> deck_letters;  // every generator applied by reductions
    std::vector<std::size_t> deck_count;    // letters applied up to each sample
    double dt = 0;
    double max_speed_defect = 0;
};

Orbit integrate_flow(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt);

/// Unreduced chart trajectory: sample states pulled back through the decks.
/// Meaningful only while the lift stays well inside the disk (short orbits).
std::vector<Complex> lift_orbit(const Orbit& orbit);

CocycleState integrate_cocycle(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt);

struct LyapunovResult {
    double chi_plus = 0, chi_minus = 0;
    double mean_vlambda = 0;
    bool converged = true;
    double drift = 0;  // largest move of the running estimates over the last 10% of T
};
LyapunovResult lyapunov_exponents(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt = 1e-2);

struct ErgodicResult {
    double mean = 0;
    double std_error = 0;  // batch means
    bool converged = true;
    double drift = 0;
};
using Observable = std::function<double(const OrbitSample&)>;
/// Forward-time average with 5% burn-in. Stops after T.
ErgodicResult ergodic_average(const ThermostatSpec& spec, const Observable& obs, UnitTangentState s0, double T,
                              double dt = 1e-2, double drift_tol = 1e-2);

/// Traced orbit curvature test helper: geodesic curvature of the chart curve
/// through three points in the metric exp(2 sigma)|dz|^2, via circumcircles.
double three_point_geodesic_curvature(const ThermostatSpec& spec, Complex z0, Complex z1, Complex z2);

}  // namespace thermolab
