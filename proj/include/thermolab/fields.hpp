#pragma once

// Generating data of a thermostat: scalar fields, the 1-form theta dual to the
// external field e, the quadratic differential q, and the assembled lambda with
// its fiber and horizontal derivatives.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "thermolab/geometry.hpp"
#include "thermolab/jet.hpp"

namespace thermolab {

using json = nlohmann::json;

class ScalarField {
  public:
    virtual ~ScalarField() = default;
    /// Value, chart gradient and chart Hessian at z.
    virtual Jet jet(Complex z) const = 0;
    double value(Complex z) const { return jet(z).v; }
    virtual json describe() const = 0;
};
using FieldPtr = std::shared_ptr<const ScalarField>;

class ConstantField final : public ScalarField {
  public:
    explicit ConstantField(double c) : c_(c) {}
    Jet jet(Complex) const override { return Jet::constant(c_); }
    json describe() const override { return {{"kind", "constant"}, {"value", c_}}; }
    double constant() const { return c_; }

  private:
    double c_;
};

/// Outer function applied to y = amplitude * bump.
struct RadialOuter {
    enum class Kind { Linear, Arcsin, SqrtComplement };
    Kind kind = Kind::Linear;
    double scale = 1.0;  // k
    double c = 1.0;      // for arcsin(y/c) and sqrt(c^2 - y^2)
};

/// O(amplitude * b(d / rho0)) with b(t) = exp(1 - 1/(1 - t^2)) on t < 1 and 0
/// beyond, d the hyperbolic distance (curvature -1 units) to the center.
class RadialBumpField final : public ScalarField {
  public:
    RadialBumpField(Complex center, double rho0, double amplitude, RadialOuter outer = {});
    Jet jet(Complex z) const override;
    json describe() const override;

    Complex center() const { return center_; }
    double rho0() const { return rho0_; }
    double amplitude() const { return amplitude_; }
    const RadialOuter& outer() const { return outer_; }
    /// Profile amplitude * b as a function of the distance, for oracles.
    double profile(double d) const;

  private:
    Complex center_;
    double rho0_, amplitude_;
    RadialOuter outer_;
};

/// sum_i coef_i * F_i
class SumField final : public ScalarField {
  public:
    explicit SumField(std::vector<std::pair<double, FieldPtr>> terms) : terms_(std::move(terms)) {}
    Jet jet(Complex z) const override;
    json describe() const override;
    const std::vector<std::pair<double, FieldPtr>>& terms() const { return terms_; }

  private:
    std::vector<std::pair<double, FieldPtr>> terms_;
};

/// F * exp(a * G)
class ExpScaledField final : public ScalarField {
  public:
    ExpScaledField(FieldPtr base, FieldPtr exponent, double a)
        : base_(std::move(base)), exponent_(std::move(exponent)), a_(a) {}
    Jet jet(Complex z) const override;
    json describe() const override;

  private:
    FieldPtr base_, exponent_;
    double a_;
};

/// Each jet component of `base` sampled on a uniform chart grid over
/// [-a, a]^2 and interpolated bicubically (Catmull-Rom); points outside the
/// box fall back to the base field.
class TabulatedJetField final : public ScalarField {
  public:
    TabulatedJetField(FieldPtr base, double half_width, int n);
    Jet jet(Complex z) const override;
    json describe() const override;
    const FieldPtr& base() const { return base_; }

  private:
    FieldPtr base_;
    double a_, h_;
    int n_;
    std::vector<Jet> nodes_;  // (n+1) x (n+1), row = x index
};

/// Hyperbolic distance helper used by radial fields: jet of D = d(z, p)^2.
Jet squared_distance_jet(Complex z, Complex p);

enum class FormKind { Gradient, Rotated };

/// coef * dU (Gradient) or coef * (-dU o i) (Rotated); the dual vector fields
/// are coef * grad U and coef * i grad U.
struct OneFormTerm {
    FormKind kind = FormKind::Gradient;
    double coef = 1.0;
    FieldPtr potential;
};

/// Holomorphic representative w of a quadratic differential Re(w dz^2),
/// stored as Taylor coefficients about 0.
class QuadDiffField {
  public:
    QuadDiffField() = default;
    explicit QuadDiffField(std::vector<Complex> coeffs, double defect = 0.0)
        : coeffs_(std::move(coeffs)), defect_(defect) {}

    Complex w(Complex z) const;
    Complex dw(Complex z) const;
    const std::vector<Complex>& coeffs() const { return coeffs_; }
    /// Relative generator-invariance defect measured at construction.
    double invariance_defect() const { return defect_; }
    json describe() const;

  private:
    std::vector<Complex> coeffs_;
    double defect_ = 0.0;
};
using QuadPtr = std::shared_ptr<const QuadDiffField>;

/// lambda(x,v) = f(x) + theta_x(iv) + exp(s(x)) q_x(v,v) on the surface with
/// metric exp(2 sigma)|dz|^2, sigma = log 2 - log(1-|z|^2) - log c + u.
struct ThermostatSpec {
    double c = 1.0;
    FieldPtr f;
    FieldPtr u;
    std::vector<OneFormTerm> theta;
    QuadPtr q;
    FieldPtr q_log_weight;
    std::shared_ptr<const FuchsianGroup> group;
    std::string label;

    bool has_theta() const { return !theta.empty(); }
    bool is_magnetic() const { return theta.empty() && !q; }
    json describe() const;
};

std::shared_ptr<const FuchsianGroup> shared_genus2();

/// Basepoint data at z; every function on SM used by the lab is a trigonometric
/// polynomial of degree <= 2 in phi over these.
struct BasePoint {
    Complex z;
    Jet sigma;
    double E = 1.0;  // exp(-sigma)
    double K = -1.0;
    Jet f;
    double tx = 0, ty = 0;                      // chart components of theta
    double tx_x = 0, tx_y = 0, ty_x = 0, ty_y = 0;
    double div_e = 0.0;
    Complex w = 0, dw = 0;
    Jet m = Jet::constant(1.0);  // exp(s)
};

BasePoint eval_base(const ThermostatSpec& spec, Complex z);

struct FiberValues {
    double lambda = 0, vlambda = 0, vvlambda = 0;
};
FiberValues eval_fiber(const BasePoint& b, double phi);

struct HorizontalDerivs {
    double X = 0, H = 0;
};
HorizontalDerivs eval_horizontal(const BasePoint& b, double phi);

double lambda_eval(const ThermostatSpec& spec, const UnitTangentState& s);
/// (V lambda, V^2 lambda)
std::pair<double, double> lambda_fiber_derivs(const ThermostatSpec& spec, const UnitTangentState& s);
HorizontalDerivs lambda_horizontal_derivs(const ThermostatSpec& spec, const UnitTangentState& s);
/// Finite-difference route: 4th-order central differences along the geodesic
/// flow (X) and the rotated geodesic flow (H).
HorizontalDerivs lambda_horizontal_derivs_fd(const ThermostatSpec& spec, const UnitTangentState& s,
                                             double step = 1e-4);

double kappa0(const ThermostatSpec& spec, const UnitTangentState& s);
double kappa0(const BasePoint& b, double phi);
double curvature(const ThermostatSpec& spec, Complex z);
double det_shifted(const ThermostatSpec& spec, const UnitTangentState& s);
double det_q(const BasePoint& b);  // det_g q
double divergence(const ThermostatSpec& spec, Complex z);

/// theta_x(v) for the unit vector of direction phi.
double theta_of_v(const BasePoint& b, double phi);
double theta_of_iv(const BasePoint& b, double phi);
/// q(v,v) and V(q) at the state.
double q_of_v(const BasePoint& b, double phi);
double vq_of_v(const BasePoint& b, double phi);

/// Unit-speed geodesic flow of the spec's metric for time t (RK4).
UnitTangentState geodesic_step(const ThermostatSpec& spec, UnitTangentState s, double t, int substeps = 4);

/// Chart-coordinate derivatives of a (possibly complex) function on SM along
/// the frame fields, by 4th-order central differences in (x, y, phi).
using SMFunction = std::function<Complex(Complex z, double phi)>;
struct FrameDerivs {
    Complex X, H, V;
};
FrameDerivs frame_derivs_fd(const ThermostatSpec& spec, const SMFunction& u, Complex z, double phi,
                            double step = 1e-4);

}  // namespace thermolab
