#include "thermolab/families.hpp"

#include <cmath>
#include <random>

#include "thermolab/errors.hpp"
#include "thermolab/pde.hpp"

namespace thermolab {

ThermostatSpec make_theoremA_spec(double c, double f0) {
    if (!(c > 0)) throw SchemaError("c", "curvature scale must be positive");
    ThermostatSpec s;
    s.c = c;
    s.group = shared_genus2();
    if (f0 != 0.0) s.f = std::make_shared<ConstantField>(f0);
    s.label = "theoremA";
    return s;
}

double theoremA_slope_magnitude(double c, double f0) {
    return f0 * f0 < c * c ? std::sqrt(c * c - f0 * f0) : std::nan("");
}

double TheoremBSpec::r_pred(const BasePoint& b, double phi) const { return -h->value(b.z) - theta_of_v(b, phi); }

double TheoremBSpec::r_pred(const UnitTangentState& s) const { return r_pred(eval_base(spec, s.z), s.phi); }

TheoremBSpec make_theoremB_spec(double c, double epsilon, double rho0, Complex center) {
    if (!(c > 0)) throw SchemaError("c", "curvature scale must be positive");
    if (!(std::abs(epsilon) < c)) throw SchemaError("epsilon", "need |epsilon| < c so that h is real");
    auto g = shared_genus2();
    if (!(hyp_distance(0.0, center) + rho0 < g->inradius()))
        throw SchemaError("rho0", "bump support must lie inside the inscribed disk");
    TheoremBSpec b;
    b.c = c;
    using K = RadialOuter::Kind;
    b.f = std::make_shared<RadialBumpField>(center, rho0, epsilon);
    b.h = std::make_shared<RadialBumpField>(center, rho0, epsilon, RadialOuter{K::SqrtComplement, 1.0, c});
    b.W = std::make_shared<RadialBumpField>(center, rho0, epsilon, RadialOuter{K::Arcsin, -1.0, c});
    b.spec.c = c;
    b.spec.group = g;
    b.spec.f = b.f;
    if (epsilon != 0.0) b.spec.theta.push_back({FormKind::Rotated, 1.0, b.W});
    b.spec.label = "theoremB";
    return b;
}

ThermostatSpec apply_time_change(const ThermostatSpec& spec, FieldPtr U) {
    ThermostatSpec out = spec;
    std::vector<std::pair<double, FieldPtr>> u_terms;
    if (spec.u) u_terms.push_back({1.0, spec.u});
    u_terms.push_back({-1.0, U});
    out.u = std::make_shared<SumField>(u_terms);
    if (spec.f) out.f = std::make_shared<ExpScaledField>(spec.f, U, 1.0);
    bool merged = false;
    for (auto& t : out.theta)
        if (t.kind == FormKind::Gradient && t.potential == U) {
            t.coef += 1.0;
            merged = true;
        }
    if (!merged) out.theta.push_back({FormKind::Gradient, 1.0, U});
    std::erase_if(out.theta, [](const OneFormTerm& t) { return t.coef == 0.0; });
    if (spec.q) {
        std::vector<std::pair<double, FieldPtr>> s_terms;
        if (spec.q_log_weight) s_terms.push_back({1.0, spec.q_log_weight});
        s_terms.push_back({-1.0, U});
        out.q_log_weight = std::make_shared<SumField>(s_terms);
    }
    out.label = spec.label + "+time_change";
    return out;
}

ThermostatSpec make_gradient_thermostat(double c, FieldPtr U) {
    ThermostatSpec s;
    s.c = c;
    s.group = shared_genus2();
    s.theta.push_back({FormKind::Gradient, -1.0, std::move(U)});
    s.label = "gradient_thermostat";
    return s;
}

ThermostatSpec make_rotated_thermostat(double c, FieldPtr U) {
    ThermostatSpec s;
    s.c = c;
    s.group = shared_genus2();
    s.theta.push_back({FormKind::Rotated, 1.0, std::move(U)});
    s.label = "rotated_thermostat";
    return s;
}

const QuadDiffField& shared_invariant_qd() {
    static const QuadPtr q = poincare_qd(*shared_genus2(), {1.0}).q;
    return *q;
}

ThermostatSpec make_random_spec(std::uint64_t seed, double epsilon, bool with_q) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    auto g = shared_genus2();
    // potentials get amplitude ~ rho0^2 / 4 so that their Hessians, which
    // enter H(lambda), stay of size epsilon
    auto bump = [&](bool potential) {
        double rho0 = 0.9 + 0.5 * U(rng);
        double room = g->inradius() - rho0 - 0.05;
        double d = room * U(rng);
        Complex center = std::polar(std::tanh(d / 2), kTwoPi * U(rng));
        double amp = epsilon * (2 * U(rng) - 1) * (potential ? 0.25 * rho0 * rho0 : 1.0);
        return std::make_shared<RadialBumpField>(center, rho0, amp);
    };
    ThermostatSpec s;
    s.group = g;
    s.f = bump(false);
    s.theta.push_back({U(rng) < 0.5 ? FormKind::Gradient : FormKind::Rotated, 1.0, bump(true)});
    if (with_q) {
        const QuadDiffField& base = shared_invariant_qd();
        Complex a = std::polar(0.25 * epsilon * U(rng) / PoincareOptions{}.amplitude, kTwoPi * U(rng));
        std::vector<Complex> co = base.coeffs();
        for (auto& x : co) x *= a;
        s.q = std::make_shared<QuadDiffField>(co, base.invariance_defect());
    }
    s.label = "random";
    return s;
}

}  // namespace thermolab
