#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "thermolab/errors.hpp"
#include "thermolab/families.hpp"
#include "thermolab/riccati.hpp"

using namespace thermolab;

namespace {

/// du applied to the chart direction e^{i a}, scaled to a unit vector.
double d_along(const Jet& j, const BasePoint& b, double a) { return b.E * (j.x * std::cos(a) + j.y * std::sin(a)); }

}  // namespace

TEST_CASE("constructors validate their parameters") {
    CHECK_THROWS_AS(make_theoremA_spec(0.0, 0.1), SchemaError);
    CHECK_THROWS_AS(make_theoremB_spec(1.0, 1.0, 1.0), SchemaError);
    CHECK_THROWS_AS(make_theoremB_spec(-1.0, 0.1, 1.0), SchemaError);
    // support must stay inside the inscribed disk
    CHECK_THROWS_AS(make_theoremB_spec(1.0, 0.3, 1.6), SchemaError);
    CHECK_THROWS_AS(make_theoremB_spec(1.0, 0.3, 1.2, Complex(0.3, 0.0)), SchemaError);
    try {
        make_theoremB_spec(1.0, 2.0, 1.0);
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("epsilon") != std::string::npos);
    }
    CHECK_NOTHROW(make_theoremA_spec(1.0, 1.5));
}

TEST_CASE("Theorem A family") {
    ThermostatSpec s = make_theoremA_spec(1.5, 0.6);
    CHECK(s.is_magnetic());
    CHECK(lambda_eval(s, {Complex(0.2, 0.1), 1.0}) == 0.6);
    CHECK(curvature(s, Complex(0.3, -0.2)) == doctest::Approx(-2.25));
    CHECK(theoremA_slope_magnitude(1.5, 0.6) == doctest::Approx(std::sqrt(2.25 - 0.36)));
    CHECK(std::isnan(theoremA_slope_magnitude(1.0, 1.0)));
    CHECK_FALSE(make_theoremA_spec(1.0, 0.0).f);
}

TEST_CASE("Theorem B family: field identities") {
    TheoremBSpec b = make_theoremB_spec(1.3, 0.4, 1.1, Complex(0.1, -0.05));
    std::mt19937_64 rng(101);
    auto g = shared_genus2();
    for (int i = 0; i < 300; ++i) {
        UnitTangentState st = testsupport::random_state(rng, *g);
        BasePoint bp = eval_base(b.spec, st.z);
        Jet f = b.f->jet(st.z), h = b.h->jet(st.z);
        CHECK(f.v * f.v + h.v * h.v == doctest::Approx(1.69).epsilon(1e-12));
        CHECK(h.v > 0);
        // the external field is a rotated gradient, so divergence free
        CHECK(std::abs(divergence(b.spec, st.z)) < 1e-9);
        // c^2 theta(v) + (f dh - h df)(iv) = 0
        double fdh = f.v * d_along(h, bp, st.phi + kPi / 2), hdf = h.v * d_along(f, bp, st.phi + kPi / 2);
        CHECK(std::abs(1.69 * theta_of_v(bp, st.phi) + fdh - hdf) < 1e-10);
        // theta = -dW o i with the arcsin potential
        Jet W = b.W->jet(st.z);
        CHECK(theta_of_v(bp, st.phi) == doctest::Approx(-d_along(W, bp, st.phi + kPi / 2)).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("Theorem B with epsilon 0 is the geodesic flow") {
    TheoremBSpec b = make_theoremB_spec(1.0, 0.0, 1.2);
    CHECK_FALSE(b.spec.has_theta());
    std::mt19937_64 rng(102);
    for (int i = 0; i < 50; ++i) {
        UnitTangentState st = testsupport::random_state(rng, *shared_genus2());
        CHECK(lambda_eval(b.spec, st) == 0.0);
        CHECK(b.r_pred(st) == doctest::Approx(-1.0));
    }
}

TEST_CASE("Theorem B predicted slope solves the Riccati equation") {
    TheoremBSpec b = make_theoremB_spec(1.0, 0.3, 1.2);
    for (UnitTangentState s0 : {UnitTangentState{Complex(0.05, 0.1), 0.9}, UnitTangentState{Complex(-0.2, 0.0), 2.5}}) {
        // the residual is pure stencil error, fourth order in dt; the bump edge
        // needs a fine step
        Orbit o = integrate_flow(b.spec, s0, 10.0, 1.25e-3);
        std::vector<double> r;
        for (const auto& smp : o.samples) r.push_back(b.r_pred(smp.state));
        CHECK(riccati_residual(o, r) < 1e-6);
        for (auto& x : r) x += 0.01;
        CHECK(riccati_residual(o, r) > 1e-3);
    }
}

TEST_CASE("time changes") {
    // constant U: the metric scales by e^{-2 kappa}, slopes by e^{kappa}
    const double kappa = 0.3;
    ThermostatSpec base = make_theoremA_spec(1.0, 0.5);
    ThermostatSpec scaled = apply_time_change(base, std::make_shared<ConstantField>(kappa));
    CHECK(curvature(scaled, Complex(0.1, 0.2)) == doctest::Approx(-std::exp(2 * kappa)));
    SlopeOptions o;
    o.T = 40;
    SlopeSample smp = slopes_at(scaled, {Complex(0.1, 0.2), 0.7}, o);
    CHECK(smp.r_plus == doctest::Approx(-std::exp(kappa) * std::sqrt(0.75)).epsilon(1e-8));
    CHECK(smp.r_minus == doctest::Approx(std::exp(kappa) * std::sqrt(0.75)).epsilon(1e-8));

    // a gradient thermostat is absorbed by the time change along its own potential
    auto U = std::make_shared<RadialBumpField>(Complex(0.0, 0.1), 1.0, 0.3);
    ThermostatSpec grad = make_gradient_thermostat(1.0, U);
    ThermostatSpec absorbed = apply_time_change(grad, U);
    CHECK_FALSE(absorbed.has_theta());
    std::mt19937_64 rng(103);
    for (int i = 0; i < 20; ++i) {
        UnitTangentState st = testsupport::random_state(rng, *shared_genus2());
        CHECK(lambda_eval(absorbed, st) == 0.0);
    }

    // the time-changed lambda is e^U (lambda - dU(iv)) pointwise
    ThermostatSpec r = make_random_spec(104, 0.3, true);
    ThermostatSpec rc = apply_time_change(r, U);
    for (int i = 0; i < 20; ++i) {
        UnitTangentState st = testsupport::random_state(rng, *shared_genus2());
        BasePoint b0 = eval_base(r, st.z), b1 = eval_base(rc, st.z);
        Jet u = U->jet(st.z);
        double duiv = d_along(u, b0, st.phi + kPi / 2);
        CHECK(b1.E == doctest::Approx(std::exp(u.v) * b0.E));
        CHECK(lambda_eval(rc, st) == doctest::Approx(std::exp(u.v) * (lambda_eval(r, st) + duiv)).epsilon(1e-12));
    }
}

TEST_CASE("random specs") {
    auto g = shared_genus2();
    std::mt19937_64 rng(105);
    for (std::uint64_t seed : {106u, 107u, 108u}) {
        ThermostatSpec s = make_random_spec(seed, 0.4, true);
        REQUIRE(s.f);
        REQUIRE(s.theta.size() == 1);
        REQUIRE(s.q);
        // fields vanish outside the inscribed disk, so lambda is automorphic
        for (int i = 0; i < 200; ++i) {
            UnitTangentState st = testsupport::random_state(rng, *g);
            BasePoint b = eval_base(s, st.z);
            CHECK(std::abs(b.f.v) <= 0.4);
            CHECK(std::abs(q_of_v(b, st.phi)) <= 0.1 * (1 + 1e-9));
            if (hyp_distance(0.0, st.z) >= g->inradius()) {
                CHECK(b.f.v == 0.0);
                CHECK(b.tx == 0.0);
                CHECK(b.ty == 0.0);
            }
        }
        CHECK(s.q->invariance_defect() < 1e-4);
        // same seed, same spec
        CHECK(make_random_spec(seed, 0.4, true).describe() == s.describe());
    }
    CHECK(make_random_spec(106, 0.4).describe() != make_random_spec(107, 0.4).describe());
}
