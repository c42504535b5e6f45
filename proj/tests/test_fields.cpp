#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "support.hpp"
#include "thermolab/errors.hpp"
#include "thermolab/fields.hpp"

using namespace thermolab;
using namespace std::complex_literals;
using testsupport::random_state;

namespace {

// exp(1 - 1/(1 - t^2)) written out independently of the library
double bump_oracle(double d, double rho0) {
    double t = d / rho0;
    return t < 1 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
}

// Chart jet of a scalar field by central differences of its values.
Jet fd_jet(const ScalarField& F, Complex z, double h = 1e-4) {
    auto v = [&](double dx, double dy) { return F.value(z + Complex(dx, dy)); };
    Jet j;
    j.v = v(0, 0);
    j.x = (v(-2 * h, 0) - 8 * v(-h, 0) + 8 * v(h, 0) - v(2 * h, 0)) / (12 * h);
    j.y = (v(0, -2 * h) - 8 * v(0, -h) + 8 * v(0, h) - v(0, 2 * h)) / (12 * h);
    // second derivatives from the analytic first derivatives
    auto gx = [&](double dx, double dy) { return F.jet(z + Complex(dx, dy)).x; };
    auto gy = [&](double dx, double dy) { return F.jet(z + Complex(dx, dy)).y; };
    j.xx = (gx(-2 * h, 0) - 8 * gx(-h, 0) + 8 * gx(h, 0) - gx(2 * h, 0)) / (12 * h);
    j.xy = (gx(0, -2 * h) - 8 * gx(0, -h) + 8 * gx(0, h) - gx(0, 2 * h)) / (12 * h);
    j.yy = (gy(0, -2 * h) - 8 * gy(0, -h) + 8 * gy(0, h) - gy(0, 2 * h)) / (12 * h);
    return j;
}

void check_jet_close(const Jet& a, const Jet& b, double tol1, double tol2) {
    CHECK(std::abs(a.v - b.v) < 1e-14 + tol1 * 1e-3);
    CHECK(std::abs(a.x - b.x) < tol1);
    CHECK(std::abs(a.y - b.y) < tol1);
    CHECK(std::abs(a.xx - b.xx) < tol2);
    CHECK(std::abs(a.xy - b.xy) < tol2);
    CHECK(std::abs(a.yy - b.yy) < tol2);
}

ThermostatSpec spec_with(std::vector<OneFormTerm> theta, FieldPtr f = nullptr, double c = 1.0) {
    ThermostatSpec s;
    s.c = c;
    s.group = shared_genus2();
    s.f = std::move(f);
    s.theta = std::move(theta);
    return s;
}

}  // namespace

TEST_CASE("radial bump matches the closed-form profile") {
    Complex center(0.1, -0.2);
    RadialBumpField F(center, 0.9, 0.4);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 300; ++i) {
        Complex z = testsupport::random_disk_point(rng, 0.7);
        double d = hyp_distance(z, center);
        CHECK(F.value(z) == doctest::Approx(0.4 * bump_oracle(d, 0.9)).epsilon(1e-12));
        CHECK(F.profile(d) == doctest::Approx(0.4 * bump_oracle(d, 0.9)).epsilon(1e-12));
    }
    CHECK(F.value(Complex(0.9, 0)) == 0.0);
    CHECK(F.value(center) == doctest::Approx(0.4));
}

TEST_CASE("field jets agree with finite differences") {
    auto B = std::make_shared<RadialBumpField>(Complex(0.05, 0.1), 1.0, 0.3);
    auto B2 = std::make_shared<RadialBumpField>(Complex(-0.1, 0.0), 0.8, -0.2);
    RadialBumpField Bs(Complex(0.05, 0.1), 1.0, 0.3, {RadialOuter::Kind::SqrtComplement, 1.0, 1.0});
    RadialBumpField Ba(Complex(0.05, 0.1), 1.0, 0.3, {RadialOuter::Kind::Arcsin, -1.0, 1.0});
    SumField S({{1.0, B}, {-2.0, B2}});
    ExpScaledField X(B, B2, 1.5);
    std::mt19937_64 rng(4);
    for (int i = 0; i < 50; ++i) {
        Complex z = testsupport::random_disk_point(rng, 0.45);
        check_jet_close(B->jet(z), fd_jet(*B, z), 1e-8, 1e-7);
        check_jet_close(Bs.jet(z), fd_jet(Bs, z), 1e-8, 1e-7);
        check_jet_close(Ba.jet(z), fd_jet(Ba, z), 1e-8, 1e-7);
        check_jet_close(S.jet(z), fd_jet(S, z), 1e-8, 1e-7);
        check_jet_close(X.jet(z), fd_jet(X, z), 1e-8, 1e-7);
        double y = B->value(z);
        CHECK(Bs.value(z) == doctest::Approx(std::sqrt(1 - y * y)).epsilon(1e-14));
        CHECK(Ba.value(z) == doctest::Approx(-std::asin(y)).epsilon(1e-14));
        CHECK(X.value(z) == doctest::Approx(y * std::exp(1.5 * B2->value(z))).epsilon(1e-14));
    }
}

TEST_CASE("squared distance jet") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        Complex p = testsupport::random_disk_point(rng, 0.5), z = testsupport::random_disk_point(rng, 0.5);
        Jet D = squared_distance_jet(z, p);
        double d = hyp_distance(z, p);
        CHECK(D.v == doctest::Approx(d * d).epsilon(1e-12));
        auto dd = [&](Complex w) { double e = hyp_distance(w, p); return e * e; };
        double h = 1e-5;
        CHECK(D.x == doctest::Approx((dd(z + h) - dd(z - h)) / (2 * h)).epsilon(1e-6));
        CHECK(D.y == doctest::Approx((dd(z + Complex(0, h)) - dd(z - Complex(0, h))) / (2 * h)).epsilon(1e-6));
    }
}

TEST_CASE("tabulated jets follow the base field") {
    auto B = std::make_shared<RadialBumpField>(Complex(0.05, 0.0), 2.5, 0.5);
    // componentwise cubic interpolation: errors fall by ~8 per grid halving
    auto errors = [&](int n) {
        TabulatedJetField T(B, 0.8, n);
        std::mt19937_64 rng(6);
        std::array<double, 3> e{};
        for (int i = 0; i < 500; ++i) {
            Complex z = testsupport::random_disk_point(rng, 0.7);
            Jet a = T.jet(z), b = B->jet(z);
            e[0] = std::max(e[0], std::abs(a.v - b.v));
            e[1] = std::max({e[1], std::abs(a.x - b.x), std::abs(a.y - b.y)});
            e[2] = std::max({e[2], std::abs(a.xx - b.xx), std::abs(a.xy - b.xy), std::abs(a.yy - b.yy)});
        }
        return e;
    };
    auto e1 = errors(200), e2 = errors(400);
    for (int k = 0; k < 3; ++k) {
        INFO("component order " << k << ": " << e1[k] << " -> " << e2[k]);
        CHECK(e1[k] / e2[k] > 6.0);
    }
    CHECK(e2[0] < 1e-6);
    TabulatedJetField T(B, 0.8, 400);
    Complex out(0.0, 0.85);
    CHECK(T.value(out) == B->value(out));
}

TEST_CASE("conformal factor and curvature") {
    ThermostatSpec s = spec_with({}, nullptr, 2.0);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        Complex z = testsupport::random_disk_point(rng, 0.8);
        BasePoint b = eval_base(s, z);
        CHECK(b.E == doctest::Approx((1 - std::norm(z)) * 2.0 / 2.0).epsilon(1e-13));
        CHECK(b.K == doctest::Approx(-4.0).epsilon(1e-10));
    }
    s.u = std::make_shared<ConstantField>(0.3);
    CHECK(curvature(s, Complex(0.2, 0.3)) == doctest::Approx(-4.0 * std::exp(-0.6)).epsilon(1e-10));

    // K = -e^{-2 sigma} Lap(sigma) against a finite-difference Laplacian
    s.u = std::make_shared<RadialBumpField>(Complex(0.0, 0.1), 0.9, 0.2);
    for (int i = 0; i < 20; ++i) {
        Complex z = testsupport::random_disk_point(rng, 0.5);
        auto sig = [&](Complex w) { return std::log(2.0 / ((1 - std::norm(w)) * 2.0)) + s.u->value(w); };
        double h = 1e-4;
        double lap = (sig(z + h) + sig(z - h) + sig(z + Complex(0, h)) + sig(z - Complex(0, h)) - 4 * sig(z)) / (h * h);
        CHECK(curvature(s, z) == doctest::Approx(-std::exp(-2 * sig(z)) * lap).epsilon(1e-5));
    }
}

TEST_CASE("lambda is invariant under the deck group") {
    auto g = shared_genus2();
    ThermostatSpec s = make_random_spec(11, 0.3, false);
    std::mt19937_64 rng(8);
    double worst = 0;
    for (int i = 0; i < 1000; ++i) {
        UnitTangentState st = random_state(rng, *g);
        int k = i % 8;
        const MobiusTransform& m = g->generators()[k];
        Complex z1 = m.apply(st.z);
        ReducedState r = g->reduce(z1, m.push_angle(st.z, st.phi));
        double l0 = lambda_eval(s, st), l1 = lambda_eval(s, r.state);
        worst = std::max(worst, std::abs(l0 - l1));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("fiber derivatives") {
    auto g = shared_genus2();
    ThermostatSpec s = make_random_spec(12, 0.4, true);
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
        UnitTangentState st = random_state(rng, *g);
        auto lam = [&](double dphi) { return lambda_eval(s, {st.z, st.phi + dphi}); };
        double h = 1e-3;
        double d1 = (lam(-2 * h) - 8 * lam(-h) + 8 * lam(h) - lam(2 * h)) / (12 * h);
        double d2 = (-lam(-2 * h) + 16 * lam(-h) - 30 * lam(0) + 16 * lam(h) - lam(2 * h)) / (12 * h * h);
        auto [vl, vvl] = lambda_fiber_derivs(s, st);
        CHECK(std::abs(vl - d1) < 1e-9);
        CHECK(std::abs(vvl - d2) < 1e-6);

        BasePoint b = eval_base(s, st.z);
        auto th = [&](double dphi) { return theta_of_v(b, st.phi + dphi); };
        double t1 = (th(-2 * h) - 8 * th(-h) + 8 * th(h) - th(2 * h)) / (12 * h);
        CHECK(std::abs(t1 - theta_of_iv(b, st.phi)) < 1e-10);
        // V^2 theta = -theta: theta(i iv) = -theta(v)
        CHECK(std::abs(theta_of_iv(b, st.phi + kPi / 2) + th(0)) < 1e-14);
        auto qv = [&](double dphi) { return q_of_v(b, st.phi + dphi); };
        double q1 = (qv(-2 * h) - 8 * qv(-h) + 8 * qv(h) - qv(2 * h)) / (12 * h);
        CHECK(std::abs(q1 - vq_of_v(b, st.phi)) < 1e-10);
    }
    // basepoint functions are annihilated exactly
    ThermostatSpec mag = spec_with({}, std::make_shared<RadialBumpField>(0.0, 1.0, 0.5));
    for (int i = 0; i < 20; ++i) {
        auto [vl, vvl] = lambda_fiber_derivs(mag, random_state(rng, *g));
        CHECK(vl == 0.0);
        CHECK(vvl == 0.0);
    }
}

TEST_CASE("horizontal derivatives: analytic against finite differences") {
    auto g = shared_genus2();
    std::mt19937_64 rng(10);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        ThermostatSpec s = make_random_spec(seed, 0.4, true);
        s.c = 1.3;
        for (int i = 0; i < 60; ++i) {
            UnitTangentState st = random_state(rng, *g);
            st.z *= 0.9;
            HorizontalDerivs a = lambda_horizontal_derivs(s, st), n = lambda_horizontal_derivs_fd(s, st);
            CHECK(std::abs(a.X - n.X) < 1e-6);
            CHECK(std::abs(a.H - n.H) < 1e-6);
        }
    }
}

TEST_CASE("divergence of the external field") {
    auto U = std::make_shared<RadialBumpField>(Complex(0.1, 0.05), 1.1, 0.3);
    ThermostatSpec grad = spec_with({{FormKind::Gradient, 1.0, U}});
    ThermostatSpec rot = spec_with({{FormKind::Rotated, 1.0, U}});
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        Complex z = testsupport::random_disk_point(rng, 0.5);
        CHECK(divergence(rot, z) == 0.0);
        // radial Laplacian F'' + coth(d) F' of F(d) = A b(d / rho0)
        double d = hyp_distance(z, U->center());
        auto F1 = [&](double r) {
            double t = r / 1.1, om = 1 - t * t;
            return t < 1 ? 0.3 * bump_oracle(r, 1.1) * (-2 * t / (1.1 * om * om)) : 0.0;
        };
        double h = 1e-5;
        double F2 = (F1(d + h) - F1(d - h)) / (2 * h);
        double lap = d > 1e-3 ? F2 + F1(d) / std::tanh(d) : 2 * F2;
        CHECK(std::abs(divergence(grad, z) - lap) < 1e-7);
    }
    // div e = X(theta) + H V(theta) by frame differences
    for (const ThermostatSpec* s : {&grad, &rot}) {
        for (int i = 0; i < 30; ++i) {
            Complex z = testsupport::random_disk_point(rng, 0.5);
            double phi = kTwoPi * i / 30.0;
            SMFunction th = [&](Complex w, double p) { return Complex(theta_of_v(eval_base(*s, w), p)); };
            SMFunction vth = [&](Complex w, double p) { return Complex(theta_of_iv(eval_base(*s, w), p)); };
            double lhs = frame_derivs_fd(*s, th, z, phi).X.real() + frame_derivs_fd(*s, vth, z, phi).H.real();
            CHECK(std::abs(lhs - divergence(*s, z)) < 1e-6);
        }
    }
}

TEST_CASE("quadratic differential derivative") {
    QuadDiffField q({Complex(0.1, 0.2), Complex(-0.3, 0.05), Complex(0.02, -0.1), Complex(0.0, 0.07)});
    std::mt19937_64 rng(12);
    for (int i = 0; i < 50; ++i) {
        Complex z = testsupport::random_disk_point(rng, 0.8);
        double h = 1e-5;
        Complex fd = (q.w(z + h) - q.w(z - h)) / (2 * h);
        CHECK(std::abs(q.dw(z) - fd) < 1e-8);
        Complex direct = 0.1 + 0.2i + (-0.3 + 0.05i) * z + (0.02 - 0.1i) * z * z + 0.07i * z * z * z;
        CHECK(std::abs(q.w(z) - direct) < 1e-14);
    }
}

TEST_CASE("q(v,v) is trace-free and has fiber degree two") {
    ThermostatSpec s = make_random_spec(5, 0.4, true);
    std::mt19937_64 rng(13);
    for (int i = 0; i < 50; ++i) {
        BasePoint b = eval_base(s, testsupport::random_disk_point(rng, 0.7));
        double phi = 0.37 * i;
        // q(v,v) + q(iv,iv) = 0 and q(-v,-v) = q(v,v)
        CHECK(std::abs(q_of_v(b, phi) + q_of_v(b, phi + kPi / 2)) < 1e-14);
        CHECK(std::abs(q_of_v(b, phi) - q_of_v(b, phi + kPi)) < 1e-14);
        // det_g q = -(q(v,v)^2 + q(v,iv)^2)
        double qiv = 0.5 * vq_of_v(b, phi);
        CHECK(det_q(b) == doctest::Approx(-(q_of_v(b, phi) * q_of_v(b, phi) + qiv * qiv)).epsilon(1e-12));
    }
}
