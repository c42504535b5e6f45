#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "thermolab/families.hpp"
#include "thermolab/fourier.hpp"
#include "thermolab/liouville.hpp"

using namespace thermolab;

namespace {

std::vector<Complex> naive_dft(const std::vector<Complex>& v) {
    std::size_t N = v.size();
    std::vector<Complex> c(N);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t j = 0; j < N; ++j) c[n] += v[j] * std::polar(1.0, -kTwoPi * double(n * j) / N);
        c[n] /= double(N);
    }
    return c;
}

/// Real trigonometric polynomial with random coefficients up to degree `deg`.
struct TrigPoly {
    std::vector<Complex> a;  // a[k] for k = 0..deg, a[0] real
    double operator()(double phi) const {
        double s = a[0].real();
        for (std::size_t k = 1; k < a.size(); ++k) s += 2.0 * (a[k] * std::polar(1.0, k * phi)).real();
        return s;
    }
    double derivative(double phi) const {
        double s = 0;
        for (std::size_t k = 1; k < a.size(); ++k) s += 2.0 * (Complex(0, k) * a[k] * std::polar(1.0, k * phi)).real();
        return s;
    }
};

TrigPoly random_poly(std::mt19937_64& rng, int deg) {
    std::normal_distribution<double> n(0.0, 1.0);
    TrigPoly p;
    p.a.push_back(n(rng));
    for (int k = 1; k <= deg; ++k) p.a.emplace_back(n(rng) / k, n(rng) / k);
    return p;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double w = 0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
    return w;
}

}  // namespace

TEST_CASE("fiber DFT matches the naive sum") {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int N : {8, 16, 30}) {
        std::vector<Complex> v(N);
        for (auto& x : v) x = Complex(n(rng), n(rng));
        auto fast = fiber_dft(v), slow = naive_dft(v);
        for (int j = 0; j < N; ++j) CHECK(std::abs(fast[j] - slow[j]) < 1e-13);
        auto back = fiber_idft(fast);
        for (int j = 0; j < N; ++j) CHECK(std::abs(back[j] - v[j]) < 1e-13);
    }
}

TEST_CASE("spectral derivative of trigonometric polynomials") {
    std::mt19937_64 rng(72);
    TrigPoly p = random_poly(rng, 7);
    const int N = 32;
    std::vector<double> v(N), dv(N);
    for (int j = 0; j < N; ++j) {
        v[j] = p(kTwoPi * j / N);
        dv[j] = p.derivative(kTwoPi * j / N);
    }
    CHECK(max_gap(spectral_derivative(v), dv) < 1e-12);

    // V as a multiplier and V^2 Q_k = -k^2 Q_k
    FiberModes m = fiber_decompose(v, 0.0);
    CHECK(max_gap(m.V().values(), dv) < 1e-12);
    for (int k = 1; k <= 7; ++k) {
        FiberModes single = m;
        for (int n = 0; n < N; ++n) single.c[n] = 0;
        single.coef(k) = m.coef(k);
        single.coef(-k) = m.coef(-k);
        auto vv = single.V().V().values();
        auto qk = m.Q_on_grid(k);
        for (int j = 0; j < N; ++j) CHECK(vv[j] == doctest::Approx(-k * k * qk[j]).epsilon(1e-12).scale(1.0));
    }

    // the Nyquist mode carries no derivative
    std::vector<double> alt(N);
    for (int j = 0; j < N; ++j) alt[j] = (j % 2 == 0) ? 1.0 : -1.0;
    for (double d : spectral_derivative(alt)) CHECK(std::abs(d) < 1e-13);
}

TEST_CASE("mode sums, Parseval and orthogonality") {
    std::mt19937_64 rng(73);
    TrigPoly p = random_poly(rng, 5);
    const int N = 16;
    FiberModes m = fiber_decompose([&](double phi) { return p(phi); }, 0.1, N);
    double mean_sq = 0;
    for (int j = 0; j < N; ++j) mean_sq += p(kTwoPi * j / N) * p(kTwoPi * j / N) / N;
    CHECK(m.parseval() == doctest::Approx(mean_sq).epsilon(1e-13));

    for (double phi : {0.0, 0.7, 2.9}) {
        double s = 0;
        for (int k = 0; k <= 5; ++k) s += m.Q(k, phi);
        CHECK(s == doctest::Approx(p(phi)).epsilon(1e-13));
    }
    for (int j = 0; j <= 5; ++j)
        for (int k = j + 1; k <= 5; ++k) {
            auto a = m.Q_on_grid(j), b = m.Q_on_grid(k);
            double dot = 0;
            for (int i = 0; i < N; ++i) dot += a[i] * b[i] / N;
            CHECK(std::abs(dot) < 1e-13);
        }
    for (int k = 6; k < 8; ++k) CHECK(std::abs(m.coef(k)) < 1e-14);
}

TEST_CASE("lambda has fiber degree at most two") {
    auto g = shared_genus2();
    std::mt19937_64 rng(74);
    ThermostatSpec mag = make_theoremA_spec(1.0, 0.5);
    TheoremBSpec b = make_theoremB_spec(1.0, 0.3, 1.2);
    ThermostatSpec gen = make_random_spec(75, 0.4, true);
    for (int trial = 0; trial < 5; ++trial) {
        Complex z = testsupport::random_octagon_point(rng, *g);

        FiberModes mm = lambda_modes(mag, z, 16);
        CHECK(mm.coef(0).real() == doctest::Approx(0.5).epsilon(1e-14));
        for (int n = 1; n < 16; ++n) CHECK(std::abs(mm.c[n]) < 1e-14);

        FiberModes bm = lambda_modes(b.spec, z, 16);
        for (int k = 2; k <= 8; ++k) CHECK(std::abs(bm.coef(k)) < 1e-13);

        FiberModes gm = lambda_modes(gen, z, 16);
        for (int k = 3; k <= 8; ++k) CHECK(std::abs(gm.coef(k)) < 1e-13);

        // Q_1 is theta(iv), Q_2 the quadratic part; P_1 = theta(v), P_2 = -V(q)/2
        BasePoint bp = eval_base(gen, z);
        FiberModes P = p_k_transform(gm);
        for (double phi : {0.3, 1.9, 4.4}) {
            CHECK(gm.Q(0, phi) == doctest::Approx(bp.f.v).epsilon(1e-12).scale(1.0));
            CHECK(gm.Q(1, phi) == doctest::Approx(theta_of_iv(bp, phi)).epsilon(1e-12).scale(1.0));
            CHECK(gm.Q(2, phi) == doctest::Approx(q_of_v(bp, phi)).epsilon(1e-12).scale(1.0));
            CHECK(P.Q(1, phi) == doctest::Approx(theta_of_v(bp, phi)).epsilon(1e-12).scale(1.0));
            CHECK(P.Q(2, phi) == doctest::Approx(-0.5 * vq_of_v(bp, phi)).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("tail weights") {
    CHECK(fourier_tail_weight(1) == 0.0);
    CHECK(fourier_tail_weight(2) == 0.0);
    for (int k = 3; k < 10; ++k) {
        double a = (k * k + 2) / 3.0;
        CHECK(fourier_tail_weight(k) == doctest::Approx(a * a - k * k));
        CHECK(fourier_tail_weight(k) > 0);
    }
}

TEST_CASE("Fourier route equals the general route for any slope") {
    // the two integrands agree fiber by fiber once every mode of lambda,
    // including k >= 3, is accounted for
    auto g = shared_genus2();
    QuadratureGrid grid = build_grid(*g, 32, 16);
    std::mt19937_64 rng(76);
    std::vector<double> lam(grid.size()), r(grid.size()), fac(grid.bases.size());
    std::uniform_real_distribution<double> U(0.5, 1.5);
    for (auto& x : fac) x = U(rng);
    for (std::size_t b = 0; b < grid.bases.size(); ++b) {
        TrigPoly pl = random_poly(rng, 6), pr = random_poly(rng, 4);
        for (int j = 0; j < 16; ++j) {
            lam[b * 16 + j] = pl(kTwoPi * j / 16);
            r[b * 16 + j] = pr(kTwoPi * j / 16);
        }
    }
    double a = gv_fourier_from_values(grid, fac, lam, r), b = gv_general_from_values(grid, fac, lam, r);
    CHECK(a == doctest::Approx(b).epsilon(1e-12));

    // dropping the tail breaks the identity
    double plain = kGaussBonnet;
    std::vector<double> vals(grid.size());
    for (std::size_t bi = 0; bi < grid.bases.size(); ++bi) {
        std::vector<double> l(lam.begin() + bi * 16, lam.begin() + (bi + 1) * 16);
        std::vector<double> rr(r.begin() + bi * 16, r.begin() + (bi + 1) * 16);
        auto P = p_k_transform(fiber_decompose(l, 0.0)).values();
        for (int j = 0; j < 16; ++j) rr[j] += P[j];
        auto vs = spectral_derivative(rr);
        for (int j = 0; j < 16; ++j) vals[bi * 16 + j] = -3.0 * vs[j] * vs[j];
    }
    plain += integrate(grid, fac, vals);
    CHECK(std::abs(plain - b) > 1e-3);
}

TEST_CASE("Guillemin-Kazhdan operators") {
    ThermostatSpec s = make_theoremA_spec(1.0, 0.0);
    auto g = shared_genus2();
    std::mt19937_64 rng(77);
    auto U = std::make_shared<RadialBumpField>(Complex(0.05, 0.0), 1.2, 0.3);

    for (int trial = 0; trial < 8; ++trial) {
        UnitTangentState st = testsupport::random_state(rng, *g);
        BasePoint b = eval_base(s, st.z);

        GKSample c = gk_apply(s, [](Complex, double) { return Complex(2.5); }, st);
        CHECK(std::abs(c.eta_plus) < 1e-10);
        CHECK(std::abs(c.eta_minus) < 1e-10);

        // on a base function: X u = du(v), H u = du(iv), v = E e^{i phi} in the chart
        Jet j = U->jet(st.z);
        double xu = b.E * (j.x * std::cos(st.phi) + j.y * std::sin(st.phi));
        double hu = b.E * (-j.x * std::sin(st.phi) + j.y * std::cos(st.phi));
        GKSample gu = gk_apply(s, [&](Complex z, double) { return Complex(U->value(z)); }, st);
        CHECK(std::abs(2.0 * gu.eta_minus.real() - xu) < 1e-7);
        CHECK(std::abs(2.0 * gu.eta_minus.imag() - hu) < 1e-7);
        CHECK(std::abs(gu.eta_plus - std::conj(gu.eta_minus)) < 1e-9);

        // eta_+ raises, eta_- lowers the fiber degree
        SMFunction u1 = [&](Complex z, double phi) { return U->value(z) * std::polar(1.0, phi); };
        GKSample a0 = gk_apply(s, u1, st), a1 = gk_apply(s, u1, {st.z, st.phi + 1.1});
        CHECK(std::abs(a0.eta_plus * std::polar(1.0, -2 * st.phi) -
                       a1.eta_plus * std::polar(1.0, -2 * (st.phi + 1.1))) < 1e-8);
        CHECK(std::abs(a0.eta_minus - a1.eta_minus) < 1e-8);

        // conjugation swaps the operators
        SMFunction u1c = [&](Complex z, double phi) { return std::conj(u1(z, phi)); };
        CHECK(std::abs(gk_apply(s, u1c, st).eta_plus - std::conj(a0.eta_minus)) < 1e-9);

        // the holomorphic quadratic differential lies in the kernel of eta_-
        const QuadDiffField& q = shared_invariant_qd();
        SMFunction q2 = [&](Complex z, double phi) {
            BasePoint bz = eval_base(s, z);
            return 0.5 * bz.E * bz.E * q.w(z) * std::polar(1.0, 2 * phi);
        };
        GKSample gq = gk_apply(s, q2, st);
        CHECK(std::abs(gq.eta_minus) < 1e-8);
    }
}

TEST_CASE("closed and coclosed external fields") {
    auto U = std::make_shared<RadialBumpField>(Complex(0.1, -0.05), 1.1, 0.4);
    std::vector<UnitTangentState> states = sample_liouville(*shared_genus2(), 20, 78);
    // keep samples where the field is nontrivial
    std::vector<UnitTangentState> near;
    for (const auto& st : states)
        if (hyp_distance(st.z, Complex(0.1, -0.05)) < 1.0) near.push_back(st);
    for (double r : {0.0, 0.3, 0.6}) near.push_back({Complex(0.1 + r, -0.05), 0.4 + r});

    ClosedCoclosed grad = closed_coclosed_test(make_gradient_thermostat(1.0, U), near);
    ClosedCoclosed rot = closed_coclosed_test(make_rotated_thermostat(1.0, U), near);
    CHECK(grad.closed_residual < 1e-6);
    CHECK(rot.coclosed_residual < 1e-6);
    // non-harmonic U: the other residual is the Laplacian and does not vanish
    CHECK(grad.coclosed_residual > 1e-3);
    CHECK(rot.closed_residual > 1e-3);
}

TEST_CASE("eta_- theta_1 analytic against frame differences") {
    ThermostatSpec s = make_random_spec(79, 0.4, false);
    std::mt19937_64 rng(80);
    auto g = shared_genus2();
    SMFunction theta1 = mode_component([&](Complex z, double phi) {
        return Complex(theta_of_v(eval_base(s, z), phi));
    }, 1);
    for (int trial = 0; trial < 10; ++trial) {
        UnitTangentState st = testsupport::random_state(rng, *g);
        Complex fd = gk_apply(s, theta1, st).eta_minus;
        CHECK(std::abs(fd - eta_minus_theta1_analytic(s, st.z)) < 1e-7);
    }
}
