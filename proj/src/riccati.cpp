#include "thermolab/riccati.hpp"

#include <algorithm>
#include <cmath>

#include "thermolab/fourier.hpp"
#include "thermolab/parallel.hpp"

namespace thermolab {

double slope_at(const ThermostatSpec& spec, const UnitTangentState& s, Side which, const SlopeOptions& opt,
                double* convergence_gap) {
    double T = opt.T / spec.c;
    double h = which == Side::Plus ? opt.dt : -opt.dt;
    FlowIntegrator it(spec, s, h, true);
    long n = std::max<long>(2, std::lround(T / opt.dt));
    long half = n / 2;
    Mat2 M;
    double r_half = 0.0;
    for (long i = 0; i < n; ++i) {
        it.step();
        M = it.step_propagator() * M;
        double nm = M.norm();
        if (nm > 1e100 || nm < 1e-100) M *= 1.0 / nm;
        if (i + 1 == half) r_half = -M.c / M.d;
    }
    double r = -M.c / M.d;
    if (convergence_gap) *convergence_gap = std::isfinite(r - r_half) ? std::abs(r - r_half) : INFINITY;
    return r;
}

SlopeSample slopes_at(const ThermostatSpec& spec, const UnitTangentState& s, const SlopeOptions& opt) {
    SlopeSample out;
    out.state = s;
    double g1 = 0, g2 = 0;
    out.r_plus = slope_at(spec, s, Side::Plus, opt, &g1);
    out.r_minus = slope_at(spec, s, Side::Minus, opt, &g2);
    out.convergence_gap = std::max(g1, g2);
    out.certified = out.convergence_gap <= opt.gap_tol && std::isfinite(out.r_plus) && std::isfinite(out.r_minus);
    return out;
}

SlopeFiberProfile slope_fiber_profile(const ThermostatSpec& spec, Complex z, int N_theta, const SlopeOptions& opt) {
    SlopeFiberProfile p;
    p.z = z;
    p.N_theta = N_theta;
    p.theta = fiber_grid(N_theta);
    p.r_plus.resize(N_theta);
    p.r_minus.resize(N_theta);
    std::vector<double> gaps(N_theta);
    std::vector<char> ok(N_theta);
    parallel_for(N_theta, [&](std::size_t j) {
        SlopeSample s = slopes_at(spec, {z, p.theta[j]}, opt);
        p.r_plus[j] = s.r_plus;
        p.r_minus[j] = s.r_minus;
        gaps[j] = s.convergence_gap;
        ok[j] = s.certified;
    });
    for (int j = 0; j < N_theta; ++j) {
        p.max_convergence_gap = std::max(p.max_convergence_gap, gaps[j]);
        p.certified = p.certified && ok[j];
    }
    p.v_r_plus = spectral_derivative(p.r_plus);
    p.v_r_minus = spectral_derivative(p.r_minus);
    return p;
}

OrbitSlopes slopes_along_orbit(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt, double buffer) {
    // back up to the start of the seeding window
    FlowIntegrator back(spec, s0, -dt, false);
    long nb = std::lround(buffer / dt);
    for (long i = 0; i < nb; ++i) back.step();

    FlowIntegrator it(spec, back.state(), dt, true);
    long nw = std::lround(T / dt);
    long total = 2 * nb + nw;
    std::vector<Mat2> P(total);
    OrbitSlopes out;
    out.orbit.dt = dt;
    for (long i = 0; i < total; ++i) {
        if (i >= nb && i <= nb + nw) {
            OrbitSample smp = it.sample();
            smp.t = (i - nb) * dt;
            out.orbit.samples.push_back(smp);
            out.orbit.deck_count.push_back(it.deck_letters().size());
        }
        it.step();
        P[i] = it.step_propagator();
        out.orbit.max_speed_defect = std::max(out.orbit.max_speed_defect, it.speed_defect());
    }

    out.orbit.deck_letters = it.deck_letters();
    out.r_minus.assign(nw + 1, 0.0);
    out.r_plus.assign(nw + 1, 0.0);
    double x = 1.0, y = 0.0;
    for (long i = 0; i <= nb + nw; ++i) {
        if (i >= nb) out.r_minus[i - nb] = y / x;
        if (i == nb + nw) break;
        const Mat2& m = P[i];
        double nx = m.a * x + m.b * y, ny = m.c * x + m.d * y;
        double r = std::hypot(nx, ny);
        x = nx / r;
        y = ny / r;
    }
    x = 1.0;
    y = 0.0;
    for (long i = total; i >= nb; --i) {
        if (i <= nb + nw) out.r_plus[i - nb] = y / x;
        if (i == nb) break;
        Mat2 inv = P[i - 1].inverse();
        double nx = inv.a * x + inv.b * y, ny = inv.c * x + inv.d * y;
        double r = std::hypot(nx, ny);
        x = nx / r;
        y = ny / r;
    }
    return out;
}

namespace {

double d4(const std::vector<double>& f, std::size_t i, double h) {
    return (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / (12 * h);
}

}  // namespace

double riccati_residual(const Orbit& orbit, const std::vector<double>& r) {
    std::size_t n = orbit.samples.size();
    std::vector<double> rv(n), vl(n);
    for (std::size_t i = 0; i < n; ++i) {
        vl[i] = orbit.samples[i].vlambda;
        rv[i] = r[i] - vl[i];
    }
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        double k = orbit.samples[i].kappa0 + d4(vl, i, orbit.dt);
        double res = d4(rv, i, orbit.dt) + r[i] * rv[i] + k;
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

double lemma_vol_check(const Orbit& orbit, const std::vector<double>& r_plus, const std::vector<double>& r_minus) {
    std::size_t n = orbit.samples.size();
    std::vector<double> lg(n);
    for (std::size_t i = 0; i < n; ++i) lg[i] = std::log(std::abs(r_plus[i] - r_minus[i]));
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) {
        double res = d4(lg, i, orbit.dt) - orbit.samples[i].vlambda + (r_plus[i] + r_minus[i]);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

double transport_slope(const Mat2& P, double r) { return (P.c + P.d * r) / (P.a + P.b * r); }

HyperbolicityReport hyperbolicity_certificate(const ThermostatSpec& spec, const std::vector<UnitTangentState>& states,
                                              const SlopeOptions& opt, double margin) {
    HyperbolicityReport rep;
    rep.n_samples = static_cast<int>(states.size());
    rep.samples.resize(states.size());
    parallel_for(states.size(), [&](std::size_t i) { rep.samples[i] = slopes_at(spec, states[i], opt); });
    rep.delta_min = INFINITY;
    for (const auto& s : rep.samples) {
        double gap = s.r_minus - s.r_plus;
        rep.delta_min = std::min(rep.delta_min, std::isfinite(gap) ? gap : -INFINITY);
        rep.max_gap = std::max(rep.max_gap, s.convergence_gap);
        rep.max_abs_slope = std::max({rep.max_abs_slope, std::abs(s.r_plus), std::abs(s.r_minus)});
        if (!s.certified) ++rep.n_flagged;
    }
    rep.certified = rep.n_flagged == 0 && rep.delta_min > margin;
    return rep;
}

SlopeField compute_slope_field(const ThermostatSpec& spec, const std::vector<Complex>& bases, int N_theta,
                               const SlopeOptions& opt) {
    SlopeField f;
    f.bases = bases;
    f.N_theta = N_theta;
    std::size_t n = bases.size() * N_theta;
    f.r_plus.resize(n);
    f.r_minus.resize(n);
    f.v_r_plus.resize(n);
    f.v_r_minus.resize(n);
    std::vector<double> gaps(bases.size());
    std::vector<int> flagged(bases.size());
    parallel_for(bases.size(), [&](std::size_t b) {
        std::vector<double> rp(N_theta), rm(N_theta);
        double g = 0;
        int nf = 0;
        for (int j = 0; j < N_theta; ++j) {
            SlopeSample s = slopes_at(spec, {bases[b], kTwoPi * j / N_theta}, opt);
            rp[j] = s.r_plus;
            rm[j] = s.r_minus;
            g = std::max(g, s.convergence_gap);
            if (!s.certified) ++nf;
        }
        auto vp = spectral_derivative(rp), vm = spectral_derivative(rm);
        std::copy(rp.begin(), rp.end(), f.r_plus.begin() + b * N_theta);
        std::copy(rm.begin(), rm.end(), f.r_minus.begin() + b * N_theta);
        std::copy(vp.begin(), vp.end(), f.v_r_plus.begin() + b * N_theta);
        std::copy(vm.begin(), vm.end(), f.v_r_minus.begin() + b * N_theta);
        gaps[b] = g;
        flagged[b] = nf;
    });
    for (std::size_t b = 0; b < bases.size(); ++b) {
        f.max_convergence_gap = std::max(f.max_convergence_gap, gaps[b]);
        f.n_flagged += flagged[b];
    }
    return f;
}

}  // namespace thermolab
