#include "thermolab/flow.hpp"

#include <algorithm>
#include <cmath>

#include "thermolab/errors.hpp"

namespace thermolab {

double Mat2::norm() const { return std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)}); }

Mat2 Mat2::inverse() const {
    double id = 1.0 / det();
    return {d * id, -b * id, -c * id, a * id};
}

Mat2 CocycleState::phi() const {
    Mat2 m = M;
    m *= std::exp(log_scale);
    return m;
}

FlowRhs flow_rhs(const ThermostatSpec& spec, Complex z, double phi, bool with_cocycle) {
    BasePoint b = eval_base(spec, z);
    FiberValues fv = eval_fiber(b, phi);
    double c = std::cos(phi), s = std::sin(phi);
    FlowRhs r;
    r.dz = b.E * Complex(c, s);
    r.dphi = fv.lambda + b.E * (b.sigma.y * c - b.sigma.x * s);
    r.lambda = fv.lambda;
    r.vlambda = fv.vlambda;
    if (with_cocycle) r.kappa0 = b.K - eval_horizontal(b, phi).H + fv.lambda * fv.lambda;
    return r;
}

FlowIntegrator::FlowIntegrator(const ThermostatSpec& spec, UnitTangentState s0, double dt, bool with_cocycle)
    : spec_(spec), dt_(dt), cocycle_(with_cocycle) {
    if (!spec.group) throw Error("thermostat spec has no group");
    ReducedState r = spec.group->reduce(s0.z, s0.phi);
    s_ = r.state;
    letters_ = r.letters;
}

void FlowIntegrator::step() {
    const double h = dt_;
    const Complex z = s_.z;
    const double p = s_.phi;
    FlowRhs k1 = flow_rhs(spec_, z, p, cocycle_);
    FlowRhs k2 = flow_rhs(spec_, z + 0.5 * h * k1.dz, p + 0.5 * h * k1.dphi, cocycle_);
    FlowRhs k3 = flow_rhs(spec_, z + 0.5 * h * k2.dz, p + 0.5 * h * k2.dphi, cocycle_);
    FlowRhs k4 = flow_rhs(spec_, z + h * k3.dz, p + h * k3.dphi, cocycle_);
    Complex nz = z + h / 6 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
    double np = p + h / 6 * (k1.dphi + 2 * k2.dphi + 2 * k3.dphi + k4.dphi);

    {
        // unit speed of the stage values in the metric at their own points
        auto speed = [&](const FlowRhs& k, Complex at) {
            double q = 1.0 - std::norm(at);
            double sigma = std::log(2.0 / (q * spec_.c)) + (spec_.u ? spec_.u->value(at) : 0.0);
            return std::abs(std::abs(k.dz) * std::exp(sigma) - 1.0);
        };
        speed_defect_ = std::max(speed(k1, z), speed(k4, z + h * k3.dz));
    }

    if (cocycle_) {
        // RK4 on M' = A(t) M from M = I
        auto A = [](const FlowRhs& k) { return Mat2{0.0, 1.0, -k.kappa0, k.vlambda}; };
        Mat2 A1 = A(k1), A2 = A(k2), A3 = A(k3), A4 = A(k4);
        Mat2 I;
        auto axpy = [](const Mat2& x, double s, const Mat2& y) {
            return Mat2{x.a + s * y.a, x.b + s * y.b, x.c + s * y.c, x.d + s * y.d};
        };
        Mat2 K1 = A1;
        Mat2 K2 = A2 * axpy(I, 0.5 * h, K1);
        Mat2 K3 = A3 * axpy(I, 0.5 * h, K2);
        Mat2 K4 = A4 * axpy(I, h, K3);
        P_ = {1 + h / 6 * (K1.a + 2 * K2.a + 2 * K3.a + K4.a), h / 6 * (K1.b + 2 * K2.b + 2 * K3.b + K4.b),
              h / 6 * (K1.c + 2 * K2.c + 2 * K3.c + K4.c), 1 + h / 6 * (K1.d + 2 * K2.d + 2 * K3.d + K4.d)};
        step_iv_ = h / 6 * (k1.vlambda + 2 * k2.vlambda + 2 * k3.vlambda + k4.vlambda);
    }

    if (!(std::norm(nz) < 1.0 - kDiskGuard) || !std::isfinite(np)) throw NumericalFault("orbit left the disk");
    ReducedState r = spec_.group->reduce(nz, np);
    s_ = r.state;
    letters_.insert(letters_.end(), r.letters.begin(), r.letters.end());
    t_ += h;
}

OrbitSample FlowIntegrator::sample() const {
    FlowRhs r = flow_rhs(spec_, s_.z, s_.phi, true);
    return {t_, s_, r.lambda, r.vlambda, r.kappa0};
}

Orbit integrate_flow(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt) {
    if (!(T > 0) || dt == 0) throw Error("integrate_flow needs T > 0 and dt != 0");
    FlowIntegrator it(spec, s0, dt, false);
    long n = std::lround(T / std::abs(dt));
    Orbit o;
    o.dt = dt;
    o.samples.reserve(n + 1);
    o.samples.push_back(it.sample());
    o.deck_count.push_back(it.deck_letters().size());
    for (long i = 0; i < n; ++i) {
        it.step();
        o.samples.push_back(it.sample());
        o.deck_count.push_back(it.deck_letters().size());
        o.max_speed_defect = std::max(o.max_speed_defect, it.speed_defect());
    }
    o.deck_letters = it.deck_letters();
    return o;
}

std::vector<Complex> lift_orbit(const Orbit& orbit) {
    std::vector<Complex> out;
    out.reserve(orbit.samples.size());
    const auto& gens = shared_genus2()->generators();
    MobiusTransform inv;  // inverse of the accumulated deck
    std::size_t applied = 0;
    for (std::size_t i = 0; i < orbit.samples.size(); ++i) {
        for (; applied < orbit.deck_count[i]; ++applied)
            inv = inv * gens[FuchsianGroup::inverse_letter(orbit.deck_letters[applied])];
        out.push_back(inv.apply_unchecked(orbit.samples[i].state.z));
    }
    return out;
}

namespace {

void absorb(CocycleState& c, const Mat2& P) {
    c.M = P * c.M;
    c.log_abs_det += std::log(std::abs(P.det()));
    double n = c.M.norm();
    if (n > 1e100 || n < 1e-100) {
        c.M *= 1.0 / n;
        c.log_scale += std::log(n);
    }
}

}  // namespace

CocycleState integrate_cocycle(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt) {
    FlowIntegrator it(spec, s0, dt, true);
    long n = std::lround(T / std::abs(dt));
    CocycleState c;
    for (long i = 0; i < n; ++i) {
        it.step();
        absorb(c, it.step_propagator());
        c.int_vlambda += it.step_int_vlambda();
    }
    return c;
}

LyapunovResult lyapunov_exponents(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt) {
    FlowIntegrator it(spec, s0, dt, true);
    long n = std::lround(T / dt);
    long tail_start = n - n / 10;
    // Gram-Schmidt on the two columns every step: v1 tracks chi_plus, the
    // determinant tracks chi_plus + chi_minus.
    double v1x = 1.0, v1y = 0.0;
    double log1 = 0.0, logdet = 0.0;
    double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
    for (long i = 0; i < n; ++i) {
        it.step();
        const Mat2& P = it.step_propagator();
        double x = P.a * v1x + P.b * v1y, y = P.c * v1x + P.d * v1y;
        double r = std::hypot(x, y);
        log1 += std::log(r);
        v1x = x / r;
        v1y = y / r;
        logdet += std::log(std::abs(P.det()));
        if (i >= tail_start) {
            double t = (i + 1) * dt;
            double c1 = log1 / t, c2 = (logdet - log1) / t;
            lo1 = std::min(lo1, c1); hi1 = std::max(hi1, c1);
            lo2 = std::min(lo2, c2); hi2 = std::max(hi2, c2);
        }
    }
    LyapunovResult res;
    double t = n * dt;
    res.chi_plus = log1 / t;
    res.chi_minus = (logdet - log1) / t;
    res.mean_vlambda = logdet / t;
    res.drift = std::max(hi1 - lo1, hi2 - lo2);
    res.converged = res.drift <= 1e-2;
    return res;
}

ErgodicResult ergodic_average(const ThermostatSpec& spec, const Observable& obs, UnitTangentState s0, double T,
                              double dt, double drift_tol) {
    FlowIntegrator it(spec, s0, dt, false);
    long n = std::lround(T / dt);
    long burn = n / 20;
    long kept = n - burn;
    const int n_batches = 50;
    long batch_len = std::max<long>(1, kept / n_batches);
    std::vector<double> batches;
    double batch_sum = 0.0, total = 0.0;
    long in_batch = 0, counted = 0;
    long tail_start = burn + kept - kept / 10;
    double lo = 1e300, hi = -1e300;
    for (long i = 0; i < n; ++i) {
        it.step();
        if (i < burn) continue;
        double v = obs(it.sample());
        total += v;
        ++counted;
        batch_sum += v;
        if (++in_batch == batch_len) {
            batches.push_back(batch_sum / batch_len);
            batch_sum = 0.0;
            in_batch = 0;
        }
        if (i >= tail_start) {
            double m = total / counted;
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
    }
    ErgodicResult r;
    r.mean = total / std::max<long>(counted, 1);
    if (batches.size() >= 2) {
        double m = 0;
        for (double b : batches) m += b;
        m /= batches.size();
        double var = 0;
        for (double b : batches) var += (b - m) * (b - m);
        var /= (batches.size() - 1);
        r.std_error = std::sqrt(var / batches.size());
    }
    r.drift = hi - lo;
    r.converged = r.drift <= drift_tol;
    return r;
}

double three_point_geodesic_curvature(const ThermostatSpec& spec, Complex z0, Complex z1, Complex z2) {
    Complex a = z1 - z0, b = z2 - z1, c = z2 - z0;
    double cross = (std::conj(a) * b).imag();
    double kappa_e = 2.0 * cross / (std::abs(a) * std::abs(b) * std::abs(c));
    BasePoint bp = eval_base(spec, z1);
    // unit tangent of the circumcircle at z1, oriented along the curve
    Complex t = c / std::abs(c);
    double area2 = (std::conj(a) * c).imag();
    if (std::abs(area2) > 1e-300) {
        Complex center = z0 + Complex(0, 1) * (std::norm(c) * a - std::norm(a) * c) / (2.0 * area2);
        Complex r = Complex(0, 1) * (z1 - center);
        t = r / std::abs(r);
        if ((std::conj(t) * c).real() < 0) t = -t;
    }
    Complex n = Complex(0, 1) * t;
    double dn_sigma = bp.sigma.x * n.real() + bp.sigma.y * n.imag();
    return bp.E * (kappa_e - dn_sigma);
}

}  // namespace thermolab
