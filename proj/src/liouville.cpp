#include "thermolab/liouville.hpp"

#include <cmath>

#include "thermolab/errors.hpp"
#include "thermolab/fourier.hpp"
#include "thermolab/parallel.hpp"

namespace thermolab {

std::vector<double> QuadratureGrid::area_factors(const ThermostatSpec& spec) const {
    std::vector<double> f(bases.size());
    for (std::size_t b = 0; b < bases.size(); ++b) {
        double u = spec.u ? spec.u->value(bases[b]) : 0.0;
        f[b] = std::exp(2 * u) / (spec.c * spec.c);
    }
    return f;
}

QuadratureGrid grid_from_mesh(const OctagonMesh& mesh, int N_theta) {
    QuadratureGrid g;
    g.mesh_n = mesh.n;
    g.N_theta = N_theta;
    g.bases = mesh.tri_centroid;
    g.weights = mesh.tri_area;
    return g;
}

QuadratureGrid build_grid(const FuchsianGroup& g, int n_base, int N_theta) {
    int n = 2;
    while (8 * n * n < n_base) n += 2;
    return grid_from_mesh(OctagonMesh::build(g, n), N_theta);
}

QuadratureGrid coarsen(const FuchsianGroup& g, const QuadratureGrid& grid) {
    return grid_from_mesh(OctagonMesh::build(g, std::max(1, grid.mesh_n / 2)), grid.N_theta);
}

double integrate(const QuadratureGrid& grid, const std::vector<double>& factors, const std::vector<double>& values) {
    std::vector<double> per_base(grid.bases.size());
    for (std::size_t b = 0; b < grid.bases.size(); ++b) {
        double s = pairwise_sum(values.data() + b * grid.N_theta, grid.N_theta);
        per_base[b] = s * (kTwoPi / grid.N_theta) * grid.weights[b] * factors[b];
    }
    return pairwise_sum(per_base.data(), per_base.size());
}

double mass_check(const ThermostatSpec& spec, const QuadratureGrid& grid) {
    return integrate_fn(spec, grid, [](const BasePoint&, double) { return 1.0; });
}

double gauss_bonnet_check(const ThermostatSpec& spec, const QuadratureGrid& grid) {
    return integrate_fn(spec, grid, [](const BasePoint& b, double) { return b.K; });
}

namespace {

void check_field(const QuadratureGrid& grid, const SlopeField& field) {
    if (field.bases.size() != grid.bases.size() || field.N_theta != grid.N_theta)
        throw Error("slope field does not match the quadrature grid");
    if (!field.certified()) throw CertificationError("slope field is not certified");
}

// values of fn(base, phi index) on the grid
template <class Fn>
std::vector<double> tabulate(const ThermostatSpec& spec, const QuadratureGrid& grid, Fn&& fn) {
    std::vector<double> v(grid.size());
    for (std::size_t b = 0; b < grid.bases.size(); ++b) {
        BasePoint bp = eval_base(spec, grid.bases[b]);
        for (int j = 0; j < grid.N_theta; ++j) {
            std::size_t k = b * grid.N_theta + j;
            v[k] = fn(bp, kTwoPi * j / grid.N_theta, k);
        }
    }
    return v;
}

}  // namespace

double gv_general(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeField& field, Side which) {
    check_field(grid, field);
    const auto& vr = field.v_r(which);
    auto vals = tabulate(spec, grid, [&](const BasePoint& b, double phi, std::size_t k) {
        FiberValues f = eval_fiber(b, phi);
        return -3.0 * (f.vlambda * f.vlambda + vr[k] * vr[k]) + 2.0 * vr[k] * (f.vvlambda - 2.0 * f.lambda);
    });
    return kGaussBonnet + integrate(grid, grid.area_factors(spec), vals);
}

double gv_specialized(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeField& field, Side which) {
    check_field(grid, field);
    const auto& vr = field.v_r(which);
    auto vals = tabulate(spec, grid, [&](const BasePoint& b, double phi, std::size_t k) {
        // V(r + theta - V(q)/2) = V r + theta(iv) + 2 q(v,v)
        double s = vr[k] + theta_of_iv(b, phi) + 2.0 * q_of_v(b, phi);
        return -3.0 * s * s;
    });
    return kGaussBonnet + integrate(grid, grid.area_factors(spec), vals);
}

double gv_fourier_from_values(const QuadratureGrid& grid, const std::vector<double>& factors,
                              const std::vector<double>& lambda, const std::vector<double>& r) {
    const int N = grid.N_theta;
    std::vector<double> vals(grid.size());
    for (std::size_t b = 0; b < grid.bases.size(); ++b) {
        std::vector<double> lam(lambda.begin() + b * N, lambda.begin() + (b + 1) * N);
        std::vector<double> rr(r.begin() + b * N, r.begin() + (b + 1) * N);
        FiberModes modes = fiber_decompose(lam, grid.bases[b]);
        FiberModes P = p_k_transform(modes);
        std::vector<double> psum = P.values();
        std::vector<double> s(N);
        for (int j = 0; j < N; ++j) s[j] = rr[j] + psum[j];
        std::vector<double> vs = spectral_derivative(s);
        std::vector<double> tail(N, 0.0);
        for (int k = 3; 2 * k < N; ++k) {
            double w = fourier_tail_weight(k);
            auto Q = modes.Q_on_grid(k);
            for (int j = 0; j < N; ++j) tail[j] += w * Q[j] * Q[j];
        }
        for (int j = 0; j < N; ++j) vals[b * N + j] = -3.0 * vs[j] * vs[j] + 3.0 * tail[j];
    }
    return kGaussBonnet + integrate(grid, factors, vals);
}

double gv_general_from_values(const QuadratureGrid& grid, const std::vector<double>& factors,
                              const std::vector<double>& lambda, const std::vector<double>& r) {
    const int N = grid.N_theta;
    std::vector<double> vals(grid.size());
    for (std::size_t b = 0; b < grid.bases.size(); ++b) {
        std::vector<double> lam(lambda.begin() + b * N, lambda.begin() + (b + 1) * N);
        std::vector<double> rr(r.begin() + b * N, r.begin() + (b + 1) * N);
        auto vl = spectral_derivative(lam);
        auto vvl = spectral_derivative(vl);
        auto vr = spectral_derivative(rr);
        for (int j = 0; j < N; ++j)
            vals[b * N + j] = -3.0 * (vl[j] * vl[j] + vr[j] * vr[j]) + 2.0 * vr[j] * (vvl[j] - 2.0 * lam[j]);
    }
    return kGaussBonnet + integrate(grid, factors, vals);
}

double gv_fourier(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeField& field, Side which) {
    check_field(grid, field);
    auto lam = tabulate(spec, grid, [](const BasePoint& b, double phi, std::size_t) { return eval_fiber(b, phi).lambda; });
    return gv_fourier_from_values(grid, grid.area_factors(spec), lam, field.r(which));
}

RiccintResult riccint_check(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeField& field,
                            Side which) {
    check_field(grid, field);
    const auto& r = field.r(which);
    auto fac = grid.area_factors(spec);
    auto lhs = tabulate(spec, grid, [&](const BasePoint& b, double phi, std::size_t k) {
        FiberValues f = eval_fiber(b, phi);
        double d = r[k] - f.vlambda;
        return d * d + f.lambda * f.lambda;
    });
    auto rhs = tabulate(spec, grid, [](const BasePoint& b, double phi, std::size_t) {
        double v = eval_fiber(b, phi).vlambda;
        return v * v;
    });
    RiccintResult out;
    out.lhs = integrate(grid, fac, lhs);
    out.rhs = -kGaussBonnet + integrate(grid, fac, rhs);
    out.residual = std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
    return out;
}

GVReport gv_report(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeOptions& opt, bool richardson) {
    GVReport rep;
    SlopeField field = compute_slope_field(spec, grid.bases, grid.N_theta, opt);
    rep.max_convergence_gap = field.max_convergence_gap;
    rep.n_flagged = field.n_flagged;
    rep.certified = field.certified();
    rep.mass = mass_check(spec, grid);
    rep.gb = gauss_bonnet_check(spec, grid);
    if (!rep.certified) return rep;
    for (Side s : {Side::Plus, Side::Minus}) {
        int i = side_index(s);
        rep.general[i] = gv_general(spec, grid, field, s);
        rep.specialized[i] = gv_specialized(spec, grid, field, s);
        rep.fourier[i] = gv_fourier(spec, grid, field, s);
    }
    rep.riccint = riccint_check(spec, grid, field, Side::Plus);
    if (richardson && grid.mesh_n >= 2) {
        QuadratureGrid coarse = coarsen(*spec.group, grid);
        SlopeField cf = compute_slope_field(spec, coarse.bases, coarse.N_theta, opt);
        if (cf.certified()) {
            for (Side s : {Side::Plus, Side::Minus}) {
                int i = side_index(s);
                rep.error[i] = std::abs(rep.general[i] - gv_general(spec, coarse, cf, s)) / 3.0;
            }
        } else {
            rep.error[0] = rep.error[1] = INFINITY;
        }
    }
    return rep;
}

EntropyResult entropy_production(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt) {
    FlowIntegrator it(spec, s0, dt, true);
    long n = std::lround(T / dt);
    long burn = n / 20;
    long kept = n - burn;
    const int n_batches = 50;
    long batch_len = std::max<long>(1, kept / n_batches);
    std::vector<double> batches;
    double batch_sum = 0, total = 0;
    long in_batch = 0;
    double vx = 1.0, vy = 0.0, log1 = 0.0, logdet = 0.0;
    long tail_start = burn + kept - kept / 10;
    double lo = 1e300, hi = -1e300;
    for (long i = 0; i < n; ++i) {
        it.step();
        if (i < burn) continue;
        double iv = it.step_int_vlambda();
        total += iv;
        batch_sum += iv;
        if (++in_batch == batch_len) {
            batches.push_back(batch_sum / (batch_len * dt));
            batch_sum = 0;
            in_batch = 0;
        }
        const Mat2& P = it.step_propagator();
        double x = P.a * vx + P.b * vy, y = P.c * vx + P.d * vy;
        double r = std::hypot(x, y);
        log1 += std::log(r);
        vx = x / r;
        vy = y / r;
        logdet += std::log(std::abs(P.det()));
        if (i >= tail_start) {
            double m = total / ((i - burn + 1) * dt);
            lo = std::min(lo, m);
            hi = std::max(hi, m);
        }
    }
    EntropyResult res;
    double tk = kept * dt;
    res.e = -total / tk;
    res.chi_plus = log1 / tk;
    res.chi_minus = (logdet - log1) / tk;
    res.lyapunov_consistency = std::abs(res.e + res.chi_plus + res.chi_minus);
    if (batches.size() >= 2) {
        double m = 0;
        for (double b : batches) m += b;
        m /= batches.size();
        double var = 0;
        for (double b : batches) var += (b - m) * (b - m);
        var /= (batches.size() - 1);
        res.std_error = std::sqrt(var / batches.size());
    }
    res.drift = hi - lo;
    res.converged = res.drift <= 1e-2;
    return res;
}

EntropySweepReport entropy_nonnegativity_sweep(const std::vector<ThermostatSpec>& specs, UnitTangentState s0,
                                               double T, double dt) {
    EntropySweepReport rep;
    rep.results.resize(specs.size());
    parallel_for(specs.size(), [&](std::size_t i) { rep.results[i] = entropy_production(specs[i], s0, T, dt); });
    for (const auto& r : rep.results)
        if (r.e < -3.0 * r.std_error) ++rep.violations;
    return rep;
}

std::vector<UnitTangentState> sample_liouville(const FuchsianGroup& g, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double ch = std::cosh(g.circumradius()) - 1.0;
    std::vector<UnitTangentState> out;
    out.reserve(n);
    while (static_cast<int>(out.size()) < n) {
        double rho = std::acosh(1.0 + U(rng) * ch);
        Complex z = std::polar(std::tanh(rho / 2), kTwoPi * U(rng));
        double phi = kTwoPi * U(rng);
        if (g.contains(z, 0.0)) out.push_back({z, phi});
    }
    return out;
}

}  // namespace thermolab
