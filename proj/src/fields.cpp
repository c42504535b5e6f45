#include "thermolab/fields.hpp"

#include <cmath>
#include <stdexcept>

#include "thermolab/parallel.hpp"

namespace thermolab {

namespace {

// A(s) = artanh(sqrt s)/sqrt s and its first two derivatives.
void artanh_ratio(double s, double& A, double& A1, double& A2) {
    if (s < 0.04) {
        // s^k terms: A = sum s^k/(2k+1)
        A = A1 = A2 = 0;
        double p0 = 1.0, p1 = 0.0, p2 = 0.0;  // s^k, s^(k-1), s^(k-2)
        for (int k = 0; k < 24; ++k) {
            double inv = 1.0 / (2 * k + 1);
            A += p0 * inv;
            A1 += k * inv * p1;
            A2 += k * (k - 1) * inv * p2;
            p2 = p1;
            p1 = k == 0 ? 1.0 : p1 * s;
            p0 *= s;
            if (p0 < 1e-19 && k >= 2) break;
        }
        return;
    }
    double r = std::sqrt(s);
    A = std::atanh(r) / r;
    double M = 0.5 / (1.0 - s) - 0.5 * A;
    A1 = M / s;
    double M1 = 0.5 / ((1.0 - s) * (1.0 - s)) - 0.5 * A1;
    A2 = (M1 - A1) / s;
}

}  // namespace

Jet squared_distance_jet(Complex z, Complex p) {
    Complex den = 1.0 - std::conj(p) * z;
    double k = 1.0 - std::norm(p);
    Complex T = (z - p) / den;
    Complex T1 = k / (den * den);
    Complex T2 = 2.0 * std::conj(p) * k / (den * den * den);
    double s = std::norm(T);
    Complex dzb = T * std::conj(T1);
    Complex tt = T * std::conj(T2);
    double lap_half = 2.0 * std::norm(T1);
    Jet sj{s, 2 * dzb.real(), 2 * dzb.imag(), lap_half + 2 * tt.real(), 2 * tt.imag(),
           lap_half - 2 * tt.real()};
    double A, A1, A2;
    artanh_ratio(std::min(s, 1.0 - 1e-16), A, A1, A2);
    double D = 4 * s * A * A;
    double D1 = 4 * A * A + 8 * s * A * A1;
    double D2 = 16 * A * A1 + 8 * s * (A1 * A1 + A * A2);
    return compose(sj, D, D1, D2);
}

RadialBumpField::RadialBumpField(Complex center, double rho0, double amplitude, RadialOuter outer)
    : center_(center), rho0_(rho0), amplitude_(amplitude), outer_(outer) {
    if (!(rho0 > 0)) throw std::invalid_argument("radial bump support radius must be positive");
    if (!(std::norm(center) < 1.0)) throw std::invalid_argument("radial bump center outside the disk");
}

double RadialBumpField::profile(double d) const {
    double t = d / rho0_;
    if (t >= 1.0) return 0.0;
    return amplitude_ * std::exp(1.0 - 1.0 / (1.0 - t * t));
}

Jet RadialBumpField::jet(Complex z) const {
    Jet y = Jet::constant(0.0);
    // cheap reject before building the distance jet
    double th = std::tanh(0.5 * rho0_);
    if (std::norm(z - center_) < th * th * std::norm(1.0 - std::conj(center_) * z)) {
        Jet D = squared_distance_jet(z, center_);
        double r2 = rho0_ * rho0_;
        double t = D.v / r2;
        if (t < 1.0) {
            double om = 1.0 - t;
            double B = std::exp(1.0 - 1.0 / om);
            double B1 = -B / (om * om);
            double B2 = B * (1.0 / (om * om * om * om) - 2.0 / (om * om * om));
            y = compose(D, amplitude_ * B, amplitude_ * B1 / r2, amplitude_ * B2 / (r2 * r2));
        }
    }
    const double k = outer_.scale, c = outer_.c;
    switch (outer_.kind) {
        case RadialOuter::Kind::Linear:
            return k * y;
        case RadialOuter::Kind::Arcsin: {
            double q = c * c - y.v * y.v;
            double sq = std::sqrt(q);
            return compose(y, k * std::asin(y.v / c), k / sq, k * y.v / (q * sq));
        }
        case RadialOuter::Kind::SqrtComplement: {
            double q = c * c - y.v * y.v;
            double sq = std::sqrt(q);
            return compose(y, k * sq, -k * y.v / sq, -k * c * c / (q * sq));
        }
    }
    return y;
}

json RadialBumpField::describe() const {
    static const char* names[] = {"linear", "arcsin", "sqrt_complement"};
    return {{"kind", "radial_bump"},
            {"center", {center_.real(), center_.imag()}},
            {"rho0", rho0_},
            {"amplitude", amplitude_},
            {"outer", names[static_cast<int>(outer_.kind)]},
            {"outer_scale", outer_.scale},
            {"outer_c", outer_.c}};
}

Jet SumField::jet(Complex z) const {
    Jet out;
    for (const auto& [coef, f] : terms_) out += coef * f->jet(z);
    return out;
}

json SumField::describe() const {
    json t = json::array();
    for (const auto& [coef, f] : terms_) t.push_back({{"coef", coef}, {"field", f->describe()}});
    return {{"kind", "sum"}, {"terms", t}};
}

Jet ExpScaledField::jet(Complex z) const {
    return base_->jet(z) * exp(a_ * exponent_->jet(z));
}

json ExpScaledField::describe() const {
    return {{"kind", "exp_scaled"}, {"base", base_->describe()}, {"exponent", exponent_->describe()}, {"a", a_}};
}

TabulatedJetField::TabulatedJetField(FieldPtr base, double half_width, int n)
    : base_(std::move(base)), a_(half_width), h_(2 * half_width / n), n_(n), nodes_((n + 1) * (n + 1)) {
    if (n < 4 || !(half_width > 0) || half_width >= 1.0) throw std::invalid_argument("bad tabulation grid");
    parallel_for(nodes_.size(), [&](std::size_t k) {
        int i = static_cast<int>(k) / (n_ + 1), j = static_cast<int>(k) % (n_ + 1);
        Complex z(-a_ + i * h_, -a_ + j * h_);
        nodes_[k] = std::norm(z) < 1.0 ? base_->jet(z) : Jet{};
    });
}

namespace {
void catmull_rom(double t, double w[4]) {
    double t2 = t * t, t3 = t2 * t;
    w[0] = 0.5 * (-t3 + 2 * t2 - t);
    w[1] = 0.5 * (3 * t3 - 5 * t2 + 2);
    w[2] = 0.5 * (-3 * t3 + 4 * t2 + t);
    w[3] = 0.5 * (t3 - t2);
}
}  // namespace

Jet TabulatedJetField::jet(Complex z) const {
    double fx = (z.real() + a_) / h_, fy = (z.imag() + a_) / h_;
    int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
    if (i < 1 || j < 1 || i > n_ - 2 || j > n_ - 2) return base_->jet(z);
    double wx[4], wy[4];
    catmull_rom(fx - i, wx);
    catmull_rom(fy - j, wy);
    Jet out;
    for (int a = 0; a < 4; ++a) {
        Jet row;
        const Jet* p = &nodes_[(i - 1 + a) * (n_ + 1) + (j - 1)];
        for (int b = 0; b < 4; ++b) row += wy[b] * p[b];
        out += wx[a] * row;
    }
    return out;
}

json TabulatedJetField::describe() const {
    return {{"kind", "tabulated"}, {"half_width", a_}, {"n", n_}, {"base", base_->describe()}};
}

Complex QuadDiffField::w(Complex z) const {
    Complex acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * z + *it;
    return acc;
}

Complex QuadDiffField::dw(Complex z) const {
    Complex acc = 0;
    for (std::size_t k = coeffs_.size(); k-- > 1;) acc = acc * z + static_cast<double>(k) * coeffs_[k];
    return acc;
}

json QuadDiffField::describe() const {
    json c = json::array();
    for (Complex a : coeffs_) c.push_back({a.real(), a.imag()});
    return {{"kind", "polynomial"}, {"coeffs", c}, {"invariance_defect", defect_}};
}

json ThermostatSpec::describe() const {
    json j{{"c", c}, {"label", label}};
    j["f"] = f ? f->describe() : json(nullptr);
    j["u"] = u ? u->describe() : json(nullptr);
    json th = json::array();
    for (const auto& t : theta)
        th.push_back({{"kind", t.kind == FormKind::Gradient ? "gradient" : "rotated_gradient"},
                      {"coef", t.coef},
                      {"potential", t.potential->describe()}});
    j["theta"] = th;
    j["q"] = q ? q->describe() : json(nullptr);
    j["q_log_weight"] = q_log_weight ? q_log_weight->describe() : json(nullptr);
    return j;
}

std::shared_ptr<const FuchsianGroup> shared_genus2() {
    static const auto g = std::make_shared<const FuchsianGroup>(FuchsianGroup::genus2());
    return g;
}

BasePoint eval_base(const ThermostatSpec& spec, Complex z) {
    BasePoint b;
    b.z = z;
    double x = z.real(), y = z.imag();
    double q = 1.0 - std::norm(z);
    double q2 = q * q;
    b.sigma = {std::log(2.0 / (q * spec.c)), 2 * x / q, 2 * y / q, 2 / q + 4 * x * x / q2, 4 * x * y / q2,
               2 / q + 4 * y * y / q2};
    if (spec.u) b.sigma += spec.u->jet(z);
    b.E = std::exp(-b.sigma.v);
    double E2 = b.E * b.E;
    b.K = -E2 * b.sigma.laplacian();
    if (spec.f) b.f = spec.f->jet(z);
    for (const auto& t : spec.theta) {
        Jet U = t.potential->jet(z);
        double a = t.coef;
        if (t.kind == FormKind::Gradient) {
            b.tx += a * U.x;
            b.ty += a * U.y;
            b.tx_x += a * U.xx;
            b.tx_y += a * U.xy;
            b.ty_x += a * U.xy;
            b.ty_y += a * U.yy;
            b.div_e += a * E2 * U.laplacian();
        } else {
            b.tx -= a * U.y;
            b.ty += a * U.x;
            b.tx_x -= a * U.xy;
            b.tx_y -= a * U.yy;
            b.ty_x += a * U.xx;
            b.ty_y += a * U.xy;
        }
    }
    if (spec.q) {
        b.w = spec.q->w(z);
        b.dw = spec.q->dw(z);
        if (spec.q_log_weight) b.m = exp(spec.q_log_weight->jet(z));
    } else {
        b.m = Jet::constant(0.0);
    }
    return b;
}

double theta_of_v(const BasePoint& b, double phi) {
    return b.E * (b.tx * std::cos(phi) + b.ty * std::sin(phi));
}

double theta_of_iv(const BasePoint& b, double phi) {
    return b.E * (-b.tx * std::sin(phi) + b.ty * std::cos(phi));
}

double q_of_v(const BasePoint& b, double phi) {
    return b.E * b.E * b.m.v * (b.w * std::polar(1.0, 2 * phi)).real();
}

double vq_of_v(const BasePoint& b, double phi) {
    return -2.0 * b.E * b.E * b.m.v * (b.w * std::polar(1.0, 2 * phi)).imag();
}

FiberValues eval_fiber(const BasePoint& b, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    double A = -b.tx * s + b.ty * c;
    double Ap = -b.tx * c - b.ty * s;
    Complex we = b.w * Complex(std::cos(2 * phi), std::sin(2 * phi));
    double B = we.real(), Bp = -2.0 * we.imag();
    double qf = b.E * b.E * b.m.v;
    FiberValues out;
    out.lambda = b.f.v + b.E * A + qf * B;
    out.vlambda = b.E * Ap + qf * Bp;
    out.vvlambda = -b.E * A - 4.0 * qf * B;
    return out;
}

HorizontalDerivs eval_horizontal(const BasePoint& b, double phi) {
    double c = std::cos(phi), s = std::sin(phi);
    double E = b.E, E2 = E * E;
    double A = -b.tx * s + b.ty * c;
    double Ax = -b.tx_x * s + b.ty_x * c;
    double Ay = -b.tx_y * s + b.ty_y * c;
    Complex e2 = Complex(std::cos(2 * phi), std::sin(2 * phi));
    Complex we = b.w * e2;
    Complex dwe = b.dw * e2;
    double B = we.real();
    double Bx = dwe.real(), By = -dwe.imag();
    double qf = E2 * b.m.v;
    double qfx = E2 * (b.m.x - 2 * b.sigma.x * b.m.v);
    double qfy = E2 * (b.m.y - 2 * b.sigma.y * b.m.v);
    double lx = b.f.x - E * b.sigma.x * A + E * Ax + qfx * B + qf * Bx;
    double ly = b.f.y - E * b.sigma.y * A + E * Ay + qfy * B + qf * By;
    double lphi = E * (-b.tx * c - b.ty * s) - 2.0 * qf * we.imag();
    HorizontalDerivs h;
    h.X = E * (c * lx + s * ly) + E * (b.sigma.y * c - b.sigma.x * s) * lphi;
    h.H = E * (-s * lx + c * ly) - E * (b.sigma.x * c + b.sigma.y * s) * lphi;
    return h;
}

double lambda_eval(const ThermostatSpec& spec, const UnitTangentState& s) {
    return eval_fiber(eval_base(spec, s.z), s.phi).lambda;
}

std::pair<double, double> lambda_fiber_derivs(const ThermostatSpec& spec, const UnitTangentState& s) {
    FiberValues f = eval_fiber(eval_base(spec, s.z), s.phi);
    return {f.vlambda, f.vvlambda};
}

HorizontalDerivs lambda_horizontal_derivs(const ThermostatSpec& spec, const UnitTangentState& s) {
    return eval_horizontal(eval_base(spec, s.z), s.phi);
}

namespace {

struct GeoDeriv {
    Complex dz;
    double dphi;
};

GeoDeriv geodesic_rhs(const ThermostatSpec& spec, Complex z, double phi) {
    double x = z.real(), y = z.imag();
    double q = 1.0 - x * x - y * y;
    double sx = 2 * x / q, sy = 2 * y / q, sv = std::log(2.0 / (q * spec.c));
    if (spec.u) {
        Jet u = spec.u->jet(z);
        sv += u.v;
        sx += u.x;
        sy += u.y;
    }
    double E = std::exp(-sv);
    double c = std::cos(phi), s = std::sin(phi);
    return {E * Complex(c, s), E * (sy * c - sx * s)};
}

}  // namespace

UnitTangentState geodesic_step(const ThermostatSpec& spec, UnitTangentState s, double t, int substeps) {
    double h = t / substeps;
    for (int i = 0; i < substeps; ++i) {
        GeoDeriv k1 = geodesic_rhs(spec, s.z, s.phi);
        GeoDeriv k2 = geodesic_rhs(spec, s.z + 0.5 * h * k1.dz, s.phi + 0.5 * h * k1.dphi);
        GeoDeriv k3 = geodesic_rhs(spec, s.z + 0.5 * h * k2.dz, s.phi + 0.5 * h * k2.dphi);
        GeoDeriv k4 = geodesic_rhs(spec, s.z + h * k3.dz, s.phi + h * k3.dphi);
        s.z += h / 6 * (k1.dz + 2.0 * k2.dz + 2.0 * k3.dz + k4.dz);
        s.phi += h / 6 * (k1.dphi + 2 * k2.dphi + 2 * k3.dphi + k4.dphi);
    }
    return s;
}

HorizontalDerivs lambda_horizontal_derivs_fd(const ThermostatSpec& spec, const UnitTangentState& s,
                                             double step) {
    auto along = [&](double rot) {
        double vals[4];
        const double ts[4] = {-2 * step, -step, step, 2 * step};
        for (int i = 0; i < 4; ++i) {
            UnitTangentState r{s.z, s.phi + rot};
            r = geodesic_step(spec, r, ts[i], 2);
            r.phi -= rot;
            vals[i] = lambda_eval(spec, r);
        }
        return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * step);
    };
    return {along(0.0), along(kPi / 2)};
}

double curvature(const ThermostatSpec& spec, Complex z) { return eval_base(spec, z).K; }

double kappa0(const BasePoint& b, double phi) {
    double lam = eval_fiber(b, phi).lambda;
    return b.K - eval_horizontal(b, phi).H + lam * lam;
}

double kappa0(const ThermostatSpec& spec, const UnitTangentState& s) {
    return kappa0(eval_base(spec, s.z), s.phi);
}

double det_q(const BasePoint& b) {
    double qf = b.E * b.E * b.m.v;
    return -qf * qf * std::norm(b.w);
}

double det_shifted(const ThermostatSpec& spec, const UnitTangentState& s) {
    BasePoint b = eval_base(spec, s.z);
    double q = q_of_v(b, s.phi), vq = vq_of_v(b, s.phi);
    return b.f.v * b.f.v - q * q - 0.25 * vq * vq;
}

double divergence(const ThermostatSpec& spec, Complex z) { return eval_base(spec, z).div_e; }

FrameDerivs frame_derivs_fd(const ThermostatSpec& spec, const SMFunction& u, Complex z, double phi,
                            double h) {
    auto d4 = [h](auto&& g) { return (g(-2 * h) - 8.0 * g(-h) + 8.0 * g(h) - g(2 * h)) / (12 * h); };
    Complex ux = d4([&](double t) { return u(z + t, phi); });
    Complex uy = d4([&](double t) { return u(z + Complex(0, t), phi); });
    Complex up = d4([&](double t) { return u(z, phi + t); });
    BasePoint b = eval_base(spec, z);
    double c = std::cos(phi), s = std::sin(phi);
    FrameDerivs out;
    out.X = b.E * (c * ux + s * uy) + b.E * (b.sigma.y * c - b.sigma.x * s) * up;
    out.H = b.E * (-s * ux + c * uy) - b.E * (b.sigma.x * c + b.sigma.y * s) * up;
    out.V = up;
    return out;
}

}  // namespace thermolab
