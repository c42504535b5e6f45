#include "thermolab/pde.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "thermolab/errors.hpp"
#include "thermolab/fourier.hpp"
#include "thermolab/parallel.hpp"

namespace thermolab {

namespace {

Complex poly_eval(const std::vector<Complex>& c, Complex z) {
    Complex acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

// Sample points covering the octagon: vertices and centroids of a fine mesh.
std::vector<Complex> octagon_samples(const FuchsianGroup& g, int n) {
    OctagonMesh m = OctagonMesh::build(g, n);
    std::vector<Complex> pts = m.vertices;
    pts.insert(pts.end(), m.tri_centroid.begin(), m.tri_centroid.end());
    return pts;
}

}  // namespace

Complex poincare_sum(const std::vector<MobiusTransform>& elements, const std::vector<Complex>& w0, Complex z,
                     double term_floor) {
    Complex acc = 0.0;
    for (const auto& m : elements) {
        Complex den = std::conj(m.b) * z + std::conj(m.a);
        Complex d1 = 1.0 / (den * den);
        if (std::norm(d1) < term_floor) continue;
        Complex gz = (m.a * z + m.b) / den;
        acc += poly_eval(w0, gz) * d1 * d1;
    }
    return acc;
}

double qd_norm_g0(const QuadDiffField& q, Complex z) {
    double k = 1.0 - std::norm(z);
    return std::abs(q.w(z)) * k * k / 4.0;
}

double qd_det_g0(const QuadDiffField& q, Complex z) {
    double n = qd_norm_g0(q, z);
    return -n * n;
}

double qd_invariance_defect(const FuchsianGroup& g, const QuadDiffField& q, int per_side) {
    double wmax = 0.0, worst = 0.0;
    for (Complex z : octagon_samples(g, 8)) wmax = std::max(wmax, std::abs(q.w(z)));
    for (int k = 0; k < 8; ++k) {
        Complex A = g.vertices()[k], B = g.vertices()[(k + 1) % 8];
        for (int i = 0; i <= per_side; ++i) {
            Complex z = geodesic_lerp(A, B, double(i) / per_side);
            for (const auto& G : g.generators()) {
                Complex gz = G.apply_unchecked(z);
                if (!g.contains(gz, 1e-9)) continue;
                Complex d1 = G.derivative(z);
                worst = std::max(worst, std::abs(q.w(gz) * d1 * d1 - q.w(z)));
            }
        }
    }
    return wmax > 0 ? worst / wmax : 0.0;
}

PoincareResult poincare_qd(const FuchsianGroup& g, const std::vector<Complex>& w0, const PoincareOptions& opt) {
    if (opt.n_samples < 16 || opt.n_samples % 2) throw Error("poincare_qd: n_samples must be even and >= 16");
    auto words = g.enumerate_words(opt.max_length, opt.prune_radius);
    std::vector<MobiusTransform> elements;
    elements.reserve(words.size());
    for (const auto& w : words) elements.push_back(w.m);

    const int N = opt.n_samples;
    std::vector<Complex> vals(N);
    parallel_for(N, [&](std::size_t k) {
        Complex z = std::polar(opt.sample_radius, kTwoPi * double(k) / N);
        vals[k] = poincare_sum(elements, w0, z, opt.term_floor);
    });
    std::vector<Complex> c = fiber_dft(vals);  // c_n = (1/N) sum v_k e^{-2 pi i k n / N}
    std::vector<Complex> coeffs(N / 2);
    double peak = 0.0;
    for (int n = 0; n < N / 2; ++n) {
        coeffs[n] = c[n] / std::pow(opt.sample_radius, n);
        peak = std::max(peak, std::abs(coeffs[n]) * std::pow(opt.coeff_radius, n));
    }
    int last = N / 2 - 1;
    while (last > 0 && std::abs(coeffs[last]) * std::pow(opt.coeff_radius, last) < 1e-15 * peak) --last;
    coeffs.resize(last + 1);

    QuadDiffField raw(coeffs);
    double qmax = 0.0;
    for (Complex z : octagon_samples(g, 12)) qmax = std::max(qmax, qd_norm_g0(raw, z));
    if (!(qmax > 0)) throw Error("poincare_qd: series vanishes on the octagon");
    PoincareResult out;
    out.scale = opt.amplitude / qmax;
    for (auto& a : coeffs) a *= out.scale;
    QuadDiffField scaled(coeffs);
    out.defect = qd_invariance_defect(g, scaled);
    out.q = std::make_shared<QuadDiffField>(coeffs, out.defect);
    out.n_elements = elements.size();
    return out;
}

// --- conformal-factor equation ---------------------------------------------

std::vector<std::vector<std::pair<int, double>>> stiffness_rows(const OctagonMesh& mesh) {
    std::vector<std::map<int, double>> acc(mesh.n_classes);
    for (const auto& t : mesh.triangles) {
        for (int e = 0; e < 3; ++e) {
            int i = t[e], j = t[(e + 1) % 3], k = t[(e + 2) % 3];
            Complex a = mesh.vertices[i] - mesh.vertices[k], b = mesh.vertices[j] - mesh.vertices[k];
            double cot = (a * std::conj(b)).real() / std::abs((std::conj(a) * b).imag());
            double w = 0.5 * cot;
            int ci = mesh.cls[i], cj = mesh.cls[j];
            acc[ci][ci] += w;
            acc[cj][cj] += w;
            acc[ci][cj] -= w;
            acc[cj][ci] -= w;
        }
    }
    std::vector<std::vector<std::pair<int, double>>> rows(mesh.n_classes);
    for (int i = 0; i < mesh.n_classes; ++i) rows[i].assign(acc[i].begin(), acc[i].end());
    return rows;
}

double pde_root(double h, double D) {
    double h2 = h * h;
    return 0.5 * std::log((1.0 + std::sqrt(1.0 - 4.0 * h2 * D)) / (2.0 * h2));
}

namespace {

struct Assembled {
    Eigen::SparseMatrix<double> L;
    Eigen::VectorXd M, h2, D;
};

Assembled assemble(const PdeProblem& p) {
    const int n = p.mesh->n_classes;
    if (static_cast<int>(p.h.size()) != n || static_cast<int>(p.D.size()) != n)
        throw Error("pde: data must have one value per vertex class");
    Assembled a;
    std::vector<Eigen::Triplet<double>> trips;
    auto rows = stiffness_rows(*p.mesh);
    for (int i = 0; i < n; ++i)
        for (auto [j, v] : rows[i]) trips.emplace_back(i, j, v);
    a.L.resize(n, n);
    a.L.setFromTriplets(trips.begin(), trips.end());
    auto m = p.mesh->lumped_mass();
    a.M = Eigen::Map<Eigen::VectorXd>(m.data(), n);
    a.h2.resize(n);
    a.D.resize(n);
    for (int i = 0; i < n; ++i) {
        if (p.h[i] == 0.0) throw Error("pde: h must be nonzero");
        if (p.D[i] > 0.0) throw Error("pde: det_{g0} q must be <= 0");
        a.h2[i] = p.h[i] * p.h[i];
        a.D[i] = p.D[i];
    }
    return a;
}

Eigen::VectorXd reaction(const Assembled& a, const Eigen::VectorXd& u) {
    Eigen::ArrayXd e2 = (2.0 * u.array()).exp();
    return (1.0 - a.h2.array() * e2 - a.D.array() / e2).matrix();
}

Eigen::VectorXd reaction_slope(const Assembled& a, const Eigen::VectorXd& u) {
    // -R'(u) >= 0
    Eigen::ArrayXd e2 = (2.0 * u.array()).exp();
    return (2.0 * a.h2.array() * e2 - 2.0 * a.D.array() / e2).matrix();
}

Eigen::VectorXd defect(const Assembled& a, const Eigen::VectorXd& u) {
    return a.L * u - a.M.cwiseProduct(reaction(a, u));
}

double scaled_norm(const Assembled& a, const Eigen::VectorXd& F) { return F.cwiseQuotient(a.M).cwiseAbs().maxCoeff(); }

}  // namespace

double pde_residual(const PdeProblem& p, const std::vector<double>& u) {
    Assembled a = assemble(p);
    Eigen::VectorXd uv = Eigen::Map<const Eigen::VectorXd>(u.data(), u.size());
    return scaled_norm(a, defect(a, uv));
}

PdeSolution solve_conformal_factor(const PdeProblem& p, const PdeOptions& opt) {
    Assembled a = assemble(p);
    const int n = p.mesh->n_classes;
    PdeSolution sol;
    sol.u_minus = 1e300;
    sol.u_plus = -1e300;
    for (int i = 0; i < n; ++i) {
        double r = pde_root(p.h[i], p.D[i]);
        sol.u_minus = std::min(sol.u_minus, r);
        sol.u_plus = std::max(sol.u_plus, r);
    }
    // constants have L u = 0, so the barrier conditions are sign conditions on R
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, sol.u_minus), hi = Eigen::VectorXd::Constant(n, sol.u_plus);
    const double slack = 1e-12;
    sol.barriers_valid = reaction(a, lo).minCoeff() >= -slack && reaction(a, hi).maxCoeff() <= slack;
    if (!sol.barriers_valid) throw NumericalFault("pde: constant barriers fail the sign conditions");
    auto inside = [&](const Eigen::VectorXd& u) {
        return (u.array() >= sol.u_minus - slack).all() && (u.array() <= sol.u_plus + slack).all();
    };

    Eigen::VectorXd u = lo;
    double res = scaled_norm(a, defect(a, u));
    bool newton_ok = !opt.force_picard;
    if (newton_ok) {
        Eigen::SparseMatrix<double> Msp(n, n);
        for (int it = 0; it < opt.max_newton && res > opt.tol; ++it) {
            Eigen::VectorXd F = defect(a, u);
            Eigen::SparseMatrix<double> J = a.L;
            Eigen::VectorXd diag = a.M.cwiseProduct(reaction_slope(a, u));
            for (int i = 0; i < n; ++i) J.coeffRef(i, i) += diag[i];
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(J);
            if (ldlt.info() != Eigen::Success) {
                newton_ok = false;
                break;
            }
            Eigen::VectorXd step = -ldlt.solve(F);
            double alpha = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
                Eigen::VectorXd trial = u + alpha * step;
                if (!inside(trial)) continue;
                double r = scaled_norm(a, defect(a, trial));
                if (r < (1.0 - 1e-4 * alpha) * res || r <= opt.tol) {
                    u = trial;
                    res = r;
                    accepted = true;
                    break;
                }
            }
            ++sol.newton_iterations;
            sol.bracket_held = sol.bracket_held && inside(u);
            if (!accepted) {
                newton_ok = false;
                break;
            }
        }
        if (res > opt.tol) newton_ok = false;
    }
    if (!newton_ok) {
        // monotone iteration from the subsolution
        sol.used_picard = true;
        u = lo;
        double kappa = (2.0 * a.h2.array() * std::exp(2.0 * sol.u_plus) - 2.0 * a.D.array() * std::exp(-2.0 * sol.u_minus))
                           .maxCoeff();
        Eigen::SparseMatrix<double> A = a.L;
        for (int i = 0; i < n; ++i) A.coeffRef(i, i) += kappa * a.M[i];
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
        if (ldlt.info() != Eigen::Success) throw NumericalFault("pde: Picard operator factorization failed");
        res = scaled_norm(a, defect(a, u));
        for (int it = 0; it < opt.max_picard && res > opt.tol; ++it) {
            Eigen::VectorXd rhs = a.M.cwiseProduct(reaction(a, u) + kappa * u);
            u = ldlt.solve(rhs);
            ++sol.picard_iterations;
            sol.bracket_held = sol.bracket_held && inside(u);
            res = scaled_norm(a, defect(a, u));
        }
    }
    sol.u.assign(u.data(), u.data() + n);
    sol.residual = res;
    sol.converged = res <= opt.tol;
    return sol;
}

// --- automorphic smooth functions --------------------------------------------

void wendland_of_squared(double D, double rho, double& P, double& P1, double& P2) {
    double r = std::sqrt(std::max(D, 0.0)) / rho;
    if (r >= 1.0) {
        P = P1 = P2 = 0.0;
        return;
    }
    double om = 1.0 - r, om2 = om * om, om4 = om2 * om2;
    double r2 = rho * rho;
    P = om4 * om2 * (35 * r * r + 18 * r + 3);
    P1 = -28.0 * (5 * r + 1) * om4 * om / r2;
    P2 = 420.0 * om4 / (r2 * r2);
}

Jet pull_back_jet(const Jet& J, const MobiusTransform& m, Complex z) {
    Complex den = std::conj(m.b) * z + std::conj(m.a);
    Complex m1 = 1.0 / (den * den);
    Complex m2 = -2.0 * std::conj(m.b) / (den * den * den);
    Complex ub = 0.5 * Complex(J.x, J.y);
    Complex ubb = 0.25 * Complex(J.xx - J.yy, 2 * J.xy);
    double uwb = 0.25 * (J.xx + J.yy);
    Complex vb = std::conj(m1) * ub;
    Complex vbb = std::conj(m2) * ub + std::conj(m1) * std::conj(m1) * ubb;
    double vwb = std::norm(m1) * uwb;
    Jet out;
    out.v = J.v;
    out.x = 2 * vb.real();
    out.y = 2 * vb.imag();
    double lap = 4 * vwb, diff = 4 * vbb.real();
    out.xx = 0.5 * (lap + diff);
    out.yy = 0.5 * (lap - diff);
    out.xy = 2 * vbb.imag();
    return out;
}

AutomorphicBumpField::AutomorphicBumpField(std::shared_ptr<const FuchsianGroup> g, std::vector<Complex> centers,
                                           double support)
    : g_(std::move(g)), centers_(std::move(centers)), support_(support), coeffs_(centers_.size() + 1, 0.0) {
    if (!(support > 0)) throw Error("automorphic field: support must be positive");
    const double reach = g_->circumradius() + 0.1 + support_;
    double dmax = 0.0;
    for (Complex p : centers_) dmax = std::max(dmax, hyp_distance(0.0, p));
    auto elems = g_->elements_within(reach + dmax);
    for (int j = 0; j < static_cast<int>(centers_.size()); ++j)
        for (const auto& m : elems) {
            Complex p = m.apply_unchecked(centers_[j]);
            if (hyp_distance(0.0, p) <= reach) images_.push_back({p, j});
        }
    buckets_.assign(bucket_n_ * bucket_n_, {});
    const double hcell = 2.0 / bucket_n_;
    auto cell = [&](double v) { return std::clamp(static_cast<int>((v + 1.0) / hcell), 0, bucket_n_ - 1); };
    const double t = std::tanh(0.5 * support_);
    for (int i = 0; i < static_cast<int>(images_.size()); ++i) {
        Complex p = images_[i].p;
        Complex dir = std::abs(p) > 0 ? p / std::abs(p) : Complex(1.0);
        auto T = MobiusTransform::translation(p);
        Complex a = T.apply_unchecked(t * dir), b = T.apply_unchecked(-t * dir);
        Complex c = 0.5 * (a + b);
        double rad = 0.5 * std::abs(a - b) + 1e-9;
        for (int x = cell(c.real() - rad); x <= cell(c.real() + rad); ++x)
            for (int y = cell(c.imag() - rad); y <= cell(c.imag() + rad); ++y) buckets_[x * bucket_n_ + y].push_back(i);
    }
}

void AutomorphicBumpField::set_coefficients(std::vector<double> coeffs) {
    if (coeffs.size() != n_basis()) throw Error("automorphic field: wrong coefficient count");
    coeffs_ = std::move(coeffs);
}

void AutomorphicBumpField::basis_jets_local(Complex z, std::vector<std::pair<int, Jet>>& out) const {
    out.clear();
    out.push_back({0, Jet::constant(1.0)});
    const double hcell = 2.0 / bucket_n_;
    auto cell = [&](double v) { return std::clamp(static_cast<int>((v + 1.0) / hcell), 0, bucket_n_ - 1); };
    for (int i : buckets_[cell(z.real()) * bucket_n_ + cell(z.imag())]) {
        const Image& im = images_[i];
        if (hyp_distance(z, im.p) >= support_) continue;
        Jet D = squared_distance_jet(z, im.p);
        double P, P1, P2;
        wendland_of_squared(D.v, support_, P, P1, P2);
        Jet b = compose(D, P, P1, P2);
        bool merged = false;
        for (auto& [k, jk] : out)
            if (k == im.j + 1) {
                jk += b;
                merged = true;
                break;
            }
        if (!merged) out.push_back({im.j + 1, b});
    }
}

void AutomorphicBumpField::basis_jets(Complex z, std::vector<std::pair<int, Jet>>& out) const {
    if (hyp_distance(0.0, z) <= g_->circumradius() + 0.1) {
        basis_jets_local(z, out);
        return;
    }
    ReducedState r = g_->reduce(z, 0.0);
    basis_jets_local(r.state.z, out);
    for (auto& [k, j] : out) j = pull_back_jet(j, r.deck, z);
}

Jet AutomorphicBumpField::jet(Complex z) const {
    thread_local std::vector<std::pair<int, Jet>> buf;
    basis_jets(z, buf);
    Jet acc = Jet::constant(0.0);
    for (const auto& [k, j] : buf) acc += coeffs_[k] * j;
    return acc;
}

json AutomorphicBumpField::describe() const {
    json c = json::array();
    for (Complex p : centers_) c.push_back({p.real(), p.imag()});
    return {{"kind", "automorphic_wendland"}, {"support", support_}, {"centers", c}, {"coefficients", coeffs_}};
}

// --- quasi-invariant metric family ---------------------------------------

double TheoremCSpec::r_pred(const BasePoint& b, double phi, Side which) const {
    double half_vq = 0.5 * vq_of_v(b, phi);
    return which == Side::Plus ? -h + half_vq : h + half_vq;
}

double theoremC_identity_residual(const TheoremCSpec& c, Complex z, bool exact) {
    ThermostatSpec spec = c.spec;
    if (exact) spec.u = c.lift;
    BasePoint b = eval_base(spec, z);
    return b.K + c.h * c.h + det_q(b);
}

namespace {

// Class representatives of a mesh (first vertex of each class).
std::vector<Complex> class_points(const OctagonMesh& m) {
    std::vector<Complex> pts(m.n_classes);
    std::vector<bool> seen(m.n_classes, false);
    for (std::size_t v = 0; v < m.vertices.size(); ++v)
        if (!seen[m.cls[v]]) {
            seen[m.cls[v]] = true;
            pts[m.cls[v]] = m.vertices[v];
        }
    return pts;
}

struct Collocation {
    std::vector<Complex> z;
    std::vector<double> D, E2;
    std::vector<std::vector<std::pair<int, Jet>>> basis;
};

Collocation make_collocation(const AutomorphicBumpField& f, const QuadDiffField& q, const std::vector<Complex>& pts) {
    Collocation c;
    c.z = pts;
    c.basis.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        c.D.push_back(qd_det_g0(q, pts[i]));
        double e = 0.5 * (1.0 - std::norm(pts[i]));
        c.E2.push_back(e * e);
        f.basis_jets(pts[i], c.basis[i]);
    }
    return c;
}

// Residual -Delta_{g0} u - R(u) and its Jacobian rows.
double collocation_residuals(const Collocation& c, const Eigen::VectorXd& a, double h2, Eigen::VectorXd& r,
                             Eigen::MatrixXd* J) {
    const int m = static_cast<int>(c.z.size());
    r.resize(m);
    if (J) J->setZero(m, a.size());
    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
        Jet u = Jet::constant(0.0);
        for (const auto& [k, j] : c.basis[i]) u += a[k] * j;
        double e2u = std::exp(2 * u.v);
        double R = 1.0 - h2 * e2u - c.D[i] / e2u;
        r[i] = -c.E2[i] * u.laplacian() - R;
        worst = std::max(worst, std::abs(r[i]) / e2u);
        if (J) {
            double slope = 2 * h2 * e2u - 2 * c.D[i] / e2u;
            for (const auto& [k, j] : c.basis[i]) (*J)(i, k) += -c.E2[i] * j.laplacian() + slope * j.v;
        }
    }
    return worst;
}

}  // namespace

TheoremCSpec make_theoremC_spec(const TheoremCOptions& opt) {
    if (opt.h == 0.0) throw SchemaError("h", "h must be nonzero");
    auto g = shared_genus2();
    TheoremCSpec out;
    out.h = opt.h;
    out.poincare = poincare_qd(*g, opt.seed, opt.poincare);
    const QuadDiffField& q = *out.poincare.q;

    auto mesh = std::make_shared<OctagonMesh>(OctagonMesh::build(*g, opt.mesh_n));
    out.mesh = mesh;
    auto reps = class_points(*mesh);
    PdeProblem prob{mesh, std::vector<double>(mesh->n_classes, opt.h), {}};
    for (Complex z : reps) prob.D.push_back(qd_det_g0(q, z));
    out.pde = solve_conformal_factor(prob, opt.pde);
    if (!out.pde.converged) throw NumericalFault("pde: conformal factor did not converge");

    // smooth automorphic lift: least-squares fit to the mesh solution, then
    // Gauss-Newton on the pointwise equation
    OctagonMesh coarse = OctagonMesh::build(*g, opt.lift_mesh_n);
    auto lift = std::make_shared<AutomorphicBumpField>(g, class_points(coarse), opt.lift_support);
    const int nb = static_cast<int>(lift->n_basis());
    Eigen::VectorXd a(nb);
    {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(reps.size(), nb);
        std::vector<std::pair<int, Jet>> buf;
        for (std::size_t i = 0; i < reps.size(); ++i) {
            lift->basis_jets(reps[i], buf);
            for (const auto& [k, j] : buf) A(i, k) += j.v;
        }
        Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(out.pde.u.data(), out.pde.u.size());
        Eigen::MatrixXd N = A.transpose() * A;
        N.diagonal().array() += 1e-10 * N.diagonal().maxCoeff();
        a = N.ldlt().solve(A.transpose() * y);
    }
    std::vector<Complex> pts = reps;
    pts.insert(pts.end(), mesh->tri_centroid.begin(), mesh->tri_centroid.end());
    Collocation col = make_collocation(*lift, q, pts);
    const double h2 = opt.h * opt.h;
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    double best = collocation_residuals(col, a, h2, r, &J);
    double mu = 1e-8;
    for (int it = 0; it < opt.gauss_newton_iterations; ++it) {
        Eigen::MatrixXd N = J.transpose() * J;
        Eigen::VectorXd g_ = J.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 8 && !improved; ++tries) {
            Eigen::MatrixXd Nd = N;
            Nd.diagonal().array() += mu * N.diagonal().maxCoeff();
            Eigen::VectorXd trial = a - Nd.ldlt().solve(g_);
            Eigen::VectorXd rt;
            double w = collocation_residuals(col, trial, h2, rt, nullptr);
            if (rt.squaredNorm() < r.squaredNorm()) {
                a = trial;
                best = collocation_residuals(col, a, h2, r, &J);
                (void)w;
                mu = std::max(mu * 0.1, 1e-14);
                improved = true;
            } else {
                mu *= 10;
            }
        }
        if (!improved) break;
    }
    lift->set_coefficients(std::vector<double>(a.data(), a.data() + nb));
    out.lift = lift;
    out.lift_fit_residual = best;

    out.spec.c = 1.0;
    out.spec.group = g;
    if (opt.tabulate_n > 0)
        out.spec.u = std::make_shared<TabulatedJetField>(lift, g->vertex_radius() + 0.03, opt.tabulate_n);
    else
        out.spec.u = lift;
    out.spec.q = out.poincare.q;
    out.spec.label = "theoremC";
    return out;
}

}  // namespace thermolab
