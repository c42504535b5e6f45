#pragma once

// Quasi-invariant quadratic differentials by Poincare series and the
// conformal-factor equation  -Delta_{g0} u = 1 - h^2 e^{2u} - e^{-2u} det_{g0} q
// (so that K_g + h^2 + det_g q = 0 for g = e^{2u} g0).

#include <memory>
#include <vector>

#include "thermolab/fields.hpp"
#include "thermolab/mesh.hpp"
#include "thermolab/riccati.hpp"

namespace thermolab {

struct PoincareOptions {
    int max_length = 10;
    double prune_radius = 11.0;  // stop expanding words with d(0, g0) beyond this
    double term_floor = 1e-14;   // drop terms with |g'(z)|^2 below this
    int n_samples = 1024;
    double sample_radius = 0.93;
    double coeff_radius = 0.86;  // trailing coefficients negligible up to this radius are cut
    double amplitude = 0.15;     // max of |q|_{g0} over the octagon after normalization
};

struct PoincareResult {
    QuadPtr q;
    std::size_t n_elements = 0;
    double defect = 0.0;  // relative generator-invariance defect
    double scale = 1.0;   // normalization applied to the raw series
};

/// sum_g w0(g z) g'(z)^2 over the given elements.
Complex poincare_sum(const std::vector<MobiusTransform>& elements, const std::vector<Complex>& w0, Complex z,
                     double term_floor = 0.0);
PoincareResult poincare_qd(const FuchsianGroup& g, const std::vector<Complex>& w0, const PoincareOptions& opt = {});
/// max over side points z and generators G with G z in the octagon of
/// |w(Gz) G'(z)^2 - w(z)| / max |w|.
double qd_invariance_defect(const FuchsianGroup& g, const QuadDiffField& q, int per_side = 48);
/// |q|_{g0} = |w| (1 - |z|^2)^2 / 4
double qd_norm_g0(const QuadDiffField& q, Complex z);
/// det_{g0} q = -|q|_{g0}^2
double qd_det_g0(const QuadDiffField& q, Complex z);

/// Data on the vertex classes of a mesh.
struct PdeProblem {
    std::shared_ptr<const OctagonMesh> mesh;
    std::vector<double> h;  // per class, nonzero
    std::vector<double> D;  // det_{g0} q per class, <= 0
};

struct PdeOptions {
    double tol = 1e-10;  // max |(L u - M R(u))_i / M_i|
    int max_newton = 60;
    int max_picard = 20000;
    bool force_picard = false;
};

struct PdeSolution {
    std::vector<double> u;
    double u_minus = 0, u_plus = 0;
    double residual = 0;
    int newton_iterations = 0, picard_iterations = 0;
    bool used_picard = false;
    bool converged = false;
    /// Every accepted iterate satisfied u_minus <= u <= u_plus vertexwise.
    bool bracket_held = true;
    /// Constant u_minus is a subsolution and u_plus a supersolution.
    bool barriers_valid = true;
};

/// Cotangent stiffness of the chart triangulation assembled on vertex classes
/// (conformally invariant, so it is the g0 Dirichlet form).
std::vector<std::vector<std::pair<int, double>>> stiffness_rows(const OctagonMesh& mesh);
/// Pointwise root u* of 1 - h^2 e^{2u} - e^{-2u} D = 0.
double pde_root(double h, double D);
PdeSolution solve_conformal_factor(const PdeProblem& p, const PdeOptions& opt = {});
/// max_i |(L u - M R(u))_i / M_i|
double pde_residual(const PdeProblem& p, const std::vector<double>& u);

/// Wendland C^4 bumps psi(d / rho) centered at the images of finitely many
/// points under the group: an automorphic smooth function a0 + sum c_j W_j.
class AutomorphicBumpField final : public ScalarField {
  public:
    AutomorphicBumpField(std::shared_ptr<const FuchsianGroup> g, std::vector<Complex> centers, double support);

    Jet jet(Complex z) const override;
    json describe() const override;

    std::size_t n_basis() const { return centers_.size() + 1; }
    /// Sparse basis jets at z; index 0 is the constant.
    void basis_jets(Complex z, std::vector<std::pair<int, Jet>>& out) const;
    void set_coefficients(std::vector<double> coeffs);
    const std::vector<double>& coefficients() const { return coeffs_; }
    double support() const { return support_; }

  private:
    void basis_jets_local(Complex z, std::vector<std::pair<int, Jet>>& out) const;
    struct Image {
        Complex p;
        int j;
    };
    std::shared_ptr<const FuchsianGroup> g_;
    std::vector<Complex> centers_;
    double support_;
    std::vector<double> coeffs_;
    std::vector<Image> images_;
    int bucket_n_ = 48;
    std::vector<std::vector<int>> buckets_;
};

/// Wendland psi_{3,2}(r) = (1-r)^6 (35 r^2 + 18 r + 3) as a function of
/// D = (r rho)^2: value and first two D-derivatives.
void wendland_of_squared(double D, double rho, double& P, double& P1, double& P2);

/// Jet of u o m at z from the jet of u at m(z).
Jet pull_back_jet(const Jet& at_image, const MobiusTransform& m, Complex z);

struct TheoremCOptions {
    double h = 1.0;
    PoincareOptions poincare;
    std::vector<Complex> seed = {1.0};
    int mesh_n = 16;
    int lift_mesh_n = 8;
    double lift_support = 2.0;
    int gauss_newton_iterations = 30;
    int tabulate_n = 320;  // jet grid over the octagon's bounding box; 0 evaluates the lift directly
    PdeOptions pde;
};

struct TheoremCSpec {
    ThermostatSpec spec;
    double h = 1.0;
    PoincareResult poincare;
    PdeSolution pde;
    std::shared_ptr<const OctagonMesh> mesh;
    std::shared_ptr<const AutomorphicBumpField> lift;
    double lift_fit_residual = 0;  // collocation max |K_g + h^2 + det_g q|
    /// Predicted slopes -+h + V(q)/2 (plus is the stable side).
    double r_pred(const BasePoint& b, double phi, Side which) const;
};
TheoremCSpec make_theoremC_spec(const TheoremCOptions& opt = {});

/// Pointwise K_g + h^2 + det_g q through the spec's own curvature; `exact`
/// bypasses the tabulation and evaluates the lift itself.
double theoremC_identity_residual(const TheoremCSpec& c, Complex z, bool exact = false);

}  // namespace thermolab
