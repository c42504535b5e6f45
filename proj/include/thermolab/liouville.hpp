#pragma once

// Quadrature against the unnormalized Liouville measure (total mass 2 pi Area),
// Godbillon-Vey integrals, the integrated Riccati identity and entropy production.

#include <random>
#include <vector>

#include "thermolab/mesh.hpp"
#include "thermolab/riccati.hpp"

namespace thermolab {

/// 4 pi^2 chi(M) for genus 2.
inline constexpr double kGaussBonnet = -8.0 * kPi * kPi;

struct QuadratureGrid {
    int mesh_n = 0;
    int N_theta = 0;
    std::vector<Complex> bases;   // hyperbolic triangle centroids
    std::vector<double> weights;  // hyperbolic areas (curvature -1)

    std::size_t size() const { return bases.size() * N_theta; }
    /// Per-base measure factor exp(2u)/c^2 of the spec's metric against g_0.
    std::vector<double> area_factors(const ThermostatSpec& spec) const;
};

/// Smallest even subdivision n with 8 n^2 >= n_base.
QuadratureGrid build_grid(const FuchsianGroup& g, int n_base, int N_theta);
QuadratureGrid grid_from_mesh(const OctagonMesh& mesh, int N_theta);
/// The grid on the half-resolution mesh (for Richardson estimates).
QuadratureGrid coarsen(const FuchsianGroup& g, const QuadratureGrid& grid);

/// Integral of values laid out as (base, angle) row-major; `factors` are the
/// per-base measure factors.
double integrate(const QuadratureGrid& grid, const std::vector<double>& factors, const std::vector<double>& values);

/// Integral of fn(base point data, phi) over SM.
template <class Fn>
double integrate_fn(const ThermostatSpec& spec, const QuadratureGrid& grid, Fn&& fn);

double mass_check(const ThermostatSpec& spec, const QuadratureGrid& grid);
double gauss_bonnet_check(const ThermostatSpec& spec, const QuadratureGrid& grid);

double gv_general(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeField& field, Side which);
double gv_specialized(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeField& field, Side which);
/// Fourier route: 4 pi^2 chi - 3 int [V(r + sum P_k)]^2 + 3 sum_{k>=3} w_k int Q_k^2.
double gv_fourier(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeField& field, Side which);
/// Fourier-route integrand pieces for a band-limited synthetic lambda given
/// on the fiber grid (exercises the k >= 3 tail).
double gv_fourier_from_values(const QuadratureGrid& grid, const std::vector<double>& factors,
                              const std::vector<double>& lambda, const std::vector<double>& r);
double gv_general_from_values(const QuadratureGrid& grid, const std::vector<double>& factors,
                              const std::vector<double>& lambda, const std::vector<double>& r);

struct RiccintResult {
    double lhs = 0, rhs = 0, residual = 0;  // residual relative to |rhs|
};
RiccintResult riccint_check(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeField& field,
                            Side which = Side::Plus);

/// All GV routes on a grid plus a Richardson error estimate from the
/// half-resolution grid.
struct GVReport {
    double general[2]{}, specialized[2]{}, fourier[2]{};  // [Plus, Minus]
    double error[2]{};
    double mass = 0, gb = 0;
    RiccintResult riccint;
    bool certified = false;
    double max_convergence_gap = 0;
    int n_flagged = 0;
};
GVReport gv_report(const ThermostatSpec& spec, const QuadratureGrid& grid, const SlopeOptions& opt,
                   bool richardson = true);
inline int side_index(Side s) { return s == Side::Plus ? 0 : 1; }

struct EntropyResult {
    double e = 0;
    double std_error = 0;
    double chi_plus = 0, chi_minus = 0;
    double lyapunov_consistency = 0;  // |e + chi_plus + chi_minus|
    bool converged = true;
    double drift = 0;
};
EntropyResult entropy_production(const ThermostatSpec& spec, UnitTangentState s0, double T, double dt = 1e-2);

struct EntropySweepReport {
    std::vector<EntropyResult> results;
    int violations = 0;  // e < -3 std_error
};
EntropySweepReport entropy_nonnegativity_sweep(const std::vector<ThermostatSpec>& specs, UnitTangentState s0,
                                               double T, double dt = 1e-2);

/// Liouville-distributed states: uniform hyperbolic area in the octagon and
/// uniform fiber angle.
std::vector<UnitTangentState> sample_liouville(const FuchsianGroup& g, int n, std::uint64_t seed);

template <class Fn>
double integrate_fn(const ThermostatSpec& spec, const QuadratureGrid& grid, Fn&& fn) {
    std::vector<double> values(grid.size());
    for (std::size_t b = 0; b < grid.bases.size(); ++b) {
        BasePoint bp = eval_base(spec, grid.bases[b]);
        for (int j = 0; j < grid.N_theta; ++j) values[b * grid.N_theta + j] = fn(bp, kTwoPi * j / grid.N_theta);
    }
    return integrate(grid, grid.area_factors(spec), values);
}

}  // namespace thermolab
