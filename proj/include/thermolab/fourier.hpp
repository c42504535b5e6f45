#pragma once

#include <functional>
#include <vector>

#include "thermolab/fields.hpp"

namespace thermolab {

/// c_n = (1/N) sum_j f(phi_j) e^{-i n phi_j}, phi_j = 2 pi j / N, for n = 0..N-1.
std::vector<Complex> fiber_dft(const std::vector<double>& values);
std::vector<Complex> fiber_dft(const std::vector<Complex>& values);
/// Inverse of fiber_dft (real part when the input is Hermitian).
std::vector<Complex> fiber_idft(const std::vector<Complex>& coeffs);
/// V applied to samples on the uniform fiber grid by trigonometric
/// differentiation (the Nyquist mode is dropped).
std::vector<double> spectral_derivative(const std::vector<double>& values);
std::vector<double> fiber_grid(int N);

/// Fourier coefficients of a function restricted to one fiber.
struct FiberModes {
    Complex z;
    int N = 0;
    std::vector<Complex> c;  // c[(n + N) % N] is the coefficient of e^{i n phi}

    Complex coef(int n) const { return c[((n % N) + N) % N]; }
    Complex& coef(int n) { return c[((n % N) + N) % N]; }
    int max_mode() const { return N / 2; }
    /// Q_k = c_k e^{ik phi} + c_{-k} e^{-ik phi} (Q_0 = c_0) as a real value.
    double Q(int k, double phi) const;
    std::vector<double> Q_on_grid(int k) const;
    /// Values of the mode sum on the fiber grid.
    std::vector<double> values() const;
    /// V as the multiplier i n on mode n.
    FiberModes V() const;
    double parseval() const;  // sum |c_n|^2
};

FiberModes fiber_decompose(const std::function<double(double)>& fn, Complex z, int N);
FiberModes fiber_decompose(const std::vector<double>& values, Complex z);
FiberModes lambda_modes(const ThermostatSpec& spec, Complex z, int N);

/// P_0 = Q_0 and P_k = -(k^2+2)/(3k^2) V(Q_k) for k >= 1.
FiberModes p_k_transform(const FiberModes& modes);
/// ((k^2+2)/3)^2 - k^2, the weight of the Q_k^2 tail (zero for k <= 2).
double fourier_tail_weight(int k);

/// Guillemin-Kazhdan operators eta_pm = (X -+ iH)/2 applied to a function on
/// SM at a state, by frame finite differences.
struct GKSample {
    Complex eta_plus, eta_minus;
};
GKSample gk_apply(const ThermostatSpec& spec, const SMFunction& u, const UnitTangentState& s);

/// Fiber-mode projection of a function on SM onto e^{i k phi}, exact for
/// trigonometric polynomials of degree < N/2.
SMFunction mode_component(const SMFunction& u, int k, int N = 8);

struct ClosedCoclosed {
    double closed_residual = 0;    // max |Im eta_- theta_1|
    double coclosed_residual = 0;  // max |Re eta_- theta_1|
};
/// theta is the dual 1-form of the external field of spec.
ClosedCoclosed closed_coclosed_test(const ThermostatSpec& spec, const std::vector<UnitTangentState>& samples);

/// Analytic eta_- theta_1 = (1/2) E^2 d_zbar Theta, Theta = theta_x - i theta_y.
Complex eta_minus_theta1_analytic(const ThermostatSpec& spec, Complex z);

}  // namespace thermolab
