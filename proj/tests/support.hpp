#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "thermolab/families.hpp"
#include "thermolab/flow.hpp"

namespace testsupport {

using thermolab::Complex;

inline Complex random_disk_point(std::mt19937_64& rng, double rmax = 0.9) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return std::polar(rmax * std::sqrt(U(rng)), thermolab::kTwoPi * U(rng));
}

/// Uniform chart point of the octagon by rejection.
inline Complex random_octagon_point(std::mt19937_64& rng, const thermolab::FuchsianGroup& g) {
    for (;;) {
        Complex z = random_disk_point(rng, g.vertex_radius());
        if (g.contains(z)) return z;
    }
}

inline thermolab::UnitTangentState random_state(std::mt19937_64& rng, const thermolab::FuchsianGroup& g) {
    std::uniform_real_distribution<double> U(0.0, thermolab::kTwoPi);
    return {random_octagon_point(rng, g), U(rng)};
}

inline double angle_gap(double a, double b) {
    double d = std::fmod(std::abs(a - b), thermolab::kTwoPi);
    return std::min(d, thermolab::kTwoPi - d);
}

/// Distance between two reduced states' base points, allowing for the
/// point to sit on paired sides: the smaller of the direct distance and the
/// distance after pushing one of them across each generator.
inline double surface_distance(const thermolab::FuchsianGroup& g, Complex a, Complex b) {
    double d = thermolab::hyp_distance(a, b);
    for (const auto& m : g.generators()) d = std::min(d, thermolab::hyp_distance(m.apply_unchecked(a), b));
    return d;
}

/// Trace comparison of a flow and its time change by U. Samples of the
/// time-changed orbit (unit speed in exp(-2U) g) are matched with the
/// original orbit at the corresponding original time t = int exp(U) dtau
/// (Simpson on sample pairs); returns the largest hyperbolic distance between
/// matched lifted points, an upper bound for the Hausdorff distance of the
/// traces. `crossed` reports whether the compared window left the octagon.
struct TraceComparison {
    double max_distance = 0;
    bool crossed = false;
    double g_time = 0;
};

inline TraceComparison compare_time_changed_traces(const thermolab::ThermostatSpec& spec,
                                                   const thermolab::ThermostatSpec& changed,
                                                   const thermolab::ScalarField& U, thermolab::UnitTangentState s0,
                                                   double T, double dt, int stride = 10) {
    using namespace thermolab;
    Orbit o1 = integrate_flow(changed, s0, T, dt);
    std::vector<Complex> lift1 = lift_orbit(o1);
    TraceComparison out;
    out.crossed = !o1.deck_letters.empty();
    double t = 0.0;
    auto w = [&](std::size_t k) { return std::exp(U.value(o1.samples[k].state.z)); };
    for (std::size_t k = 0; k + 2 < o1.samples.size(); k += 2) {
        t += dt / 3.0 * (w(k) + 4 * w(k + 1) + w(k + 2));
        if ((k + 2) % (2 * stride) != 0) continue;
        int n = std::max(1, static_cast<int>(std::ceil(t / dt)));
        Orbit o0 = integrate_flow(spec, s0, t, t / n);
        Complex z0 = lift_orbit(o0).back();
        out.max_distance = std::max(out.max_distance, hyp_distance(z0, lift1[k + 2]));
    }
    out.g_time = t;
    return out;
}

}  // namespace testsupport
