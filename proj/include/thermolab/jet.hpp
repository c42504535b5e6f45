#pragma once

#include <cmath>

namespace thermolab {

/// Second-order jet of a real function of the chart coordinates (x, y):
/// value, gradient and Hessian at one point.
struct Jet {
    double v = 0, x = 0, y = 0, xx = 0, xy = 0, yy = 0;

    static Jet constant(double c) { return {c, 0, 0, 0, 0, 0}; }

    double laplacian() const { return xx + yy; }

    Jet& operator+=(const Jet& o) {
        v += o.v; x += o.x; y += o.y; xx += o.xx; xy += o.xy; yy += o.yy;
        return *this;
    }
    Jet& operator*=(double s) {
        v *= s; x *= s; y *= s; xx *= s; xy *= s; yy *= s;
        return *this;
    }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator-(Jet a, const Jet& b) { return a += (-1.0) * b; }

/// g(a) given g, g', g''.
inline Jet compose(const Jet& a, double g, double g1, double g2) {
    return {g,
            g1 * a.x,
            g1 * a.y,
            g1 * a.xx + g2 * a.x * a.x,
            g1 * a.xy + g2 * a.x * a.y,
            g1 * a.yy + g2 * a.y * a.y};
}

inline Jet operator*(const Jet& a, const Jet& b) {
    return {a.v * b.v,
            a.x * b.v + a.v * b.x,
            a.y * b.v + a.v * b.y,
            a.xx * b.v + 2 * a.x * b.x + a.v * b.xx,
            a.xy * b.v + a.x * b.y + a.y * b.x + a.v * b.xy,
            a.yy * b.v + 2 * a.y * b.y + a.v * b.yy};
}

inline Jet exp(const Jet& a) {
    double e = std::exp(a.v);
    return compose(a, e, e, e);
}

}  // namespace thermolab
