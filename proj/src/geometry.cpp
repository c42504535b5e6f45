#include "thermolab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include "thermolab/errors.hpp"

namespace thermolab {

double wrap_angle(double phi) {
    double r = std::fmod(phi, kTwoPi);
    if (r < 0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

MobiusTransform MobiusTransform::rotation(double angle) {
    return {std::polar(1.0, angle / 2), 0.0};
}

MobiusTransform MobiusTransform::translation(Complex target) {
    double t2 = std::norm(target);
    if (t2 >= 1.0) throw DomainError("translation target outside the disk");
    double s = 1.0 / std::sqrt(1.0 - t2);
    return {s, target * s};
}

Complex MobiusTransform::apply(Complex z) const {
    Complex w = apply_unchecked(z);
    if (!(std::norm(w) < 1.0 - kDiskGuard) || !std::isfinite(w.real()) || !std::isfinite(w.imag()))
        throw DomainError("Mobius image left the open disk");
    return w;
}

Complex MobiusTransform::derivative(Complex z) const {
    Complex d = std::conj(b) * z + std::conj(a);
    return 1.0 / (d * d);
}

double MobiusTransform::push_angle(Complex z, double phi) const {
    return wrap_angle(phi + std::arg(derivative(z)));
}

double MobiusTransform::normalization_defect() const {
    return std::norm(a) - std::norm(b) - 1.0;
}

void MobiusTransform::renormalize() {
    double det = std::norm(a) - std::norm(b);
    if (!(det > 0)) throw DomainError("degenerate Mobius transform");
    double s = 1.0 / std::sqrt(det);
    a *= s;
    b *= s;
}

double MobiusTransform::distance_to_identity() const {
    auto dist = [&](double sign) {
        return std::max(std::abs(a - sign), std::abs(b));
    };
    return std::min(dist(1.0), dist(-1.0));
}

MobiusTransform operator*(const MobiusTransform& l, const MobiusTransform& r) {
    MobiusTransform m{l.a * r.a + l.b * std::conj(r.b), l.a * r.b + l.b * std::conj(r.a)};
    m.renormalize();
    return m;
}

Complex mobius_apply(const MobiusTransform& m, Complex z) { return m.apply(z); }

double mobius_tangent_angle(const MobiusTransform& m, Complex z, double phi) {
    return m.push_angle(z, phi);
}

double hyp_distance(Complex z1, Complex z2) {
    double num = std::abs(z1 - z2);
    double den = std::abs(1.0 - std::conj(z1) * z2);
    double q = std::min(num / den, 1.0 - 1e-16);
    return 2.0 * std::atanh(q);
}

namespace {
Complex to_origin(Complex p, Complex z) { return (z - p) / (1.0 - std::conj(p) * z); }
Complex from_origin(Complex p, Complex w) { return (w + p) / (1.0 + std::conj(p) * w); }
}  // namespace

double hyp_angle(Complex at, Complex p, Complex q) {
    return std::abs(std::arg(to_origin(at, q) / to_origin(at, p)));
}

double hyp_triangle_area(Complex a, Complex b, Complex c) {
    return kPi - hyp_angle(a, b, c) - hyp_angle(b, c, a) - hyp_angle(c, a, b);
}

Complex geodesic_lerp(Complex p, Complex q, double s) {
    Complex w = to_origin(p, q);
    double r = std::abs(w);
    if (r == 0.0) return p;
    double rs = std::tanh(s * std::atanh(r));
    return from_origin(p, w * (rs / r));
}

Complex hyp_barycenter(const Complex* pts, int n) {
    double X = 0;
    Complex Y = 0;
    for (int i = 0; i < n; ++i) {
        double q = 1.0 - std::norm(pts[i]);
        X += (2.0 - q) / q;
        Y += 2.0 * pts[i] / q;
    }
    double nrm = std::sqrt(X * X - std::norm(Y));
    X /= nrm;
    Y /= nrm;
    return Y / (1.0 + X);
}

FuchsianGroup FuchsianGroup::genus2() {
    FuchsianGroup g;
    g.inradius_ = std::acosh(1.0 / std::tan(kPi / 8));
    g.circumradius_ = std::acosh(3.0 + 2.0 * std::sqrt(2.0));
    g.vertex_radius_ = std::pow(2.0, -0.25);
    double t = std::tanh(g.inradius_);
    for (int k = 0; k < 8; ++k) {
        Complex u = std::polar(1.0, (2 * k + 1) * kPi / 8);
        g.generators_[k] = MobiusTransform::translation(t * u);
        g.vertices_[k] = std::polar(g.vertex_radius_, k * kPi / 4);
    }
    return g;
}

Complex FuchsianGroup::side_midpoint(int k) const {
    return std::polar(std::tanh(inradius_ / 2), (2 * k + 1) * kPi / 8);
}

const std::array<int, 8>& FuchsianGroup::relation() {
    static const std::array<int, 8> rel{0, 3, 6, 1, 4, 7, 2, 5};
    return rel;
}

double FuchsianGroup::relation_residual() const {
    MobiusTransform m;
    for (int k : relation()) m = m * generators_[k];
    return m.distance_to_identity();
}

double FuchsianGroup::octagon_area() const {
    double sum = 0;
    for (int k = 0; k < 8; ++k)
        sum += hyp_angle(vertices_[k], vertices_[(k + 7) % 8], vertices_[(k + 1) % 8]);
    return 6.0 * kPi - sum;
}

double FuchsianGroup::side_excess(Complex z, int k) const {
    return std::norm(z) - std::norm(generators_[inverse_letter(k)].apply_unchecked(z));
}

bool FuchsianGroup::contains(Complex z, double tol) const {
    for (int k = 0; k < 8; ++k)
        if (side_excess(z, k) > tol) return false;
    return true;
}

ReducedState FuchsianGroup::reduce(Complex z, double phi, int max_moves) const {
    if (!(std::norm(z) < 1.0 - kDiskGuard)) throw DomainError("state outside the open disk");
    ReducedState out;
    out.state = {z, wrap_angle(phi)};
    while (true) {
        int side = -1;
        for (int k = 0; k < 8; ++k) {
            if (side_excess(out.state.z, k) > 1e-12) {
                side = k;
                break;
            }
        }
        if (side < 0) return out;
        if (out.moves >= max_moves) throw ReductionError("fundamental-domain reduction exceeded move budget");
        const MobiusTransform& g = generators_[inverse_letter(side)];
        out.state.phi = g.push_angle(out.state.z, out.state.phi);
        out.state.z = g.apply(out.state.z);
        out.deck = g * out.deck;
        out.letters.push_back(static_cast<std::int8_t>(inverse_letter(side)));
        ++out.moves;
    }
}

namespace {

// Approximate set of group elements, keyed by the orbit point g(0).
class OrbitIndex {
  public:
    explicit OrbitIndex(double tol) : tol_(tol) {}

    bool insert(Complex p) {
        long ix = std::lround(p.real() / tol_ / 8), iy = std::lround(p.imag() / tol_ / 8);
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy) {
                auto it = cells_.find(key(ix + dx, iy + dy));
                if (it == cells_.end()) continue;
                for (Complex q : it->second)
                    if (std::abs(q - p) < tol_) return false;
            }
        cells_[key(ix, iy)].push_back(p);
        return true;
    }

  private:
    static long long key(long x, long y) { return (static_cast<long long>(x) << 32) ^ (y & 0xffffffffLL); }
    double tol_;
    std::unordered_map<long long, std::vector<Complex>> cells_;
};

}  // namespace

std::vector<GroupWord> FuchsianGroup::enumerate_words(int max_length, double prune_radius) const {
    std::vector<GroupWord> out;
    OrbitIndex seen(1e-10);
    out.push_back({{}, MobiusTransform::identity()});
    seen.insert(0.0);
    std::size_t begin = 0;
    for (int len = 1; len <= max_length; ++len) {
        std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i) {
            if (hyp_distance(0.0, out[i].m.apply_unchecked(0.0)) > prune_radius) continue;
            int last = out[i].letters.empty() ? -1 : out[i].letters.back();
            for (int k = 0; k < 8; ++k) {
                if (last >= 0 && k == inverse_letter(last)) continue;
                MobiusTransform m = out[i].m * generators_[k];
                if (!seen.insert(m.apply_unchecked(0.0))) continue;
                GroupWord w{out[i].letters, m};
                w.letters.push_back(static_cast<std::int8_t>(k));
                out.push_back(std::move(w));
            }
        }
        begin = end;
    }
    return out;
}

std::vector<MobiusTransform> FuchsianGroup::elements_within(double radius) const {
    double explore = radius + 2.0 * circumradius_;
    OrbitIndex seen(1e-10);
    std::vector<MobiusTransform> out;
    std::deque<MobiusTransform> queue{MobiusTransform::identity()};
    seen.insert(0.0);
    while (!queue.empty()) {
        MobiusTransform g = queue.front();
        queue.pop_front();
        if (hyp_distance(0.0, g.apply_unchecked(0.0)) <= radius) out.push_back(g);
        for (int k = 0; k < 8; ++k) {
            MobiusTransform h = g * generators_[k];
            Complex c = h.apply_unchecked(0.0);
            if (hyp_distance(0.0, c) > explore) continue;
            if (seen.insert(c)) queue.push_back(h);
        }
    }
    return out;
}

std::size_t brute_force_ball_size(const FuchsianGroup& g, int n) {
    OrbitIndex seen(1e-10);
    std::size_t count = 0;
    std::vector<MobiusTransform> layer{MobiusTransform::identity()};
    if (seen.insert(0.0)) ++count;
    for (int len = 1; len <= n; ++len) {
        std::vector<MobiusTransform> next;
        next.reserve(layer.size() * 8);
        for (const auto& m : layer)
            for (const auto& gen : g.generators()) {
                MobiusTransform h = m * gen;
                if (seen.insert(h.apply_unchecked(0.0))) ++count;
                next.push_back(h);
            }
        layer.swap(next);
    }
    return count;
}

}  // namespace thermolab
