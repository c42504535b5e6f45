#pragma once

// Poincare-disk model of the genus-2 surface: Mobius isometries, the regular
// octagon fundamental domain and the side-pairing group.

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace thermolab {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
// Points are kept at least this far inside the ideal boundary.
inline constexpr double kDiskGuard = 1e-12;

double wrap_angle(double phi);  // into [0, 2pi)

/// Orientation-preserving disk isometry z -> (a z + b) / (conj(b) z + conj(a)),
/// normalized so that |a|^2 - |b|^2 = 1.
struct MobiusTransform {
    Complex a{1.0, 0.0};
    Complex b{0.0, 0.0};

    static MobiusTransform identity() { return {}; }
    static MobiusTransform rotation(double angle);
    /// Hyperbolic translation along the diameter through `target` taking 0 to `target`.
    static MobiusTransform translation(Complex target);

    /// Throws DomainError when the image leaves the disk.
    Complex apply(Complex z) const;
    Complex apply_unchecked(Complex z) const { return (a * z + b) / (std::conj(b) * z + std::conj(a)); }
    Complex derivative(Complex z) const;
    /// Direction phi at z pushed forward by the map: phi + arg m'(z), wrapped.
    double push_angle(Complex z, double phi) const;

    MobiusTransform inverse() const { return {std::conj(a), -b}; }
    /// |a|^2 - |b|^2 - 1
    double normalization_defect() const;
    void renormalize();
    /// Distance to the identity or its negative, in the max-entry matrix norm.
    double distance_to_identity() const;
};

/// Composition (lhs after rhs), renormalized.
MobiusTransform operator*(const MobiusTransform& lhs, const MobiusTransform& rhs);

Complex mobius_apply(const MobiusTransform& m, Complex z);
double mobius_tangent_angle(const MobiusTransform& m, Complex z, double phi);

double hyp_distance(Complex z1, Complex z2);
/// Hyperbolic area of the geodesic triangle with the given vertices.
double hyp_triangle_area(Complex a, Complex b, Complex c);
/// Interior angle at `at` between the geodesics towards p and q.
double hyp_angle(Complex at, Complex p, Complex q);
/// Point at fraction s in [0,1] along the geodesic segment from p to q.
Complex geodesic_lerp(Complex p, Complex q, double s);
/// Lorentzian barycenter of a set of disk points.
Complex hyp_barycenter(const Complex* pts, int n);

/// Point of the unit tangent bundle in the disk chart: base point and
/// direction angle of the chart vector.
struct UnitTangentState {
    Complex z;
    double phi = 0.0;
};

struct ReducedState {
    UnitTangentState state;
    /// Deck transformation applied: state.z = deck.apply(input z).
    MobiusTransform deck;
    int moves = 0;
    std::vector<std::int8_t> letters;  // generators applied, in order
};

struct GroupWord {
    std::vector<std::int8_t> letters;  // generator indices 0..7
    MobiusTransform m;
};

/// Surface group of the regular octagon with vertex angles pi/4, centered at 0
/// with a vertex on the positive real axis. Generator k translates along the
/// perpendicular of side k and maps side k+4 onto side k; generator k+4 is
/// its inverse.
class FuchsianGroup {
  public:
    static FuchsianGroup genus2();

    const std::array<MobiusTransform, 8>& generators() const { return generators_; }
    static int inverse_letter(int k) { return (k + 4) % 8; }
    static int paired_side(int k) { return (k + 4) % 8; }

    double inradius() const { return inradius_; }
    double circumradius() const { return circumradius_; }
    /// Euclidean radius of the octagon vertices in the chart.
    double vertex_radius() const { return vertex_radius_; }
    const std::array<Complex, 8>& vertices() const { return vertices_; }
    /// Side k joins vertex k and vertex k+1.
    Complex side_midpoint(int k) const;
    /// Letters of the defining relation.
    static const std::array<int, 8>& relation();
    double relation_residual() const;

    /// Hyperbolic area of the octagon from its vertex angles.
    double octagon_area() const;

    /// Positive when z lies strictly beyond side k.
    double side_excess(Complex z, int k) const;
    bool contains(Complex z, double tol = 1e-12) const;
    ReducedState reduce(Complex z, double phi, int max_moves = 64) const;

    /// All distinct elements of word length <= max_length (breadth-first over
    /// reduced words, deduplicated by matrix). Expansion stops at elements
    /// with d(0, g 0) > prune_radius.
    std::vector<GroupWord> enumerate_words(int max_length,
                                           double prune_radius = 1e300) const;
    /// All elements with d(0, g 0) <= radius, found by walking across sides.
    std::vector<MobiusTransform> elements_within(double radius) const;

  private:
    std::array<MobiusTransform, 8> generators_;
    std::array<Complex, 8> vertices_;
    double inradius_ = 0, circumradius_ = 0, vertex_radius_ = 0;
};

/// Growth oracle for tests: distinct elements reachable by all 8^n words
/// of length <= n (no reduction), deduplicated by matrix.
std::size_t brute_force_ball_size(const FuchsianGroup& g, int n);

}  // namespace thermolab
