#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "thermolab/errors.hpp"
#include "thermolab/geometry.hpp"

using namespace thermolab;

namespace {

Complex random_disk_point(std::mt19937_64& rng, double rmax = 0.9) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return std::polar(rmax * std::sqrt(U(rng)), kTwoPi * U(rng));
}

MobiusTransform random_isometry(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(0.0, 1.0);
    return MobiusTransform::translation(random_disk_point(rng, 0.8)) * MobiusTransform::rotation(kTwoPi * U(rng));
}

double angle_gap(double a, double b) {
    double d = std::fmod(std::abs(a - b), kTwoPi);
    return std::min(d, kTwoPi - d);
}

}  // namespace

TEST_CASE("mobius basics") {
    CHECK(std::abs(mobius_apply(MobiusTransform::identity(), 0.3) - Complex(0.3)) < 1e-15);
    MobiusTransform rot{Complex(0, 1), 0.0};
    CHECK(std::abs(mobius_apply(rot, 0.3) - Complex(-0.3)) < 1e-15);
    CHECK(mobius_tangent_angle(MobiusTransform::identity(), 0.2, 1.0) == doctest::Approx(1.0));
    CHECK(angle_gap(mobius_tangent_angle(MobiusTransform::rotation(0.7), 0.0, 1.0), 1.7) < 1e-14);

    MobiusTransform bad{Complex(1, 0), Complex(2, 0)};
    CHECK_THROWS_AS(bad.apply(0.0), DomainError);
}

TEST_CASE("hyperbolic distance") {
    CHECK(hyp_distance(0.0, 0.5) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(hyp_distance(Complex(0.2, -0.4), Complex(0.2, -0.4)) == 0.0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        Complex a = random_disk_point(rng), b = random_disk_point(rng), c = random_disk_point(rng);
        MobiusTransform m = random_isometry(rng);
        double d = hyp_distance(a, b);
        CHECK(std::abs(hyp_distance(m.apply(a), m.apply(b)) - d) < 1e-12 * std::max(1.0, d));
        CHECK(hyp_distance(a, b) == doctest::Approx(hyp_distance(b, a)).epsilon(1e-14));
        CHECK(hyp_distance(a, c) <= hyp_distance(a, b) + hyp_distance(b, c) + 1e-12);
    }
}

TEST_CASE("composition laws") {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 200; ++i) {
        MobiusTransform m1 = random_isometry(rng), m2 = random_isometry(rng);
        Complex z = random_disk_point(rng, 0.7);
        double phi = 6.0 * std::uniform_real_distribution<double>(0, 1)(rng);
        MobiusTransform m12 = m1 * m2;
        CHECK(std::abs(m12.normalization_defect()) < 1e-12);
        CHECK(std::abs(m12.apply(z) - m1.apply(m2.apply(z))) < 1e-12);
        double seq = m1.push_angle(m2.apply(z), m2.push_angle(z, phi));
        CHECK(angle_gap(m12.push_angle(z, phi), seq) < 1e-10);
    }
}

TEST_CASE("genus-2 octagon group") {
    FuchsianGroup g = FuchsianGroup::genus2();
    CHECK(g.relation_residual() < 1e-9);

    // Regular 8-gon with vertex angle pi/4: the right triangle (center, side
    // midpoint, vertex) has angles pi/8, pi/8, so cosh R = cot^2(pi/8).
    double cot8 = 1.0 / std::tan(kPi / 8);
    double R = std::acosh(cot8 * cot8);
    for (Complex v : g.vertices()) CHECK(hyp_distance(0.0, v) == doctest::Approx(R).epsilon(1e-12));
    CHECK(g.circumradius() == doctest::Approx(R).epsilon(1e-12));

    for (int k = 0; k < 8; ++k) {
        Complex vk = g.vertices()[k], vk1 = g.vertices()[(k + 1) % 8], vkm = g.vertices()[(k + 7) % 8];
        CHECK(hyp_angle(vk, vkm, vk1) == doctest::Approx(kPi / 4).epsilon(1e-12));
    }
    CHECK(g.octagon_area() == doctest::Approx(4 * kPi).epsilon(1e-10));
    double fan = 0;
    for (int k = 0; k < 8; ++k) fan += hyp_triangle_area(0.0, g.vertices()[k], g.vertices()[(k + 1) % 8]);
    CHECK(std::abs(fan - 4 * kPi) < 1e-6);

    for (int k = 0; k < 8; ++k) {
        const auto& gen = g.generators()[k];
        int p = FuchsianGroup::paired_side(k);
        const auto& V = g.vertices();
        CHECK(std::abs(gen.apply(V[p]) - V[(k + 1) % 8]) < 1e-9);
        CHECK(std::abs(gen.apply(V[(p + 1) % 8]) - V[k]) < 1e-9);
        // midpoints from the vertices alone
        Complex mid_p = geodesic_lerp(V[p], V[(p + 1) % 8], 0.5);
        Complex mid_k = geodesic_lerp(V[k], V[(k + 1) % 8], 0.5);
        CHECK(std::abs(gen.apply(mid_p) - mid_k) < 1e-9);
        CHECK(std::abs(g.side_midpoint(k) - mid_k) < 1e-12);
        CHECK(hyp_distance(0.0, mid_k) == doctest::Approx(g.inradius()).epsilon(1e-12));
        // inward normal at side p maps to the inward normal of the neighbouring
        // tile across side k, which is the outward normal of the octagon there
        double inward_p = std::arg(-mid_p);
        double outward_k = std::arg(mid_k);
        CHECK(angle_gap(gen.push_angle(mid_p, inward_p), outward_k) < 1e-9);
        CHECK((gen * g.generators()[p]).distance_to_identity() < 1e-12);
    }
}

TEST_CASE("fundamental domain reduction") {
    FuchsianGroup g = FuchsianGroup::genus2();
    Complex z{0.1, -0.2};
    ReducedState r = g.reduce(z, 1.3);
    CHECK(r.moves == 0);
    CHECK(std::abs(r.state.z - z) < 1e-15);
    CHECK(r.deck.distance_to_identity() < 1e-15);

    for (int k = 0; k < 8; ++k) {
        const auto& gen = g.generators()[k];
        Complex w = gen.apply(z);
        double phi = gen.push_angle(z, 1.3);
        ReducedState back = g.reduce(w, phi);
        CHECK(std::abs(back.state.z - z) < 1e-12);
        CHECK(angle_gap(back.state.phi, 1.3) < 1e-12);
        CHECK((back.deck * gen).distance_to_identity() < 1e-10);

        Complex past = g.side_midpoint(k) * 1.01;
        ReducedState rp = g.reduce(past, 0.0);
        CHECK(rp.moves == 1);
        CHECK(hyp_distance(0.0, rp.state.z) <= g.inradius() + 1e-12);
        CHECK((rp.deck * g.generators()[k]).distance_to_identity() < 1e-12);
    }

    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        Complex p = random_disk_point(rng, 0.97);
        ReducedState r1 = g.reduce(p, 0.5);
        CHECK(g.contains(r1.state.z, 1e-10));
        CHECK(std::abs(r1.deck.apply(p) - r1.state.z) < 1e-9);
        ReducedState r2 = g.reduce(r1.state.z, r1.state.phi);
        CHECK(r2.moves == 0);
        CHECK(r2.state.z == r1.state.z);
    }
    CHECK_THROWS_AS(g.reduce(Complex(1.0, 0.0), 0.0), DomainError);
}

TEST_CASE("word enumeration") {
    FuchsianGroup g = FuchsianGroup::genus2();
    for (int n = 0; n <= 5; ++n) {
        auto words = g.enumerate_words(n);
        CHECK(words.size() == brute_force_ball_size(g, n));
    }
    auto words = g.enumerate_words(4);
    CHECK(words.size() == 3193);
    std::set<std::vector<std::int8_t>> distinct;
    for (const auto& w : words) {
        for (std::size_t i = 1; i < w.letters.size(); ++i)
            CHECK(w.letters[i] != FuchsianGroup::inverse_letter(w.letters[i - 1]));
        MobiusTransform m;
        for (auto k : w.letters) m = m * g.generators()[k];
        CHECK(std::abs(m.apply(0.3) - w.m.apply(0.3)) < 1e-9);
        distinct.insert(w.letters);
    }
    CHECK(distinct.size() == words.size());

    auto ball = g.elements_within(4.0);
    std::size_t direct = 0;
    for (const auto& w : g.enumerate_words(6))
        if (hyp_distance(0.0, w.m.apply(0.0)) <= 4.0) ++direct;
    CHECK(ball.size() == direct);
}
