#include <stdexcept>
#include <cmath>
#include <numbers>
#include <random>

#include "codex/phantom.hpp"
#include "codex/projector.hpp"
#include "codex/rng.hpp"
#include "doctest.h"

using namespace codex;

namespace {

Array2D random_array(std::size_t r, std::size_t c, std::uint64_t seed) {
    CounterRng rng(seed);
    Array2D a(r, c);
    for (auto& v : a.flat()) v = rng.uniform() - 0.5;
    return a;
}

// Exact parallel-beam line integral of a centered disk: 2 sqrt(R^2 - t^2).
double disk_chord(double t, double R) { return std::abs(t) < R ? 2.0 * std::sqrt(R * R - t * t) : 0.0; }

}  // namespace

TEST_SUITE("projector") {

TEST_CASE("trapezoid footprint cdf") {
    CHECK(trapezoid_cdf(-10, 1, 0.5) == 0.0);
    CHECK(trapezoid_cdf(10, 1, 0.5) == 1.0);
    CHECK(trapezoid_cdf(0, 1, 0.5) == doctest::Approx(0.5));
    CHECK(trapezoid_cdf(0.2, 1, 0.0) == doctest::Approx(0.7));
    // Symmetry: F(u) + F(-u) = 1.
    for (double u : {0.1, 0.3, 0.6, 0.74})
        CHECK(trapezoid_cdf(u, 0.8, 0.6) + trapezoid_cdf(-u, 0.8, 0.6) == doctest::Approx(1.0));
    // Triangle (w1 == w2): F(-w/2) = 1/8 of the area at a quarter of the support.
    CHECK(trapezoid_cdf(-0.5, 1, 1) == doctest::Approx(0.125));
}

TEST_CASE("geometry defaults and validation") {
    const Geometry g = Geometry::square(64, 0.5);
    CHECK(g.num_detector_pixels == 91);
    CHECK(g.detector_pitch == 0.5);
    Geometry bad = g;
    bad.pixel_pitch = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    CHECK_THROWS_AS(Projector(g, {0.0, std::nan("")}), std::invalid_argument);
}

TEST_CASE("single pixel at zero angle lands in its detector bin") {
    Geometry g = Geometry::square(4);
    g.num_detector_pixels = 4;
    Projector A(g, {0.0});
    Array2D img(4, 4);
    img(0, 2) = 1.0;
    const Array2D s = A.project(img);
    CHECK(s(0, 2) == doctest::Approx(1.0));
    CHECK(s(0, 0) + s(0, 1) + s(0, 3) == doctest::Approx(0.0));
}

TEST_CASE("pixel mass is conserved at every angle") {
    const Geometry g = Geometry::square(16, 0.25);
    std::vector<double> angles;
    for (int a = 0; a < 37; ++a) angles.push_back(a * std::numbers::pi / 37);
    Projector A(g, angles);
    const Array2D img = random_array(16, 16, 4);
    double mass = 0;
    for (double v : img.flat()) mass += v;
    const Array2D s = A.project(img);
    for (int a = 0; a < 37; ++a) {
        double sum = 0;
        for (double v : s.row(a)) sum += v;
        CHECK(sum * g.detector_pitch == doctest::Approx(mass * g.pixel_pitch * g.pixel_pitch).epsilon(1e-6));
    }
}

TEST_CASE("disk projections match analytic chord lengths") {
    const int n = 128;
    const double s = 1.0 / n;
    const Geometry g = Geometry::square(n, s);
    PhantomSpec spec;
    spec.kind = PhantomKind::disk;
    spec.n_side = n;
    const Array2D disk = make_phantom(spec);
    const double R = spec.radius_px() * s;
    Projector A(g, {0.0, 0.3, std::numbers::pi / 4, 1.2});
    const Array2D sino = A.project(disk);
    const int md = g.num_detector_pixels;
    double max_err = 0;
    for (int a = 0; a < 4; ++a) {
        for (int d = 0; d < md; ++d) {
            const double t = (d - 0.5 * (md - 1)) * s;
            if (std::abs(t) > 0.9 * R) continue;
            max_err = std::max(max_err, std::abs(sino(a, d) - disk_chord(t, R)) / (2 * R));
        }
    }
    CHECK(max_err < 0.01);
}

TEST_CASE("backproject is the exact adjoint") {
    const Geometry g = Geometry::square(24, 0.1);
    std::vector<double> angles;
    for (int a = 0; a < 19; ++a) angles.push_back(0.37 + a * 0.41);
    Projector A(g, angles);
    for (int trial = 0; trial < 10; ++trial) {
        const Array2D x = random_array(24, 24, 100 + trial);
        const Array2D y = random_array(static_cast<std::size_t>(A.num_angles()), static_cast<std::size_t>(g.num_detector_pixels), 200 + trial);
        const double lhs = dot(A.project(x).flat(), y.flat());
        const double rhs = dot(x.flat(), A.backproject(y).flat());
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(std::abs(lhs), 1.0));
    }
}

TEST_CASE("one-shot helpers agree with the class") {
    const Geometry g = Geometry::square(16);
    const std::vector<double> angles{0.1, 0.9, 2.0};
    const Array2D x = random_array(16, 16, 9);
    const Sinogram s = project(x, g, angles, SinogramRole::view);
    CHECK(s.role == SinogramRole::view);
    CHECK(s.angles == angles);
    Projector A(g, angles);
    CHECK(s.values == A.project(x));
    CHECK(backproject(s, g) == A.backproject(s.values));
}

TEST_CASE("shape mismatches are rejected") {
    const Geometry g = Geometry::square(16);
    Projector A(g, {0.0, 1.0});
    CHECK_THROWS_AS(A.project(Array2D(15, 16)), std::invalid_argument);
    CHECK_THROWS_AS(A.backproject(Array2D(3, g.num_detector_pixels)), std::invalid_argument);
}

TEST_CASE("center offset shifts the projection") {
    Geometry g = Geometry::square(8);
    g.num_detector_pixels = 12;
    Geometry shifted = g;
    shifted.center_offset = 1.0;
    Array2D img(8, 8);
    img(3, 3) = 1.0;
    const Array2D a = Projector(g, {0.0}).project(img);
    const Array2D b = Projector(shifted, {0.0}).project(img);
    for (int d = 1; d < 12; ++d) CHECK(b(0, d - 1) == doctest::Approx(a(0, d)));
}

}
