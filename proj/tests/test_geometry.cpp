#include "geokernel/errors.hpp"
#include "geokernel/geometry.hpp"
#include "support.hpp"

#include <doctest.h>

#include <Eigen/LU>

#include <cmath>

using namespace geokernel;
using namespace testing;

TEST_SUITE("geometry") {

TEST_CASE("sphere distances") {
    const Manifold m = sphere();
    const double r = kSphereRadius;
    CHECK(m.distance(Vec3(r, 0, 0), Vec3(-r, 0, 0)) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(m.distance(Vec3(r, 0, 0), Vec3(0, r, 0)) == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(m.distance(Vec3(r, 0, 0), Vec3(r, 0, 0)) == 0.0);
}

TEST_CASE("poincare paper distance at the origin") {
    const Manifold m = disk();
    CHECK(m.distance(Vec3::Zero(), Vec3(0.5, 0, 0)) == doctest::Approx(0.79536546122390563).epsilon(1e-14));
}

TEST_CASE("factor2 distance matches 2 atanh") {
    const Manifold m = disk(DistanceConvention::Factor2);
    CHECK(m.distance(Vec3::Zero(), Vec3(0.3, 0, 0)) == doctest::Approx(0.61903920840622343).epsilon(1e-14));
    for (double t = 0.01; t < 0.99; t += 0.01) {
        CHECK(std::abs(m.distance(Vec3::Zero(), Vec3(t, 0, 0)) - 2.0 * std::atanh(t)) <= 1e-10);
    }
}

TEST_CASE("unit tangent examples") {
    const double r = kSphereRadius;
    const Manifold s = sphere();
    CHECK((s.unit_tangent(Vec3(r, 0, 0), Vec3(0, r, 0)) - Vec3(0, 1, 0)).norm() <= 1e-14);

    const Manifold d = disk();
    CHECK((d.unit_tangent(Vec3::Zero(), Vec3(0.5, 0, 0)) - Vec3(0.5, 0, 0)).norm() <= 1e-14);

    for (const Manifold& m : {s, d, plane()}) {
        const Vec3 x = m.kind() == ManifoldKind::Sphere ? Vec3(0, 0, r) : Vec3(0.1, 0.2, 0);
        CHECK(m.unit_tangent(x, x) == Vec3::Zero());
        CHECK(m.log_weight(x, x) == Vec3::Zero());
    }
}

TEST_CASE("log weight examples") {
    const double r = kSphereRadius;
    const Manifold s = sphere();
    CHECK(s.log_weight(Vec3(r, 0, 0), Vec3(-r, 0, 0)) == Vec3::Zero());
    // Inside the cut-locus band the weight is zero as well.
    const double a = std::numbers::pi - 1e-7;
    CHECK(s.log_weight(Vec3(r, 0, 0), Vec3(r * std::cos(a), r * std::sin(a), 0)) == Vec3::Zero());

    const Manifold d = disk();
    const Vec3 w = d.log_weight(Vec3::Zero(), Vec3(0.5, 0, 0));
    CHECK(w.x() == doctest::Approx(0.39768273061195282).epsilon(1e-14));
    CHECK(w.y() == 0.0);
    CHECK(d.norm(Vec3::Zero(), w) == doctest::Approx(0.79536546122390563).epsilon(1e-14));
}

TEST_CASE("inner products") {
    const Manifold d = disk();
    CHECK(d.inner(Vec3::Zero(), Vec3(1, 0, 0), Vec3(1, 0, 0)) == doctest::Approx(4.0));
    CHECK(d.inner(Vec3(0.5, 0, 0), Vec3(1, 0, 0), Vec3(1, 0, 0)) == doctest::Approx(7.1111111111111111).epsilon(1e-14));
    const Manifold s = sphere();
    CHECK(s.inner(Vec3(kSphereRadius, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)) == 0.0);
}

TEST_CASE("retract") {
    const Manifold unit(ManifoldDescriptor::sphere(1.0, kInf));
    const Vec3 x(1, 0, 0);
    CHECK(unit.retract(x, Vec3::Zero()) == x);
    const Vec3 y = unit.retract(x, Vec3(0, 1, 0));
    CHECK((y - Vec3(1 / std::sqrt(2.0), 1 / std::sqrt(2.0), 0)).norm() <= 1e-15);
    CHECK_THROWS_AS(unit.retract(x, Vec3(-1, 0, 0)), NumericalError);

    const Manifold d = disk();
    const Vec3 z = d.retract(Vec3(0.9, 0, 0), Vec3(0.2, 0, 0));
    CHECK(z.x() == 1.0 - 1e-12);
    CHECK(d.retract(Vec3(0.1, 0.2, 0), Vec3::Zero()) == Vec3(0.1, 0.2, 0));
}

TEST_CASE("descriptor validation") {
    CHECK_THROWS_AS(Manifold(ManifoldDescriptor::sphere(-1.0, 5.0)), ValidationError);
    CHECK_THROWS_AS(Manifold(ManifoldDescriptor::sphere(1.0, 0.0)), ValidationError);
    ManifoldDescriptor bad = ManifoldDescriptor::poincare(DistanceConvention::PaperFormula);
    bad.dim = 3;
    CHECK_THROWS_AS(Manifold{bad}, ValidationError);
}

TEST_CASE("hyperbolic ball radius") {
    CHECK(hyperbolic_ball_radius(5.0) == doctest::Approx(0.88975708773732206).epsilon(1e-13));
    CHECK(hyperbolic_ball_radius(0.5) == doctest::Approx(0.10274694754892764).epsilon(1e-12));
    CHECK(hyperbolic_ball_radius(1.0) == doctest::Approx(0.28086047818295723).epsilon(1e-13));
    CHECK(hyperbolic_ball_radius(2.0) == doctest::Approx(0.55268635253777748).epsilon(1e-13));
    // The closed form gives the ball whose paper-convention diameter is D.
    const double r0 = hyperbolic_ball_radius(5.0);
    CHECK(disk().distance(Vec3(r0, 0, 0), Vec3(-r0, 0, 0)) == doctest::Approx(4.9966366892966387).epsilon(1e-12));
}

TEST_CASE("initial conditions") {
    Rng a(42), b(42);
    const Manifold s = sphere();
    const auto p = sample_initial(s, ICSpec::parse("uniform_sphere", 0), 20, a);
    const auto q = sample_initial(s, ICSpec::parse("uniform_sphere", 0), 20, b);
    CHECK(p == q);
    for (const auto& x : p) CHECK(std::abs(x.norm() - kSphereRadius) <= 1e-12);

    Rng rng(3);
    const Manifold d = disk();
    const auto ball = sample_initial(d, ICSpec::parse("hyperbolic_ball", 5.0), 200, rng);
    for (const auto& x : ball) CHECK(x.norm() <= hyperbolic_ball_radius(5.0));

    const auto ps1 = sample_initial(d, ICSpec::parse("ps1_disk", 0), 50, rng);
    for (std::size_t i = 0; i + 1 < ps1.size(); ++i) {
        CHECK(ps1[i].norm() >= hyperbolic_ball_radius(1.0) - 1e-15);
        CHECK(ps1[i].norm() <= hyperbolic_ball_radius(2.0) + 1e-15);
    }
    CHECK(ps1.back().norm() <= hyperbolic_ball_radius(0.5));

    const auto ps1s = sample_initial(s, ICSpec::parse("ps1_sphere", 0), 11, rng);
    for (const auto& x : ps1s) CHECK(std::abs(x.norm() - kSphereRadius) <= 1e-12);
    // The predator sits closer to every prey than the prey annulus is wide.
    for (std::size_t i = 0; i + 1 < ps1s.size(); ++i) CHECK(s.distance(ps1s[i], ps1s.back()) < 1.2);

    CHECK_THROWS_AS(ICSpec::parse("gaussian", 1.0), ValidationError);
    CHECK_THROWS_AS(sample_initial(d, ICSpec::parse("uniform_sphere", 0), 3, rng), ValidationError);
}

TEST_CASE("random rotation is orthogonal") {
    Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        const Eigen::Matrix3d q = random_rotation(rng);
        CHECK((q.transpose() * q - Eigen::Matrix3d::Identity()).norm() <= 1e-13);
        CHECK(q.determinant() == doctest::Approx(1.0));
    }
}

TEST_CASE("randomized properties") {
    Rng rng(11);
    const std::vector<Manifold> all{sphere(), disk(), disk(DistanceConvention::Factor2), plane()};
    for (const Manifold& m : all) {
        const bool metric = !(m.kind() == ManifoldKind::PoincareDisk &&
                              m.descriptor().convention == DistanceConvention::PaperFormula);
        for (int t = 0; t < 300; ++t) {
            const Vec3 x = random_point(m, rng), y = random_point(m, rng), z = random_point(m, rng);
            const double dxy = m.distance(x, y);
            CHECK(std::abs(dxy - m.distance(y, x)) <= 1e-12 * std::max(1.0, dxy));
            CHECK(m.distance(x, x) == 0.0);
            const double u = m.norm(x, m.unit_tangent(x, y));
            CHECK((u == 0.0 || std::abs(u - 1.0) <= 1e-10));
            CHECK(std::abs(m.norm(x, m.log_weight(x, y)) - dxy) <= 1e-10 * std::max(1.0, dxy));
            if (metric) CHECK(m.distance(x, z) <= m.distance(x, y) + m.distance(y, z) + 1e-10);
            const PairGeometry g = m.pair(x, y);
            CHECK(g.dist == dxy);
            CHECK((g.w_xy - m.log_weight(x, y)).norm() <= 1e-12 * std::max(1.0, dxy));
            CHECK((g.w_yx - m.log_weight(y, x)).norm() <= 1e-12 * std::max(1.0, dxy));
        }
    }
}

TEST_CASE("euclidean log weight is the difference") {
    Rng rng(2);
    const Manifold m = plane();
    for (int t = 0; t < 100; ++t) {
        const Vec3 x = random_point(m, rng), y = random_point(m, rng);
        CHECK(m.log_weight(x, y) == y - x);
    }
}

TEST_CASE("disk tangent follows the geodesic") {
    // The geodesic from x toward y, stepped with the unit tangent, gets closer
    // to y at unit rate.
    Rng rng(8);
    const Manifold m = disk(DistanceConvention::Factor2);
    for (int t = 0; t < 100; ++t) {
        const Vec3 x = random_point(m, rng), y = random_point(m, rng);
        const double d0 = m.distance(x, y);
        if (d0 < 1e-3) continue;
        const double eps = 1e-6;
        const Vec3 v = m.unit_tangent(x, y);
        const double rate = (d0 - m.distance(x + eps * v, y)) / eps;
        CHECK(rate == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("sphere retraction is first-order consistent") {
    Rng rng(9);
    const Manifold m = sphere();
    for (int t = 0; t < 50; ++t) {
        const Vec3 x = random_point(m, rng);
        Vec3 u = m.to_tangent(x, random_point(m, rng));
        u.normalize();
        const double r1 = m.distance(x, m.retract(x, 1e-4 * u)) / 1e-4;
        const double r2 = m.distance(x, m.retract(x, 1e-5 * u)) / 1e-5;
        CHECK((100.0 * r2 - r1) / 99.0 == doctest::Approx(1.0).epsilon(1e-3));
        CHECK(std::abs(m.retract(x, 1e-4 * u).norm() - kSphereRadius) <= 1e-12);
    }
}

}  // TEST_SUITE
