#include "geokernel/errors.hpp"
#include "geokernel/learn.hpp"
#include "geokernel/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace geokernel;
using namespace testing;

namespace {

EmpiricalMeasure point_mass(double r) { return EmpiricalMeasure{{r}, {1.0}}; }

using P = std::pair<std::size_t, std::size_t>;

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("empirical measures") {
    const auto two = rho_empirical(static_dataset(ManifoldDescriptor::euclidean(2), {{Vec3(0, 0, 0), Vec3(1, 0, 0)}}));
    CHECK(two.r == std::vector<double>{1.0});
    CHECK(two.total() == 1.0);

    const auto three = rho_empirical(
        static_dataset(ManifoldDescriptor::euclidean(2), {{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)}}));
    double at1 = 0.0, at2 = 0.0;
    for (std::size_t j = 0; j < three.size(); ++j) (three.r[j] == 1.0 ? at1 : at2) += three.w[j];
    CHECK(at1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(at2 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(std::abs(three.total() - 1.0) <= 1e-12);

    const auto typed = static_dataset(ManifoldDescriptor::euclidean(2),
                                      {{Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(3.5, 0, 0)}}, {0, 0, 0, 1}, 2);
    const auto ab = rho_empirical(typed, P{0, 1}), ba = rho_empirical(typed, P{1, 0});
    CHECK(ab.r == ba.r);
    CHECK(ab.w == ba.w);
    CHECK(ab.min() == 1.5);
    CHECK(ab.max() == 3.5);
    CHECK_THROWS_AS(rho_empirical(typed, P{1, 1}), ValidationError);
}

TEST_CASE("histogram") {
    const EmpiricalMeasure mu{{0.1, 0.2, 0.9, 1.0}, {0.25, 0.25, 0.25, 0.25}};
    const auto h = mu.histogram(2, 0.0, 1.0);
    CHECK(h[0].center == 0.25);
    CHECK(h[0].mass == 0.5);
    CHECK(h[1].mass == 0.5);
    double total = 0.0;
    for (const auto& b : mu.histogram(200)) total += b.mass;
    CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("weighted L2 norms") {
    CHECK(l2_rho([](double) { return 0.0; }, point_mass(1.3)) == 0.0);
    CHECK(l2_rho([](double) { return 3.0; }, point_mass(2.0)) == 6.0);

    // OD under the uniform measure on [0, 1.2], against adaptive quadrature.
    const std::size_t n = 1000000;
    EmpiricalMeasure mu;
    for (std::size_t j = 0; j < n; ++j) {
        mu.r.push_back(1.2 * (static_cast<double>(j) + 0.5) / static_cast<double>(n));
        mu.w.push_back(1.0 / static_cast<double>(n));
    }
    const PiecewiseKernel od = make_od();
    CHECK(std::abs(l2_rho(od, mu) - 0.31221797654342823) <= 1e-4);

    EmpiricalMeasure small{{0.1, 0.5, 0.7, 0.95}, {0.1, 0.2, 0.3, 0.4}};
    for (double c : {-2.5, 0.3, 7.0}) {
        CHECK(l2_rho([&](double r) { return c * od(r); }, small) ==
              doctest::Approx(std::abs(c) * l2_rho(od, small)).epsilon(1e-12));
    }
}

TEST_CASE("relative errors") {
    const PiecewiseKernel od = make_od();
    const EmpiricalMeasure mu{{0.2, 0.5, 0.75, 0.9}, {0.25, 0.25, 0.25, 0.25}};
    CHECK(rel_error(od, od, mu).value == 0.0);
    CHECK(rel_error([&](double r) { return 2.0 * od(r); }, od, mu).value == doctest::Approx(1.0));

    // Zero truth reports the absolute error with a flag.
    const auto zero = rel_error([](double) { return 0.0; }, [](double) { return 0.0; }, mu);
    CHECK(zero.value == 0.0);
    CHECK(zero.absolute);
    const auto abs = rel_error([](double) { return 1.0; }, [](double) { return 0.0; }, point_mass(2.0));
    CHECK(abs.absolute);
    CHECK(abs.value == 2.0);

    const SplineBasis b(0.2, 0.9, 8, 1);
    Eigen::VectorXd c(8);
    for (int k = 0; k < 8; ++k) c[k] = od(0.2 + 0.1 * k);
    const auto e = rel_error(Estimator(b, c), od, EmpiricalMeasure{{0.3, 0.4}, {0.5, 0.5}});
    CHECK(e.value <= 1e-15);
    CHECK_FALSE(e.absolute);
}

TEST_CASE("trajectory errors") {
    const Manifold m = sphere();
    Rng rng(4);
    ObservationSet X;
    X.times = {0.0, 0.5, 1.0};
    for (int l = 0; l < 3; ++l) X.snaps.push_back({sample_initial(m, ICSpec::parse("uniform_sphere", 0), 5, rng), {}});
    CHECK(traj_error(X, X, m) == 0.0);

    ObservationSet Y = X;
    const double eps = 0.01;
    const Vec3 p = Y.snaps[1].x[2];
    Vec3 u = m.to_tangent(p, Vec3(0.3, -0.2, 0.9));
    u.normalize();
    // Rotate agent 2 by geodesic distance eps.
    Y.snaps[1].x[2] = std::cos(eps / kSphereRadius) * p + std::sin(eps / kSphereRadius) * kSphereRadius * u;
    CHECK(traj_error(X, Y, m) == doctest::Approx(eps / std::sqrt(5.0)).epsilon(1e-8));
    CHECK(traj_error(X, Y, m) == traj_error(Y, X, m));

    ObservationSet Z = X;
    Z.times[1] = 0.4;
    CHECK_THROWS_AS(traj_error(X, Z, m), ValidationError);
}

TEST_CASE("trajectory error statistics") {
    const ModelSpec truth(sphere(), make_od(), 8);
    IntegratorConfig cfg;
    cfg.h = 0.01;
    std::vector<std::vector<Vec3>> ics;
    for (std::size_t k = 0; k < 3; ++k) ics.push_back(initial_condition(truth, ICSpec::parse("uniform_sphere", 0), 1, k));
    const auto same = traj_error_stats(truth, truth, ics, cfg, 0.5, 6);
    CHECK(same.mean <= 1e-10);

    const ModelSpec other(sphere(), PiecewiseKernel::constant(0.5, 1.0), 8);
    const auto one = traj_error_stats(truth, other, {ics[0]}, cfg, 0.5, 6);
    CHECK(one.std == 0.0);
    CHECK(one.mean == one.errors[0]);
    const auto all = traj_error_stats(truth, other, ics, cfg, 0.5, 6, 1);
    CHECK(all.errors.size() == 3);
    CHECK(all.errors[0] == one.errors[0]);
    CHECK(traj_error_stats(truth, other, ics, cfg, 0.5, 6, 4).errors == all.errors);
}

TEST_CASE("log-log fit") {
    const std::vector<double> x{10, 100, 1000, 10000};
    std::vector<double> y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -1.0 / 3.0));
    const SlopeFit exact = fit_loglog(x, y);
    CHECK(exact.slope == doctest::Approx(-1.0 / 3.0).epsilon(1e-12));
    CHECK(exact.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));

    // Noisy data: the confidence interval brackets the slope.
    const std::vector<double> yn{1.0, 0.5, 0.3, 0.1};
    const SlopeFit noisy = fit_loglog(x, yn);
    CHECK(noisy.ci_lo < noisy.slope);
    CHECK(noisy.ci_hi > noisy.slope);
    CHECK_THROWS_AS(fit_loglog({1, 2}, {1, 2}), ValidationError);
    CHECK_THROWS_AS(fit_loglog({1, 1, 1}, {1, 2, 3}), ValidationError);
}

TEST_CASE("convergence study") {
    const std::vector<std::size_t> Ms{32, 128, 512};
    const auto decay = convergence_study(Ms, 2, [](std::size_t M, std::size_t rep) {
        return (1.0 + 0.01 * static_cast<double>(rep)) * std::pow(static_cast<double>(M), -1.0 / 3.0);
    });
    CHECK(decay.fit.slope == doctest::Approx(-1.0 / 3.0).epsilon(1e-3));
    CHECK_FALSE(decay.flat);
    CHECK_FALSE(decay.floor_limited);
    CHECK(decay.points.size() == 3);
    CHECK(decay.points[0].errors.size() == 2);

    const auto floor = convergence_study(Ms, 2, [](std::size_t, std::size_t) { return 1e-13; });
    CHECK(floor.floor_limited);

    // Duplicated data adds no information: constant error, slope 0, flagged.
    const auto dup = convergence_study(Ms, 3, [](std::size_t, std::size_t rep) { return 0.2 + 0.01 * double(rep); });
    CHECK(std::abs(dup.fit.slope) <= 1e-12);
    CHECK(dup.flat);

    CHECK_THROWS_AS(convergence_study({32, 64}, 1, [](std::size_t, std::size_t) { return 1.0; }), ValidationError);
}

TEST_CASE("excess loss dominates the weighted error") {
    // loss(est) - loss(truth) >= lambda_min-based c * ||est - truth||^2.
    const ModelSpec model(plane(), make_od(), 6);
    IntegratorConfig cfg;
    cfg.h = 0.01;
    GenerateOptions opt;
    opt.M = 8;
    opt.L = 10;
    opt.T = 1.0;
    const auto ds = generate_dataset(model, ICSpec::parse("euclidean_ball", 1.0), cfg, opt);
    const auto [lo, hi] = observed_range(ds);
    const SplineBasis basis(lo, hi, 10, 1);
    const NormalEquations ne = assemble(ds, basis);
    const LearnReport rep = solve(ne);
    EstimatorSet est(1);
    est.at(0, 0) = Estimator(basis, rep.coeffs);
    const auto mu = rho_empirical(ds);
    const double excess = loss(ds, est) - loss(ds, KernelMatrix(make_od()));
    const double err = l2_rho([&](double r) { return est.at(0, 0)(r) - make_od()(r); }, mu);
    CHECK(excess > 0.0);
    CHECK(excess >= 1e-3 * rep.lambda_min * err * err);
}

}  // TEST_SUITE
