#pragma once

#include "geokernel/geometry.hpp"
#include "geokernel/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace testing {

using geokernel::Manifold;
using geokernel::ManifoldDescriptor;
using geokernel::Rng;
using geokernel::Vec3;

inline const double kSphereRadius = 5.0 / std::numbers::pi;

inline Manifold sphere() { return Manifold(ManifoldDescriptor::sphere(kSphereRadius, 5.0)); }
inline Manifold disk(geokernel::DistanceConvention c = geokernel::DistanceConvention::PaperFormula) {
    return Manifold(ManifoldDescriptor::poincare(c));
}
inline Manifold plane() { return Manifold(ManifoldDescriptor::euclidean(2)); }

// Random point: uniform direction on the sphere, inside radius 0.95 on the
// disk, inside [-2, 2]^2 on the plane.
inline Vec3 random_point(const Manifold& m, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (m.kind()) {
    case geokernel::ManifoldKind::Sphere: {
        Vec3 g(gauss(rng), gauss(rng), gauss(rng));
        return m.descriptor().radius / g.norm() * g;
    }
    case geokernel::ManifoldKind::PoincareDisk: {
        const double r = 0.95 * std::sqrt(unit(rng));
        const double a = 2.0 * std::numbers::pi * unit(rng);
        return Vec3(r * std::cos(a), r * std::sin(a), 0.0);
    }
    case geokernel::ManifoldKind::Euclidean:
        return Vec3(4.0 * unit(rng) - 2.0, 4.0 * unit(rng) - 2.0, 0.0);
    }
    return Vec3::Zero();
}

// Dataset of one run whose snapshots are the given static configurations,
// with zero velocities.
inline geokernel::TrajectoryDataset static_dataset(const ManifoldDescriptor& m,
                                                   const std::vector<std::vector<Vec3>>& frames,
                                                   std::vector<int> types = {}, std::size_t type_count = 1) {
    geokernel::TrajectoryDataset ds;
    ds.manifold = m;
    const std::size_t n = frames.front().size();
    ds.types = types.empty() ? std::vector<int>(n, 0) : std::move(types);
    ds.type_count = type_count;
    ds.T = 1.0;
    geokernel::ObservationSet run;
    for (std::size_t l = 0; l < frames.size(); ++l) {
        ds.times.push_back(frames.size() == 1 ? 0.0 : static_cast<double>(l) / static_cast<double>(frames.size() - 1));
        run.snaps.push_back({frames[l], std::vector<Vec3>(n, Vec3::Zero())});
    }
    run.times = ds.times;
    ds.runs.push_back(run);
    return ds;
}

// Two agents with phi = 1 on the plane: the midpoint is fixed and the
// separation decays as exp(-t).
struct TwoBody {
    geokernel::ModelSpec model{plane(), geokernel::PiecewiseKernel::constant(1.0), 2};
    std::vector<Vec3> x0{Vec3(-0.4, 0.1, 0), Vec3(0.6, 0.3, 0)};

    std::vector<Vec3> exact(double t) const {
        const Vec3 mid = 0.5 * (x0[0] + x0[1]);
        const Vec3 half = 0.5 * (x0[1] - x0[0]) * std::exp(-t);
        return {mid - half, mid + half};
    }
    double error(const std::vector<Vec3>& x, double t) const {
        const auto e = exact(t);
        return std::max((x[0] - e[0]).norm(), (x[1] - e[1]).norm());
    }
};

}  // namespace testing
