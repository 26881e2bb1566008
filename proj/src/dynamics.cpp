#include "geokernel/dynamics.hpp"

#include "geokernel/errors.hpp"

#include <cmath>

namespace geokernel {

ModelSpec::ModelSpec(Manifold manifold, KernelMatrix kernels, std::vector<int> types)
    : manifold_(std::move(manifold)), kernels_(std::move(kernels)), types_(std::move(types)) {
    if (kernels_.types() == 0) throw ValidationError("model: empty kernel matrix");
    if (types_.size() < 2) throw ValidationError("model: need at least two agents");
    for (int t : types_) {
        if (t < 0 || static_cast<std::size_t>(t) >= kernels_.types()) {
            throw ValidationError("model: type label outside the kernel matrix");
        }
    }
}

ModelSpec::ModelSpec(Manifold manifold, PiecewiseKernel kernel, std::size_t n)
    : ModelSpec(std::move(manifold), KernelMatrix(std::move(kernel)), std::vector<int>(n, 0)) {}

std::vector<std::size_t> ModelSpec::type_counts() const {
    std::vector<std::size_t> counts(kernels_.types(), 0);
    for (int t : types_) ++counts[static_cast<std::size_t>(t)];
    return counts;
}

ModelSpec ModelSpec::with_types(std::vector<int> types) const {
    return ModelSpec(manifold_, kernels_, std::move(types));
}

std::vector<int> types_from_counts(const std::vector<std::size_t>& counts) {
    std::vector<int> types;
    for (std::size_t k = 0; k < counts.size(); ++k) types.insert(types.end(), counts[k], static_cast<int>(k));
    return types;
}

void rhs(const ModelSpec& model, const std::vector<Vec3>& points, std::vector<Vec3>& out) {
    const std::size_t n = points.size();
    if (n != model.agents()) throw ValidationError("rhs: state size does not match the model");
    const auto& m = model.manifold();
    const auto& km = model.kernels();
    const auto& types = model.types();
    out.assign(n, Vec3::Zero());
    // The i' = i term is w(x, x) = 0 and is skipped.
    for (std::size_t i = 0; i < n; ++i) {
        const auto ti = static_cast<std::size_t>(types[i]);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto tj = static_cast<std::size_t>(types[j]);
            const auto& phi_ij = km.at(ti, tj);
            const auto& phi_ji = km.at(tj, ti);
            const PairGeometry g = m.pair(points[i], points[j]);
            if (!std::isfinite(g.dist)) throw NumericalError("rhs: non-finite pairwise distance");
            const double a = phi_ij.eval(g.dist);
            const double b = (&phi_ij == &phi_ji) ? a : phi_ji.eval(g.dist);
            out[i] += a * g.w_xy;
            out[j] += b * g.w_yx;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (auto& v : out) v *= inv_n;
}

std::vector<Vec3> rhs(const ModelSpec& model, const std::vector<Vec3>& points) {
    std::vector<Vec3> out;
    rhs(model, points, out);
    return out;
}

double energy(const ModelSpec& model, const std::vector<Vec3>& points) {
    if (!model.homogeneous()) throw ValidationError("energy: only defined for homogeneous models");
    const auto& phi = model.kernels().at(0, 0);
    const auto& m = model.manifold();
    const std::size_t n = points.size();
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            // Ordered double sum: each unordered pair appears twice.
            e += phi.first_moment(m.distance(points[i], points[j]));
        }
    }
    return e / static_cast<double>(n);
}

}  // namespace geokernel
