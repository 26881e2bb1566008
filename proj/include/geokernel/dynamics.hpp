#pragma once

#include "geokernel/geometry.hpp"
#include "geokernel/kernels.hpp"

#include <vector>

namespace geokernel {

struct SystemState {
    std::vector<Vec3> points;
    double time = 0.0;
};

// Manifold, kernel matrix and per-agent type labels (0-based) of a first-order
// interacting system.
class ModelSpec {
public:
    ModelSpec(Manifold manifold, KernelMatrix kernels, std::vector<int> types);
    // Homogeneous system of n agents.
    ModelSpec(Manifold manifold, PiecewiseKernel kernel, std::size_t n);

    const Manifold& manifold() const { return manifold_; }
    const KernelMatrix& kernels() const { return kernels_; }
    const std::vector<int>& types() const { return types_; }
    std::size_t agents() const { return types_.size(); }
    std::size_t type_count() const { return kernels_.types(); }
    std::vector<std::size_t> type_counts() const;
    bool homogeneous() const { return kernels_.types() == 1; }

    // Same manifold and kernels with a different population.
    ModelSpec with_types(std::vector<int> types) const;

private:
    Manifold manifold_;
    KernelMatrix kernels_;
    std::vector<int> types_;
};

// Types for `counts[k]` agents of type k, in type order.
std::vector<int> types_from_counts(const std::vector<std::size_t>& counts);

// dx_i/dt = 1/N sum_i' phi_{k(i),k(i')}(d(x_i, x_i')) w(x_i, x_i').
void rhs(const ModelSpec& model, const std::vector<Vec3>& points, std::vector<Vec3>& out);
std::vector<Vec3> rhs(const ModelSpec& model, const std::vector<Vec3>& points);

// E = 1/N sum_{i,i'} P(d(x_i, x_i')) with P(d) = 1/2 int_0^d rho phi(rho) drho,
// so that the velocity field is -grad E. Homogeneous models only.
double energy(const ModelSpec& model, const std::vector<Vec3>& points);

}  // namespace geokernel
