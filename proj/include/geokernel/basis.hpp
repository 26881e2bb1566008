#pragma once

#include "geokernel/errors.hpp"
#include "geokernel/integrate.hpp"
#include "geokernel/kernels.hpp"

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace geokernel {

// Clamped B-spline basis of degree p with n functions on [lo, hi] and uniform
// interior knots.
class SplineBasis {
public:
    SplineBasis(double lo, double hi, std::size_t n, int degree);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    std::size_t size() const { return n_; }
    int degree() const { return p_; }
    const std::vector<double>& knots() const { return knots_; }
    // Spacing of the interior knots.
    double spacing() const { return (hi_ - lo_) / static_cast<double>(n_ - static_cast<std::size_t>(p_)); }
    bool covers(double r) const { return r >= lo_ && r <= hi_; }

    // Index of the first nonzero function at r and the p+1 values starting there.
    // Returns false outside [lo, hi].
    bool nonzero(double r, std::size_t& first, double* values) const;
    double eval(std::size_t eta, double r) const;

    bool operator==(const SplineBasis& o) const { return lo_ == o.lo_ && hi_ == o.hi_ && n_ == o.n_ && p_ == o.p_; }

private:
    double lo_, hi_;
    std::size_t n_;
    int p_;
    std::vector<double> knots_;
};

inline constexpr int kMaxDegree = 5;

// sum_eta alpha_eta psi_eta, zero outside the basis range. An estimator without
// a basis is identically zero (used for interactions no pair of agents can
// exhibit).
class Estimator {
public:
    Estimator() = default;
    Estimator(SplineBasis basis, Eigen::VectorXd coeffs);

    bool empty() const { return !basis_.has_value(); }
    const std::optional<SplineBasis>& basis() const { return basis_; }
    const Eigen::VectorXd& coeffs() const { return coeffs_; }
    bool smoothed() const { return smoothed_.has_value(); }

    double eval(double r) const;
    double operator()(double r) const { return eval(r); }

    // Piecewise-polynomial form on [0, hi), zero on [0, lo).
    PiecewiseKernel to_kernel() const;

    // Convolution of the spline (extended by its end values) with a box of
    // width one knot spacing, restricted to [lo, hi]. Degree rises by one.
    Estimator smooth() const;

    nlohmann::json to_json() const;
    static Estimator from_json(const nlohmann::json& j);

private:
    std::optional<SplineBasis> basis_;
    Eigen::VectorXd coeffs_;
    std::optional<PiecewiseKernel> smoothed_;
};

// Estimators phi_hat_{k,k'} for K types, row-major like KernelMatrix.
class EstimatorSet {
public:
    EstimatorSet() = default;
    explicit EstimatorSet(std::size_t k) : k_(k), est_(k * k) {}

    std::size_t types() const { return k_; }
    const Estimator& at(std::size_t k, std::size_t kp) const { return est_[k * k_ + kp]; }
    Estimator& at(std::size_t k, std::size_t kp) { return est_[k * k_ + kp]; }

    KernelMatrix to_kernels() const;
    EstimatorSet smooth() const;

    nlohmann::json to_json() const;
    static EstimatorSet from_json(const nlohmann::json& j);

private:
    std::size_t k_ = 0;
    std::vector<Estimator> est_;
};

// Which pairs of agents enter a measure or a range: all unordered pairs, or
// observers of type k with neighbours of type k'.
using PairFilter = std::optional<std::pair<std::size_t, std::size_t>>;

// Visits d(x_i, x_i') for every snapshot and every selected pair, each unordered
// pair once.
template <class Visit>
void for_each_distance(const TrajectoryDataset& ds, const PairFilter& filter, Visit&& visit) {
    const Manifold m(ds.manifold);
    const std::size_t n = ds.N();
    if (filter && (filter->first >= ds.type_count || filter->second >= ds.type_count)) {
        throw ValidationError("pair filter names a type outside the dataset");
    }
    auto selected = [&](std::size_t i, std::size_t j) {
        if (!filter) return true;
        const auto ti = static_cast<std::size_t>(ds.types[i]);
        const auto tj = static_cast<std::size_t>(ds.types[j]);
        const auto [k, kp] = *filter;
        return (ti == k && tj == kp) || (ti == kp && tj == k);
    };
    for (const auto& run : ds.runs) {
        for (const auto& snap : run.snaps) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (selected(i, j)) visit(m.distance(snap.x[i], snap.x[j]));
                }
            }
        }
    }
}

// Min and max of the pairwise distances over all snapshots.
std::pair<double, double> observed_range(const TrajectoryDataset& ds, const PairFilter& filter = std::nullopt);

// round((ML / ln ML)^(1/3) N^(1/d)), at least 1.
std::size_t n_star(std::size_t M, std::size_t L, std::size_t N, int d);

}  // namespace geokernel
