#pragma once

#include "geokernel/basis.hpp"
#include "geokernel/dynamics.hpp"
#include "geokernel/integrate.hpp"

#include <functional>
#include <string>
#include <vector>

namespace geokernel {

// Weighted samples of pairwise distances with total weight 1.
struct EmpiricalMeasure {
    std::vector<double> r;
    std::vector<double> w;

    std::size_t size() const { return r.size(); }
    double min() const;
    double max() const;
    double total() const;

    struct Bin {
        double center = 0.0;
        double mass = 0.0;
    };
    // Mass per bin on [lo, hi]; samples outside are dropped.
    std::vector<Bin> histogram(std::size_t bins, double lo, double hi) const;
    std::vector<Bin> histogram(std::size_t bins = 200) const { return histogram(bins, min(), max()); }
};

// Uniform weights over every snapshot and every unordered pair (or every pair
// between the two filtered types).
EmpiricalMeasure rho_empirical(const TrajectoryDataset& ds, const PairFilter& filter = std::nullopt);

// sqrt(sum_j w_j (f(r_j) r_j)^2).
double l2_rho(const std::function<double(double)>& f, const EmpiricalMeasure& mu);

struct RelError {
    double value = 0.0;
    bool absolute = false;  // truth has zero norm; value is the absolute error
};

RelError rel_error(const std::function<double(double)>& est, const std::function<double(double)>& truth,
                   const EmpiricalMeasure& mu);
RelError rel_error(const Estimator& est, const PiecewiseKernel& truth, const EmpiricalMeasure& mu);

// max_l sqrt(1/N sum_i d(x_i(t_l), xhat_i(t_l))^2).
double traj_error(const ObservationSet& X, const ObservationSet& Xhat, const Manifold& m);

struct TrajErrorStats {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
    std::vector<double> errors;
};

// Runs both models from every initial condition with the same integrator and
// compares the trajectories on L observation times in [0, T].
TrajErrorStats traj_error_stats(const ModelSpec& truth, const ModelSpec& est, const std::vector<std::vector<Vec3>>& ics,
                                const IntegratorConfig& cfg, double T, std::size_t L, unsigned threads = 0);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double confidence = 0.95;
};

// Least-squares line through (log x, log y) with a Student-t confidence interval.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double confidence = 0.95);

struct StudyPoint {
    std::size_t M = 0;
    double mean = 0.0;
    double std = 0.0;
    std::vector<double> errors;  // one per repeat
};

struct StudyResult {
    std::vector<StudyPoint> points;
    SlopeFit fit;
    bool floor_limited = false;  // every error sits at the solver floor
    bool flat = false;           // confidence interval contains 0
};

inline constexpr double kErrorFloor = 1e-8;

// rel_error_at(M, repeat) learns from the first M trajectories of dataset
// `repeat` and returns the relative error. The slope is fitted to every
// (M, repeat) sample.
StudyResult convergence_study(const std::vector<std::size_t>& M_list, std::size_t repeats,
                              const std::function<double(std::size_t, std::size_t)>& rel_error_at);

}  // namespace geokernel
