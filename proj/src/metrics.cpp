#include "geokernel/metrics.hpp"

#include "geokernel/errors.hpp"
#include "geokernel/parallel.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace geokernel {

double EmpiricalMeasure::min() const {
    if (r.empty()) throw ValidationError("empty measure");
    return *std::min_element(r.begin(), r.end());
}

double EmpiricalMeasure::max() const {
    if (r.empty()) throw ValidationError("empty measure");
    return *std::max_element(r.begin(), r.end());
}

double EmpiricalMeasure::total() const {
    return std::accumulate(w.begin(), w.end(), 0.0);
}

std::vector<EmpiricalMeasure::Bin> EmpiricalMeasure::histogram(std::size_t bins, double lo, double hi) const {
    if (bins == 0) throw ValidationError("histogram: need at least one bin");
    if (!(hi >= lo)) throw ValidationError("histogram: invalid range");
    const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
    std::vector<Bin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) out[b].center = lo + (static_cast<double>(b) + 0.5) * width;
    for (std::size_t j = 0; j < r.size(); ++j) {
        if (r[j] < lo || r[j] > hi) continue;
        auto b = static_cast<std::size_t>((r[j] - lo) / width);
        out[std::min(b, bins - 1)].mass += w[j];
    }
    return out;
}

EmpiricalMeasure rho_empirical(const TrajectoryDataset& ds, const PairFilter& filter) {
    EmpiricalMeasure mu;
    for_each_distance(ds, filter, [&](double r) { mu.r.push_back(r); });
    if (mu.r.empty()) throw ValidationError("rho_empirical: no pairs selected");
    mu.w.assign(mu.r.size(), 1.0 / static_cast<double>(mu.r.size()));
    return mu;
}

double l2_rho(const std::function<double(double)>& f, const EmpiricalMeasure& mu) {
    double s = 0.0;
    for (std::size_t j = 0; j < mu.r.size(); ++j) {
        const double v = f(mu.r[j]) * mu.r[j];
        s += mu.w[j] * v * v;
    }
    return std::sqrt(s);
}

RelError rel_error(const std::function<double(double)>& est, const std::function<double(double)>& truth,
                   const EmpiricalMeasure& mu) {
    const double diff = l2_rho([&](double r) { return est(r) - truth(r); }, mu);
    const double norm = l2_rho(truth, mu);
    if (norm > 0.0) return {diff / norm, false};
    return {diff, true};
}

RelError rel_error(const Estimator& est, const PiecewiseKernel& truth, const EmpiricalMeasure& mu) {
    return rel_error([&](double r) { return est.eval(r); }, [&](double r) { return truth.eval(r); }, mu);
}

double traj_error(const ObservationSet& X, const ObservationSet& Xhat, const Manifold& m) {
    if (X.times != Xhat.times || X.snaps.size() != Xhat.snaps.size()) {
        throw ValidationError("traj_error: observation grids differ");
    }
    double worst = 0.0;
    for (std::size_t l = 0; l < X.snaps.size(); ++l) {
        const auto& a = X.snaps[l].x;
        const auto& b = Xhat.snaps[l].x;
        if (a.size() != b.size() || a.empty()) throw ValidationError("traj_error: agent counts differ");
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = m.distance(a[i], b[i]);
            s += d * d;
        }
        worst = std::max(worst, std::sqrt(s / static_cast<double>(a.size())));
    }
    return worst;
}

TrajErrorStats traj_error_stats(const ModelSpec& truth, const ModelSpec& est, const std::vector<std::vector<Vec3>>& ics,
                                const IntegratorConfig& cfg, double T, std::size_t L, unsigned threads) {
    if (ics.empty()) throw ValidationError("traj_error_stats: no initial conditions");
    if (!(truth.manifold().descriptor() == est.manifold().descriptor()) || truth.types() != est.types()) {
        throw ValidationError("traj_error_stats: models differ in manifold or population");
    }
    TrajErrorStats st;
    st.errors.resize(ics.size());
    parallel_for(ics.size(), threads, [&](std::size_t k) {
        const auto a = observe(truth, simulate(truth, ics[k], T, cfg), L, T);
        const auto b = observe(est, simulate(est, ics[k], T, cfg), L, T);
        st.errors[k] = traj_error(a, b, truth.manifold());
    });
    const double n = static_cast<double>(st.errors.size());
    st.mean = std::accumulate(st.errors.begin(), st.errors.end(), 0.0) / n;
    double var = 0.0;
    for (double e : st.errors) var += (e - st.mean) * (e - st.mean);
    st.std = std::sqrt(var / n);
    return st;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double confidence) {
    if (x.size() != y.size() || x.size() < 3) throw ValidationError("fit_loglog: need at least three points");
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw ValidationError("fit_loglog: values must be positive");
        lx[k] = std::log(x[k]);
        ly[k] = std::log(y[k]);
    }
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    if (!(sxx > 0.0)) throw ValidationError("fit_loglog: x values are all equal");
    SlopeFit fit;
    fit.confidence = confidence;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        const double e = ly[k] - fit.intercept - fit.slope * lx[k];
        ssr += e * e;
    }
    const double dof = n - 2.0;
    const double se = std::sqrt(ssr / dof / sxx);
    const boost::math::students_t dist(dof);
    const double t = boost::math::quantile(boost::math::complement(dist, 0.5 * (1.0 - confidence)));
    fit.ci_lo = fit.slope - t * se;
    fit.ci_hi = fit.slope + t * se;
    return fit;
}

StudyResult convergence_study(const std::vector<std::size_t>& M_list, std::size_t repeats,
                              const std::function<double(std::size_t, std::size_t)>& rel_error_at) {
    if (M_list.size() < 3) throw ValidationError("convergence_study: need at least three values of M");
    if (repeats < 1) throw ValidationError("convergence_study: need at least one repeat");
    StudyResult res;
    std::vector<double> xs, ys;
    bool all_floor = true;
    for (std::size_t M : M_list) {
        if (M == 0) throw ValidationError("convergence_study: M must be positive");
        StudyPoint pt;
        pt.M = M;
        for (std::size_t rep = 0; rep < repeats; ++rep) {
            const double e = rel_error_at(M, rep);
            if (!std::isfinite(e)) throw NumericalError("convergence_study: non-finite error");
            pt.errors.push_back(e);
            all_floor = all_floor && e < kErrorFloor;
            xs.push_back(static_cast<double>(M));
            // The floor keeps log() defined for exact recoveries.
            ys.push_back(std::max(e, std::numeric_limits<double>::min()));
        }
        const double n = static_cast<double>(repeats);
        pt.mean = std::accumulate(pt.errors.begin(), pt.errors.end(), 0.0) / n;
        double var = 0.0;
        for (double e : pt.errors) var += (e - pt.mean) * (e - pt.mean);
        pt.std = std::sqrt(var / n);
        res.points.push_back(std::move(pt));
    }
    res.fit = fit_loglog(xs, ys);
    res.floor_limited = all_floor;
    res.flat = res.fit.ci_lo <= 0.0 && res.fit.ci_hi >= 0.0;
    return res;
}

}  // namespace geokernel
