#include "geokernel/basis.hpp"

#include "geokernel/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace geokernel {

SplineBasis::SplineBasis(double lo, double hi, std::size_t n, int degree) : lo_(lo), hi_(hi), n_(n), p_(degree) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
        throw ValidationError("basis: invalid range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    if (degree < 0 || degree > kMaxDegree) throw ValidationError("basis: unsupported degree");
    if (n < static_cast<std::size_t>(degree) + 1) throw ValidationError("basis: need n >= degree + 1");
    const auto p = static_cast<std::size_t>(p_);
    knots_.assign(p + 1, lo_);
    const double h = spacing();
    for (std::size_t j = 1; j + p < n_; ++j) knots_.push_back(lo_ + static_cast<double>(j) * h);
    knots_.insert(knots_.end(), p + 1, hi_);
}

bool SplineBasis::nonzero(double r, std::size_t& first, double* values) const {
    if (!(r >= lo_ && r <= hi_)) return false;
    const auto p = static_cast<std::size_t>(p_);
    const std::size_t intervals = n_ - p;
    auto cell = static_cast<std::size_t>(std::floor((r - lo_) / spacing()));
    cell = std::min(cell, intervals - 1);
    const std::size_t mu = p + cell;
    const auto& t = knots_;

    // Cox-de Boor recursion restricted to the p+1 functions that can be nonzero.
    double left[kMaxDegree + 1], right[kMaxDegree + 1];
    values[0] = 1.0;
    for (std::size_t j = 1; j <= p; ++j) {
        left[j] = r - t[mu + 1 - j];
        right[j] = t[mu + j] - r;
        double saved = 0.0;
        for (std::size_t k = 0; k < j; ++k) {
            const double tmp = values[k] / (right[k + 1] + left[j - k]);
            values[k] = saved + right[k + 1] * tmp;
            saved = left[j - k] * tmp;
        }
        values[j] = saved;
    }
    first = mu - p;
    return true;
}

double SplineBasis::eval(std::size_t eta, double r) const {
    if (eta >= n_) throw ValidationError("basis: index out of range");
    std::size_t first = 0;
    double values[kMaxDegree + 1];
    if (!nonzero(r, first, values)) return 0.0;
    if (eta < first || eta > first + static_cast<std::size_t>(p_)) return 0.0;
    return values[eta - first];
}

Estimator::Estimator(SplineBasis basis, Eigen::VectorXd coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (static_cast<std::size_t>(coeffs_.size()) != basis_->size()) {
        throw ValidationError("estimator: coefficient count does not match the basis");
    }
    if (!coeffs_.allFinite()) throw NumericalError("estimator: non-finite coefficients");
}

double Estimator::eval(double r) const {
    if (!basis_ || !basis_->covers(r)) return 0.0;
    if (smoothed_) {
        // The kernel form is half-open at hi; the estimator is closed.
        if (r == basis_->hi()) return smoothed_->segments().back().value(r);
        return smoothed_->eval(r);
    }
    std::size_t first = 0;
    double values[kMaxDegree + 1];
    basis_->nonzero(r, first, values);
    double s = 0.0;
    for (int k = 0; k <= basis_->degree(); ++k) s += coeffs_[static_cast<Eigen::Index>(first) + k] * values[k];
    return s;
}

namespace {

// Polynomial of degree `degree` through f sampled on [a, b], as a segment in
// the local variable r - a.
template <class F>
Segment fit_segment(double a, double b, int degree, F&& f) {
    const int m = degree + 1;
    Eigen::MatrixXd V(m, m);
    Eigen::VectorXd y(m);
    for (int i = 0; i < m; ++i) {
        const double s = degree == 0 ? 0.5 : static_cast<double>(i) / degree;
        double pw = 1.0;
        for (int k = 0; k < m; ++k, pw *= s) V(i, k) = pw;
        y[i] = f(a + s * (b - a));
    }
    const Eigen::VectorXd c = V.colPivHouseholderQr().solve(y);
    Segment seg;
    seg.lo = a;
    seg.hi = b;
    seg.shift = a;
    double scale = 1.0;
    for (int k = 0; k < m; ++k, scale *= (b - a)) seg.terms.push_back({c[k] / scale, k});
    return seg;
}

std::vector<double> distinct(std::vector<double> v, double tol) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
        if (out.empty() || x - out.back() > tol) out.push_back(x);
    }
    return out;
}

PiecewiseKernel assemble_kernel(double lo, double hi, const std::vector<double>& breaks, int degree,
                                const auto& f) {
    std::vector<Segment> segs;
    if (lo > 0.0) segs.push_back(Segment{0.0, lo, 0.0, {}});
    for (std::size_t s = 0; s + 1 < breaks.size(); ++s) segs.push_back(fit_segment(breaks[s], breaks[s + 1], degree, f));
    segs.back().hi = hi;
    return PiecewiseKernel(std::move(segs), hi);
}

}  // namespace

PiecewiseKernel Estimator::to_kernel() const {
    if (!basis_) return PiecewiseKernel::zero();
    if (smoothed_) return *smoothed_;
    const auto& b = *basis_;
    const auto breaks = distinct(b.knots(), 0.0);
    return assemble_kernel(b.lo(), b.hi(), breaks, b.degree(), [this](double r) { return eval(r); });
}

Estimator Estimator::smooth() const {
    if (!basis_) return *this;
    if (smoothed_) throw ValidationError("estimator is already smoothed");
    if (basis_->degree() + 1 > kMaxDegree) throw ValidationError("estimator: degree too high to smooth");
    const auto& b = *basis_;
    const double lo = b.lo(), hi = b.hi(), h = b.spacing();
    const PiecewiseKernel base = to_kernel();
    const double f_lo = eval(lo), f_hi = eval(hi);

    // Integral of the spline extended by constants beyond [lo, hi].
    auto ext_integral = [&](double a, double c) {
        double s = 0.0;
        if (a < lo) s += f_lo * (std::min(c, lo) - a);
        if (c > hi) s += f_hi * (c - std::max(a, hi));
        const double x = std::max(a, lo), y = std::min(c, hi);
        if (y > x) s += base.integral(x, y);
        return s;
    };
    auto g = [&](double r) { return ext_integral(r - 0.5 * h, r + 0.5 * h) / h; };

    std::vector<double> cand{lo, hi};
    for (double t : distinct(b.knots(), 0.0)) {
        for (double c : {t - 0.5 * h, t + 0.5 * h}) {
            if (c > lo && c < hi) cand.push_back(c);
        }
    }
    const auto breaks = distinct(cand, 1e-12 * (hi - lo));
    Estimator out = *this;
    out.smoothed_ = assemble_kernel(lo, hi, breaks, b.degree() + 1, g);
    return out;
}

nlohmann::json Estimator::to_json() const {
    if (!basis_) return {{"empty", true}, {"kernel", PiecewiseKernel::zero().to_json()}};
    return {{"empty", false},
            {"degree", basis_->degree()},
            {"n", basis_->size()},
            {"range", {basis_->lo(), basis_->hi()}},
            {"coeffs", std::vector<double>(coeffs_.data(), coeffs_.data() + coeffs_.size())},
            {"smoothed", smoothed_.has_value()},
            {"kernel", to_kernel().to_json()}};
}

Estimator Estimator::from_json(const nlohmann::json& j) {
    try {
        if (j.at("empty").get<bool>()) return {};
        const auto range = j.at("range").get<std::vector<double>>();
        if (range.size() != 2) throw ValidationError("estimator json: range needs two entries");
        const auto c = j.at("coeffs").get<std::vector<double>>();
        Estimator e(SplineBasis(range[0], range[1], j.at("n").get<std::size_t>(), j.at("degree").get<int>()),
                    Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size())));
        if (j.at("smoothed").get<bool>()) e.smoothed_ = PiecewiseKernel::from_json(j.at("kernel"));
        return e;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("estimator json: ") + e.what());
    }
}

KernelMatrix EstimatorSet::to_kernels() const {
    KernelMatrix km(k_);
    for (std::size_t a = 0; a < k_; ++a) {
        for (std::size_t c = 0; c < k_; ++c) km.at(a, c) = at(a, c).to_kernel();
    }
    return km;
}

EstimatorSet EstimatorSet::smooth() const {
    EstimatorSet out(k_);
    for (std::size_t i = 0; i < est_.size(); ++i) out.est_[i] = est_[i].smooth();
    return out;
}

nlohmann::json EstimatorSet::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : est_) list.push_back(e.to_json());
    return {{"types", k_}, {"estimators", list}};
}

EstimatorSet EstimatorSet::from_json(const nlohmann::json& j) {
    try {
        EstimatorSet out(j.at("types").get<std::size_t>());
        const auto& list = j.at("estimators");
        if (list.size() != out.est_.size()) throw ValidationError("estimator json: wrong number of estimators");
        for (std::size_t i = 0; i < out.est_.size(); ++i) out.est_[i] = Estimator::from_json(list[i]);
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("estimator json: ") + e.what());
    }
}

std::pair<double, double> observed_range(const TrajectoryDataset& ds, const PairFilter& filter) {
    double lo = kInf, hi = -kInf;
    for_each_distance(ds, filter, [&](double r) {
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    });
    if (lo > hi) throw ValidationError("observed_range: no pairwise distances in the dataset");
    return {lo, hi};
}

std::size_t n_star(std::size_t M, std::size_t L, std::size_t N, int d) {
    if (M == 0 || L == 0 || N == 0 || d <= 0) throw ValidationError("n_star: arguments must be positive");
    const double ml = static_cast<double>(M) * static_cast<double>(L);
    if (ml <= std::numbers::e) throw ValidationError("n_star: needs ML > e");
    const double v = std::cbrt(ml / std::log(ml)) * std::pow(static_cast<double>(N), 1.0 / d);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(v)));
}

}  // namespace geokernel
