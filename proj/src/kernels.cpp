#include "geokernel/kernels.hpp"

#include "geokernel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace geokernel {

namespace {

double ipow(double t, int e) {
    if (e < 0) return 1.0 / ipow(t, -e);
    double out = 1.0;
    for (int k = 0; k < e; ++k) out *= t;
    return out;
}

// Antiderivative of t^e.
double power_antideriv(double t, int e) {
    if (e == -1) return std::log(std::abs(t));
    return ipow(t, e + 1) / (e + 1);
}

}  // namespace

double Segment::value(double r) const {
    const double t = r - shift;
    double s = 0.0;
    for (const auto& term : terms) s += term.coef * ipow(t, term.power);
    return s;
}

double Segment::deriv(double r) const {
    const double t = r - shift;
    double s = 0.0;
    for (const auto& term : terms) {
        if (term.power != 0) s += term.coef * term.power * ipow(t, term.power - 1);
    }
    return s;
}

double Segment::antideriv(double r) const {
    const double t = r - shift;
    double s = 0.0;
    for (const auto& term : terms) s += term.coef * power_antideriv(t, term.power);
    return s;
}

double Segment::moment_antideriv(double r) const {
    // r (r - s)^e = (r - s)^(e+1) + s (r - s)^e
    const double t = r - shift;
    double s = 0.0;
    for (const auto& term : terms) {
        s += term.coef * power_antideriv(t, term.power + 1);
        if (shift != 0.0) s += term.coef * shift * power_antideriv(t, term.power);
    }
    return s;
}

double HermiteCubic::operator()(double r) const {
    const double t = r - origin;
    return c0 + t * (c1 + t * (c2 + t * c3));
}

std::array<double, 4> HermiteCubic::monomial() const {
    // Expand in powers of r with t = r - o.
    const double o = origin;
    const double a = c3;
    const double b = c2 - 3.0 * c3 * o;
    const double c = c1 - 2.0 * c2 * o + 3.0 * c3 * o * o;
    const double d = c0 - c1 * o + c2 * o * o - c3 * o * o * o;
    return {a, b, c, d};
}

Segment HermiteCubic::segment(double lo, double hi) const {
    Segment s;
    s.lo = lo;
    s.hi = hi;
    s.shift = origin;
    s.terms = {{c0, 0}, {c1, 1}, {c2, 2}, {c3, 3}};
    return s;
}

HermiteCubic hermite_blend(double r0, double r1, double f0, double f1, double d0, double d1) {
    if (!(r1 > r0)) throw ValidationError("hermite_blend: requires r1 > r0");
    const double h = r1 - r0;
    const double slope = (f1 - f0) / h;
    HermiteCubic p;
    p.origin = r0;
    p.c0 = f0;
    p.c1 = d0;
    p.c2 = (3.0 * slope - 2.0 * d0 - d1) / h;
    p.c3 = (d0 + d1 - 2.0 * slope) / (h * h);
    return p;
}

PiecewiseKernel::PiecewiseKernel() = default;

PiecewiseKernel::PiecewiseKernel(std::vector<Segment> segments, double support_end)
    : segments_(std::move(segments)), support_end_(support_end) {
    if (std::isnan(support_end_) || support_end_ < 0.0) {
        throw ValidationError("kernel: support end must be nonnegative");
    }
    if (segments_.empty()) {
        if (support_end_ != 0.0) throw ValidationError("kernel: no segments for a nonzero support");
        return;
    }
    if (segments_.front().lo != 0.0) throw ValidationError("kernel: first segment must start at 0");
    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const auto& seg = segments_[s];
        if (!(seg.hi > seg.lo)) throw ValidationError("kernel: empty or inverted segment");
        if (s + 1 < segments_.size() && seg.hi != segments_[s + 1].lo) {
            throw ValidationError("kernel: segments must partition [0, support_end) without gaps");
        }
        for (const auto& term : seg.terms) {
            if (term.power < 0 && (seg.shift != 0.0 || seg.lo <= 0.0)) {
                throw ValidationError("kernel: negative powers need shift 0 and a segment away from 0");
            }
            if (!std::isfinite(term.coef)) throw ValidationError("kernel: non-finite coefficient");
        }
    }
    if (segments_.back().hi != support_end_) {
        throw ValidationError("kernel: last segment must end at the support end");
    }
    integral_prefix_.assign(segments_.size() + 1, 0.0);
    moment_prefix_.assign(segments_.size() + 1, 0.0);
    for (std::size_t s = 0; s < segments_.size(); ++s) {
        const auto& seg = segments_[s];
        double di = 0.0, dm = 0.0;
        if (std::isfinite(seg.hi)) {
            di = seg.antideriv(seg.hi) - seg.antideriv(seg.lo);
            dm = seg.moment_antideriv(seg.hi) - seg.moment_antideriv(seg.lo);
        }
        integral_prefix_[s + 1] = integral_prefix_[s] + di;
        moment_prefix_[s + 1] = moment_prefix_[s] + dm;
    }
}

PiecewiseKernel PiecewiseKernel::constant(double c, double support_end) {
    Segment s;
    s.lo = 0.0;
    s.hi = support_end;
    s.terms = {{c, 0}};
    return PiecewiseKernel({s}, support_end);
}

std::size_t PiecewiseKernel::locate(double r) const {
    if (r < 0.0 || std::isnan(r)) throw ValidationError("kernel: evaluation at negative distance");
    if (r >= support_end_) return segments_.size();
    auto it = std::upper_bound(segments_.begin(), segments_.end(), r,
                               [](double v, const Segment& s) { return v < s.lo; });
    return static_cast<std::size_t>(it - segments_.begin()) - 1;
}

double PiecewiseKernel::eval(double r) const {
    const std::size_t s = locate(r);
    if (s >= segments_.size()) return 0.0;
    return segments_[s].value(r);
}

double PiecewiseKernel::eval_deriv(double r) const {
    const std::size_t s = locate(r);
    if (s >= segments_.size()) return 0.0;
    return segments_[s].deriv(r);
}

double PiecewiseKernel::antideriv_at(double r) const {
    const std::size_t s = locate(r);
    if (s >= segments_.size()) return integral_prefix_.back();
    const auto& seg = segments_[s];
    return integral_prefix_[s] + seg.antideriv(r) - seg.antideriv(seg.lo);
}

double PiecewiseKernel::integral(double a, double b) const {
    return antideriv_at(b) - antideriv_at(a);
}

double PiecewiseKernel::first_moment(double r) const {
    const std::size_t s = locate(r);
    if (s >= segments_.size()) return moment_prefix_.back();
    const auto& seg = segments_[s];
    return moment_prefix_[s] + seg.moment_antideriv(r) - seg.moment_antideriv(seg.lo);
}

bool PiecewiseKernel::is_zero() const {
    for (const auto& seg : segments_) {
        for (const auto& t : seg.terms) {
            if (t.coef != 0.0) return false;
        }
    }
    return true;
}

std::vector<double> PiecewiseKernel::knots() const {
    std::vector<double> out;
    for (std::size_t s = 1; s < segments_.size(); ++s) out.push_back(segments_[s].lo);
    return out;
}

namespace {

nlohmann::json number_or_null(double v) {
    if (std::isinf(v)) return nullptr;
    return v;
}

double read_bound(const nlohmann::json& j) {
    if (j.is_null()) return kInf;
    return j.get<double>();
}

}  // namespace

nlohmann::json PiecewiseKernel::to_json() const {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : segments_) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : s.terms) terms.push_back({t.coef, t.power});
        segs.push_back({{"lo", s.lo}, {"hi", number_or_null(s.hi)}, {"shift", s.shift}, {"terms", terms}});
    }
    return {{"support_end", number_or_null(support_end_)}, {"segments", segs}};
}

PiecewiseKernel PiecewiseKernel::from_json(const nlohmann::json& j) {
    try {
        std::vector<Segment> segs;
        for (const auto& js : j.at("segments")) {
            Segment s;
            s.lo = js.at("lo").get<double>();
            s.hi = read_bound(js.at("hi"));
            s.shift = js.at("shift").get<double>();
            for (const auto& jt : js.at("terms")) s.terms.push_back({jt.at(0).get<double>(), jt.at(1).get<int>()});
            segs.push_back(std::move(s));
        }
        return PiecewiseKernel(std::move(segs), read_bound(j.at("support_end")));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("kernel json: ") + e.what());
    }
}

KernelMatrix::KernelMatrix(std::size_t k) : k_(k), kernels_(k * k) {
    if (k == 0) throw ValidationError("kernel matrix: need at least one type");
}

KernelMatrix::KernelMatrix(PiecewiseKernel single) : k_(1), kernels_{std::move(single)} {}

double KernelMatrix::max_support() const {
    double s = 0.0;
    for (const auto& k : kernels_) s = std::max(s, k.support_end());
    return s;
}

nlohmann::json KernelMatrix::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < k_; ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t kp = 0; kp < k_; ++kp) row.push_back(at(k, kp).to_json());
        rows.push_back(row);
    }
    return {{"types", k_}, {"kernels", rows}};
}

KernelMatrix KernelMatrix::from_json(const nlohmann::json& j) {
    try {
        const auto k = j.at("types").get<std::size_t>();
        KernelMatrix out(k);
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t b = 0; b < k; ++b) out.at(a, b) = PiecewiseKernel::from_json(j.at("kernels").at(a).at(b));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("kernel matrix json: ") + e.what());
    }
}

namespace {

Segment constant_segment(double lo, double hi, double c) {
    Segment s;
    s.lo = lo;
    s.hi = hi;
    s.terms = {{c, 0}};
    return s;
}

Segment power_segment(double lo, double hi, std::vector<Term> terms) {
    Segment s;
    s.lo = lo;
    s.hi = hi;
    s.terms = std::move(terms);
    return s;
}

// Linear continuation below `ramp_end`, the power law up to 0.99 R_M and a C1
// cubic taper to zero on [0.99 R_M, R_M).
PiecewiseKernel ramped_power_law(std::vector<Term> terms, double ramp_end, double cap) {
    const Segment law = power_segment(ramp_end, cap, terms);
    Segment ramp;
    ramp.lo = 0.0;
    ramp.hi = ramp_end;
    ramp.shift = ramp_end;
    ramp.terms = {{law.value(ramp_end), 0}, {law.deriv(ramp_end), 1}};

    std::vector<Segment> segs{ramp};
    if (std::isinf(cap)) {
        segs.push_back(power_segment(ramp_end, kInf, terms));
        return PiecewiseKernel(std::move(segs), kInf);
    }
    const double taper = 0.99 * cap;
    if (!(taper > ramp_end)) throw ValidationError("kernel: interaction cap too small for the branch layout");
    segs.push_back(power_segment(ramp_end, taper, terms));
    const auto tail = hermite_blend(taper, cap, law.value(taper), 0.0, law.deriv(taper), 0.0);
    segs.push_back(tail.segment(taper, cap));
    return PiecewiseKernel(std::move(segs), cap);
}

}  // namespace

PiecewiseKernel make_od() {
    const double knee = 1.0 / std::numbers::sqrt2;
    const double a = knee - 0.01;
    std::vector<Segment> segs;
    segs.push_back(constant_segment(0.0, a, 1.0));
    segs.push_back(hermite_blend(a, knee, 1.0, 0.1, 0.0, 0.0).segment(a, knee));
    segs.push_back(constant_segment(knee, 0.99, 0.1));
    segs.push_back(hermite_blend(0.99, 1.0, 0.1, 0.0, 0.0, 0.0).segment(0.99, 1.0));
    return PiecewiseKernel(std::move(segs), 1.0);
}

PiecewiseKernel make_lj(double eps, double sigma, double cap) {
    if (!(eps > 0.0) || !(sigma > 0.0)) throw ValidationError("make_lj: eps and sigma must be positive");
    // 24 eps/sigma^2 ((sigma/r)^8 - 2 (sigma/r)^14)
    const double s6 = std::pow(sigma, 6);
    const std::vector<Term> law_terms{{24.0 * eps * s6, -8}, {-48.0 * eps * s6 * s6, -14}};
    const Segment law = power_segment(1.0, kInf, law_terms);
    const double f1 = law.value(1.0);
    const double d1 = law.deriv(1.0);

    std::vector<Segment> segs;
    segs.push_back(constant_segment(0.0, 0.5, f1 - d1 / 4.0));
    segs.push_back(power_segment(0.5, 1.0, {{f1, 0}, {-d1, 1}, {d1, 2}}));
    if (std::isinf(cap)) {
        segs.push_back(power_segment(1.0, kInf, law_terms));
        return PiecewiseKernel(std::move(segs), kInf);
    }
    const double taper = 0.99 * cap;
    if (!(taper > 1.0)) throw ValidationError("make_lj: interaction cap must exceed 1/0.99");
    segs.push_back(power_segment(1.0, taper, law_terms));
    segs.push_back(hermite_blend(taper, cap, law.value(taper), 0.0, law.deriv(taper), 0.0).segment(taper, cap));
    return PiecewiseKernel(std::move(segs), cap);
}

KernelMatrix make_ps1(double cap) {
    KernelMatrix km(2);
    km.at(0, 0) = ramped_power_law({{1.0, 0}, {-1.0, -2}}, 0.01, cap);
    km.at(0, 1) = ramped_power_law({{-2.0, -2}}, 0.01, cap);
    km.at(1, 0) = ramped_power_law({{3.5, -3}}, 0.01, cap);
    km.at(1, 1) = PiecewiseKernel::zero();
    return km;
}

AdmissibilityBounds admissibility(const PiecewiseKernel& k, double r_max, std::size_t points) {
    AdmissibilityBounds b;
    if (points < 2) points = 2;
    for (std::size_t j = 0; j < points; ++j) {
        const double r = r_max * static_cast<double>(j) / static_cast<double>(points - 1);
        b.sup_value = std::max(b.sup_value, std::abs(k.eval(r)));
        b.sup_deriv = std::max(b.sup_deriv, std::abs(k.eval_deriv(r)));
    }
    return b;
}

}  // namespace geokernel
