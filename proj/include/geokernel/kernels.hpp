#pragma once

#include <nlohmann/json.hpp>

#include <array>
#include <limits>
#include <string>
#include <vector>

namespace geokernel {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// coef * (r - shift)^power. Negative powers are only used with shift = 0 on
// segments bounded away from 0.
struct Term {
    double coef = 0.0;
    int power = 0;

    bool operator==(const Term&) const = default;
};

struct Segment {
    double lo = 0.0;
    double hi = kInf;
    double shift = 0.0;
    std::vector<Term> terms;

    double value(double r) const;
    double deriv(double r) const;
    // Antiderivatives of phi(r) and r * phi(r) on this segment (arbitrary constant).
    double antideriv(double r) const;
    double moment_antideriv(double r) const;

    bool operator==(const Segment&) const = default;
};

// Cubic p(r) = c0 + c1 t + c2 t^2 + c3 t^3 with t = r - origin.
struct HermiteCubic {
    double origin = 0.0;
    double c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;

    double operator()(double r) const;
    // Coefficients (a, b, c, d) of a r^3 + b r^2 + c r + d.
    std::array<double, 4> monomial() const;
    Segment segment(double lo, double hi) const;
};

// Unique cubic with p(r0) = f0, p(r1) = f1, p'(r0) = d0, p'(r1) = d1.
HermiteCubic hermite_blend(double r0, double r1, double f0, double f1, double d0, double d1);

// Interaction kernel on [0, support_end) as an ordered list of segments; zero
// beyond support_end.
class PiecewiseKernel {
public:
    PiecewiseKernel();  // identically zero
    PiecewiseKernel(std::vector<Segment> segments, double support_end);

    static PiecewiseKernel zero() { return {}; }
    static PiecewiseKernel constant(double c, double support_end = kInf);

    double eval(double r) const;
    double eval_deriv(double r) const;
    double operator()(double r) const { return eval(r); }

    // Integral of phi over [a, b] and of r * phi(r) over [0, r].
    double integral(double a, double b) const;
    double first_moment(double r) const;

    double support_end() const { return support_end_; }
    const std::vector<Segment>& segments() const { return segments_; }
    bool is_zero() const;

    // Interior segment boundaries.
    std::vector<double> knots() const;

    nlohmann::json to_json() const;
    static PiecewiseKernel from_json(const nlohmann::json& j);

    bool operator==(const PiecewiseKernel& o) const {
        return segments_ == o.segments_ && support_end_ == o.support_end_;
    }

private:
    std::size_t locate(double r) const;
    double antideriv_at(double r) const;

    std::vector<Segment> segments_;
    double support_end_ = 0.0;
    std::vector<double> integral_prefix_;  // integral of phi over [0, lo_s]
    std::vector<double> moment_prefix_;    // integral of r phi over [0, lo_s]
};

// kernels[k][k'] is the influence of type-k' agents on type-k agents. Types are
// 0-based in memory.
class KernelMatrix {
public:
    KernelMatrix() = default;
    explicit KernelMatrix(std::size_t k);
    explicit KernelMatrix(PiecewiseKernel single);

    std::size_t types() const { return k_; }
    const PiecewiseKernel& at(std::size_t k, std::size_t kp) const { return kernels_[k * k_ + kp]; }
    PiecewiseKernel& at(std::size_t k, std::size_t kp) { return kernels_[k * k_ + kp]; }
    double max_support() const;

    nlohmann::json to_json() const;
    static KernelMatrix from_json(const nlohmann::json& j);

private:
    std::size_t k_ = 0;
    std::vector<PiecewiseKernel> kernels_;
};

PiecewiseKernel make_od();
PiecewiseKernel make_lj(double eps, double sigma, double interaction_cap);
// Index 0 is the prey type, index 1 the predator.
KernelMatrix make_ps1(double interaction_cap);

struct AdmissibilityBounds {
    double sup_value = 0.0;
    double sup_deriv = 0.0;
};

// Grid estimate of sup|phi| and sup|phi'| on [0, r_max].
AdmissibilityBounds admissibility(const PiecewiseKernel& k, double r_max, std::size_t points = 10000);

}  // namespace geokernel
