#include "geokernel/geometry.hpp"

#include "geokernel/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace geokernel {

ManifoldDescriptor ManifoldDescriptor::euclidean(int dim) {
    ManifoldDescriptor d;
    d.kind = ManifoldKind::Euclidean;
    d.dim = dim;
    return d;
}

ManifoldDescriptor ManifoldDescriptor::sphere(double radius, double interaction_cap) {
    ManifoldDescriptor d;
    d.kind = ManifoldKind::Sphere;
    d.dim = 2;
    d.radius = radius;
    d.interaction_cap = interaction_cap;
    return d;
}

ManifoldDescriptor ManifoldDescriptor::poincare(DistanceConvention convention, double interaction_cap) {
    ManifoldDescriptor d;
    d.kind = ManifoldKind::PoincareDisk;
    d.dim = 2;
    d.convention = convention;
    d.interaction_cap = interaction_cap;
    return d;
}

Manifold::Manifold(ManifoldDescriptor desc) : desc_(desc) {
    if (!(desc_.interaction_cap > 0.0)) {
        throw ValidationError("manifold: interaction cap R_M must be positive");
    }
    switch (desc_.kind) {
    case ManifoldKind::Sphere:
        if (desc_.dim != 2) throw ValidationError("manifold: only the 2-sphere is supported");
        if (!(desc_.radius > 0.0) || !std::isfinite(desc_.radius)) {
            throw ValidationError("manifold: sphere radius must be positive and finite");
        }
        break;
    case ManifoldKind::PoincareDisk:
        if (desc_.dim != 2) throw ValidationError("manifold: the Poincare disk is two-dimensional");
        break;
    case ManifoldKind::Euclidean:
        if (desc_.dim < 1 || desc_.dim > 3) {
            throw ValidationError("manifold: Euclidean dimension must be 1, 2 or 3");
        }
        break;
    default:
        throw ValidationError("manifold: unknown kind");
    }
}

int Manifold::ambient_dim() const {
    return desc_.kind == ManifoldKind::Sphere ? 3 : desc_.dim;
}

namespace {

// acosh(1 + z) without the cancellation of acosh near 1.
double acosh1p(double z) {
    return std::log1p(z + std::sqrt(z * (z + 2.0)));
}

double sphere_angle(const Vec3& x, const Vec3& y) {
    // atan2 keeps full relative accuracy for nearly coincident points, where
    // acos of the normalised inner product loses half the digits.
    return std::atan2(x.cross(y).norm(), x.dot(y));
}

}  // namespace

double Manifold::distance(const Vec3& x, const Vec3& y) const {
    switch (desc_.kind) {
    case ManifoldKind::Sphere:
        return desc_.radius * sphere_angle(x, y);
    case ManifoldKind::PoincareDisk: {
        const double diff2 = (x - y).squaredNorm();
        if (diff2 == 0.0) return 0.0;
        const double denom = (1.0 - x.squaredNorm()) * (1.0 - y.squaredNorm());
        double z = diff2 / denom;
        if (desc_.convention == DistanceConvention::Factor2) z *= 2.0;
        if (!(z >= 0.0)) throw NumericalError("poincare distance: point left the disk");
        return acosh1p(z);
    }
    case ManifoldKind::Euclidean:
    default:
        return (x - y).norm();
    }
}

Vec3 Manifold::sphere_direction(const Vec3& x, const Vec3& y) const {
    // y - x - Proj_{-x}(y - x) simplifies to y - (<x,y>/|x|^2) x.
    const double angle = sphere_angle(x, y);
    if (angle > std::numbers::pi - kCutLocusBand) return Vec3::Zero();
    const Vec3 t = y - (x.dot(y) / x.squaredNorm()) * x;
    const double len = t.norm();
    if (len == 0.0) return Vec3::Zero();
    return t / len;
}

Vec3 Manifold::disk_direction(const Vec3& x, const Vec3& y) const {
    const Vec3 a = y - x;
    Vec3 t = a;
    const double y2 = y.squaredNorm();
    if (y2 > 0.0) {
        // Circle through x, y and the inversion y' = y/|y|^2 of y in the unit circle.
        const Vec3 b = y / y2 - x;
        const double det = a.x() * b.y() - a.y() * b.x();
        if (std::abs(det) > 1e-12 * a.norm() * b.norm()) {
            // Circumcentre of {x, y, y'} relative to x, up to the factor 1/(2 det).
            // Only the line through x and the centre matters for the projection,
            // so the division is skipped and the construction stays well
            // conditioned as the three points approach a line.
            const double a2 = a.squaredNorm();
            const double b2 = b.squaredNorm();
            const Vec3 c(a2 * b.y() - b2 * a.y(), b2 * a.x() - a2 * b.x(), 0.0);
            t = a - (a.dot(c) / c.squaredNorm()) * c;
        }
    }
    const double len = std::sqrt(metric_factor(x)) * t.norm();
    if (len == 0.0) return Vec3::Zero();
    return t / len;
}

Vec3 Manifold::unit_tangent(const Vec3& x, const Vec3& y) const {
    const double scale = std::max(1.0, x.norm());
    if ((y - x).norm() <= kCoincidentTol * scale) return Vec3::Zero();
    switch (desc_.kind) {
    case ManifoldKind::Sphere:
        return sphere_direction(x, y);
    case ManifoldKind::PoincareDisk:
        return disk_direction(x, y);
    case ManifoldKind::Euclidean:
    default:
        return (y - x) / (y - x).norm();
    }
}

Vec3 Manifold::log_weight(const Vec3& x, const Vec3& y) const {
    if (desc_.kind == ManifoldKind::Euclidean) return y - x;
    return distance(x, y) * unit_tangent(x, y);
}

PairGeometry Manifold::pair(const Vec3& x, const Vec3& y) const {
    PairGeometry g;
    if (desc_.kind == ManifoldKind::Euclidean) {
        g.w_xy = y - x;
        g.w_yx = x - y;
        g.dist = g.w_xy.norm();
        return g;
    }
    g.dist = distance(x, y);
    g.w_xy = g.dist * unit_tangent(x, y);
    g.w_yx = g.dist * unit_tangent(y, x);
    return g;
}

double Manifold::metric_factor(const Vec3& x) const {
    if (desc_.kind != ManifoldKind::PoincareDisk) return 1.0;
    const double s = 1.0 - x.squaredNorm();
    return 4.0 / (s * s);
}

double Manifold::inner(const Vec3& x, const Vec3& u, const Vec3& z) const {
    return metric_factor(x) * u.dot(z);
}

double Manifold::norm(const Vec3& x, const Vec3& u) const {
    return std::sqrt(inner(x, u, u));
}

Vec3 Manifold::retract(const Vec3& x, const Vec3& step) const {
    return project(x + step);
}

Vec3 Manifold::project(const Vec3& p) const {
    switch (desc_.kind) {
    case ManifoldKind::Sphere: {
        const double len = p.norm();
        if (len < 1e-12) throw NumericalError("retract: sphere projection undefined at the centre");
        return (desc_.radius / len) * p;
    }
    case ManifoldKind::PoincareDisk: {
        const double len = p.norm();
        const double limit = 1.0 - kDiskGuard;
        if (len > limit) return (limit / len) * p;
        return p;
    }
    case ManifoldKind::Euclidean:
    default:
        return p;
    }
}

bool Manifold::contains(const Vec3& x, double tol) const {
    if (!x.allFinite()) return false;
    switch (desc_.kind) {
    case ManifoldKind::Sphere:
        return std::abs(x.norm() - desc_.radius) <= tol;
    case ManifoldKind::PoincareDisk:
        return x.norm() < 1.0 && x.z() == 0.0;
    case ManifoldKind::Euclidean:
    default:
        for (int k = desc_.dim; k < 3; ++k) {
            if (x[k] != 0.0) return false;
        }
        return true;
    }
}

Vec3 Manifold::to_tangent(const Vec3& x, const Vec3& v) const {
    if (desc_.kind != ManifoldKind::Sphere) return v;
    return v - (v.dot(x) / x.squaredNorm()) * x;
}

double hyperbolic_ball_radius(double diameter) {
    if (!(diameter > 0.0)) throw ValidationError("hyperbolic ball: diameter must be positive");
    const double k = std::cosh(diameter) - 1.0;
    return (2.0 + 1.0 / k - std::sqrt(4.0 / k + 1.0 / (k * k))) / 2.0;
}

ICSpec ICSpec::parse(const std::string& name, double size) {
    ICSpec s;
    s.size = size;
    if (name == "uniform_sphere") s.kind = ICKind::UniformSphere;
    else if (name == "hyperbolic_ball") s.kind = ICKind::HyperbolicBall;
    else if (name == "ps1_sphere") s.kind = ICKind::PS1Sphere;
    else if (name == "ps1_disk") s.kind = ICKind::PS1Disk;
    else if (name == "euclidean_ball") s.kind = ICKind::UniformEuclideanBall;
    else throw ValidationError("unknown initial-condition distribution '" + name + "'");
    return s;
}

std::string ICSpec::name() const {
    switch (kind) {
    case ICKind::UniformSphere: return "uniform_sphere";
    case ICKind::HyperbolicBall: return "hyperbolic_ball";
    case ICKind::PS1Sphere: return "ps1_sphere";
    case ICKind::PS1Disk: return "ps1_disk";
    case ICKind::UniformEuclideanBall: return "euclidean_ball";
    }
    return "unknown";
}

namespace {

Vec3 uniform_in_annulus(double r_in, double r_out, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double u = unit(rng);
    const double rho = std::sqrt(r_in * r_in + u * (r_out * r_out - r_in * r_in));
    const double angle = 2.0 * std::numbers::pi * unit(rng);
    return Vec3(rho * std::cos(angle), rho * std::sin(angle), 0.0);
}

// Inverse stereographic projection from the north pole onto the sphere of
// radius R, with the plane tangent at the south pole (origin -> south pole).
Vec3 lift_to_sphere(const Vec3& p, double radius) {
    const double s = p.x() * p.x() + p.y() * p.y();
    const double t = 4.0 * radius * radius / (s + 4.0 * radius * radius);
    return Vec3(t * p.x(), t * p.y(), radius * (1.0 - 2.0 * t));
}

void require_kind(const Manifold& m, ManifoldKind kind, const ICSpec& spec) {
    if (m.kind() != kind) {
        throw ValidationError("initial condition '" + spec.name() + "' does not match the manifold");
    }
}

}  // namespace

Eigen::Matrix3d random_rotation(Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::Quaterniond q;
    do {
        q = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng));
    } while (q.norm() < 1e-12);
    q.normalize();
    return q.toRotationMatrix();
}

std::vector<Vec3> sample_initial(const Manifold& m, const ICSpec& spec, std::size_t n, Rng& rng) {
    std::vector<Vec3> pts;
    pts.reserve(n);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    switch (spec.kind) {
    case ICKind::UniformSphere: {
        require_kind(m, ManifoldKind::Sphere, spec);
        const double r = m.descriptor().radius;
        while (pts.size() < n) {
            Vec3 g(gauss(rng), gauss(rng), gauss(rng));
            const double len = g.norm();
            if (len < 1e-12) continue;
            pts.push_back((r / len) * g);
        }
        break;
    }
    case ICKind::HyperbolicBall: {
        require_kind(m, ManifoldKind::PoincareDisk, spec);
        const double r0 = hyperbolic_ball_radius(spec.size);
        for (std::size_t i = 0; i < n; ++i) pts.push_back(uniform_in_annulus(0.0, r0, rng));
        break;
    }
    case ICKind::PS1Sphere: {
        require_kind(m, ManifoldKind::Sphere, spec);
        if (n < 2) throw ValidationError("ps1_sphere needs at least one prey and the predator");
        const double r = m.descriptor().radius;
        for (std::size_t i = 0; i + 1 < n; ++i) pts.push_back(lift_to_sphere(uniform_in_annulus(0.3, 0.8, rng), r));
        pts.push_back(lift_to_sphere(uniform_in_annulus(0.0, 0.1, rng), r));
        const Eigen::Matrix3d rot = random_rotation(rng);
        for (auto& p : pts) p = m.project(rot * p);
        break;
    }
    case ICKind::PS1Disk: {
        require_kind(m, ManifoldKind::PoincareDisk, spec);
        if (n < 2) throw ValidationError("ps1_disk needs at least one prey and the predator");
        const double r_in = hyperbolic_ball_radius(1.0);
        const double r_out = hyperbolic_ball_radius(2.0);
        for (std::size_t i = 0; i + 1 < n; ++i) pts.push_back(uniform_in_annulus(r_in, r_out, rng));
        pts.push_back(uniform_in_annulus(0.0, hyperbolic_ball_radius(0.5), rng));
        break;
    }
    case ICKind::UniformEuclideanBall: {
        require_kind(m, ManifoldKind::Euclidean, spec);
        const int d = m.descriptor().dim;
        while (pts.size() < n) {
            Vec3 g = Vec3::Zero();
            for (int k = 0; k < d; ++k) g[k] = gauss(rng);
            const double len = g.norm();
            if (len < 1e-12) continue;
            const double rho = spec.size * std::pow(unit(rng), 1.0 / d);
            pts.push_back((rho / len) * g);
        }
        break;
    }
    }
    return pts;
}

}  // namespace geokernel
