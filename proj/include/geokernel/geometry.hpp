#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace geokernel {

// All points and tangent vectors are carried in a 3-vector. Two-dimensional
// charts (Poincare disk, Euclidean plane) keep the unused trailing entries at 0.
using Vec3 = Eigen::Vector3d;
using Rng = std::mt19937_64;

enum class ManifoldKind : std::uint32_t { Euclidean = 0, Sphere = 1, PoincareDisk = 2 };

// PaperFormula: acosh(1 + |x-y|^2 / ((1-|x|^2)(1-|y|^2))).
// Factor2:      acosh(1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2))), the distance of the
//               metric 4 delta_ij / (1-|x|^2)^2.
enum class DistanceConvention : std::uint32_t { PaperFormula = 0, Factor2 = 1 };

struct ManifoldDescriptor {
    ManifoldKind kind = ManifoldKind::Euclidean;
    int dim = 2;
    double radius = 1.0;
    DistanceConvention convention = DistanceConvention::PaperFormula;
    double interaction_cap = std::numeric_limits<double>::infinity();  // R_M

    static ManifoldDescriptor euclidean(int dim);
    static ManifoldDescriptor sphere(double radius, double interaction_cap);
    static ManifoldDescriptor poincare(DistanceConvention convention,
                                       double interaction_cap = std::numeric_limits<double>::infinity());

    bool operator==(const ManifoldDescriptor&) const = default;
};

// Distance together with both weight vectors of an (x, y) pair. The dynamics and
// the learner use this to evaluate each unordered pair once.
struct PairGeometry {
    double dist = 0.0;
    Vec3 w_xy = Vec3::Zero();  // w(x, y), tangent at x
    Vec3 w_yx = Vec3::Zero();  // w(y, x), tangent at y
};

class Manifold {
public:
    // Angle band around pi in which sphere points count as antipodal.
    static constexpr double kCutLocusBand = 1e-6;
    static constexpr double kCoincidentTol = 1e-14;
    static constexpr double kDiskGuard = 1e-12;

    explicit Manifold(ManifoldDescriptor desc);

    const ManifoldDescriptor& descriptor() const { return desc_; }
    ManifoldKind kind() const { return desc_.kind; }
    // Number of meaningful ambient coordinates: 3 for the sphere, dim otherwise.
    int ambient_dim() const;

    double distance(const Vec3& x, const Vec3& y) const;
    Vec3 unit_tangent(const Vec3& x, const Vec3& y) const;
    Vec3 log_weight(const Vec3& x, const Vec3& y) const;
    PairGeometry pair(const Vec3& x, const Vec3& y) const;

    double inner(const Vec3& x, const Vec3& u, const Vec3& z) const;
    double norm(const Vec3& x, const Vec3& u) const;
    // Conformal factor of the metric at x (1 for sphere and Euclidean).
    double metric_factor(const Vec3& x) const;

    Vec3 retract(const Vec3& x, const Vec3& step) const;
    // Maps an ambient point back onto the manifold; retract(x, 0) for off-manifold x.
    Vec3 project(const Vec3& x) const;

    bool contains(const Vec3& x, double tol = 1e-10) const;
    // Removes the normal component on the sphere, identity elsewhere.
    Vec3 to_tangent(const Vec3& x, const Vec3& v) const;

private:
    Vec3 sphere_direction(const Vec3& x, const Vec3& y) const;
    Vec3 disk_direction(const Vec3& x, const Vec3& y) const;

    ManifoldDescriptor desc_;
};

// Euclidean radius r0 of a disk centred at the origin whose diameter is
// `diameter` under the closed form used for the hyperbolic initial conditions.
double hyperbolic_ball_radius(double diameter);

enum class ICKind { UniformSphere, HyperbolicBall, PS1Sphere, PS1Disk, UniformEuclideanBall };

struct ICSpec {
    ICKind kind = ICKind::UniformSphere;
    double size = 1.0;  // geodesic diameter (HyperbolicBall) or radius (UniformEuclideanBall)

    static ICSpec parse(const std::string& name, double size);
    std::string name() const;
};

// N initial positions drawn from the distribution named by `spec`. For the PS1
// distributions agent N-1 is the predator and agents 0..N-2 are preys.
std::vector<Vec3> sample_initial(const Manifold& m, const ICSpec& spec, std::size_t n, Rng& rng);

// Uniform rotation of R^3 (Haar measure on SO(3)).
Eigen::Matrix3d random_rotation(Rng& rng);

}  // namespace geokernel
