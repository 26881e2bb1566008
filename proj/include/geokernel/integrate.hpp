#pragma once

#include "geokernel/dynamics.hpp"

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace geokernel {

enum class Scheme { RK4P, BDF4P };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

struct IntegratorConfig {
    double h = 0.01;
    Scheme scheme = Scheme::RK4P;
    int startup_steps = 3;        // RK4P steps that seed the BDF4 history
    double fixed_point_tol = 1e-12;
    int fixed_point_max_iter = 50;

    void validate() const;
};

// One classical RK4 step in ambient coordinates followed by a projection of
// every agent onto the manifold. `f0` is rhs at `points`.
std::vector<Vec3> rk4p_step(const ModelSpec& model, const std::vector<Vec3>& points,
                            const std::vector<Vec3>& f0, double h);

// Fixed-step geometric integrator. Keeps the BDF4 history between calls.
class Stepper {
public:
    Stepper(const ModelSpec& model, IntegratorConfig cfg, SystemState initial);

    const SystemState& state() const { return history_.back(); }
    // Velocity (rhs) at the current state.
    const std::vector<Vec3>& velocity() const { return velocity_; }
    void advance();

private:
    std::vector<Vec3> bdf4_update() const;

    const ModelSpec& model_;
    IntegratorConfig cfg_;
    std::deque<SystemState> history_;  // at most 4 states, newest last
    std::vector<Vec3> velocity_;
    int steps_taken_ = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<Vec3>> states;
    std::vector<std::vector<Vec3>> velocities;  // rhs at each node

    double end_time() const { return times.empty() ? 0.0 : times.back(); }
};

Trajectory simulate(const ModelSpec& model, const std::vector<Vec3>& x0, double T, const IntegratorConfig& cfg);

struct Snapshot {
    std::vector<Vec3> x;
    std::vector<Vec3> v;

    bool operator==(const Snapshot&) const = default;
};

// One trajectory observed at L equispaced times 0 = t_1 < ... < t_L = T.
struct ObservationSet {
    std::vector<double> times;
    std::vector<Snapshot> snaps;

    bool operator==(const ObservationSet&) const = default;
};

std::vector<double> observation_times(std::size_t L, double T);

// Off-grid times use cubic Hermite interpolation of positions and velocities
// between the bracketing nodes, then projection; velocities are re-evaluated.
ObservationSet observe(const ModelSpec& model, const Trajectory& traj, std::size_t L, double T);

struct TrajectoryDataset {
    ManifoldDescriptor manifold;
    std::vector<int> types;
    std::size_t type_count = 1;
    double T = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> times;
    std::vector<ObservationSet> runs;

    std::size_t N() const { return types.size(); }
    std::size_t L() const { return times.size(); }
    std::size_t M() const { return runs.size(); }
    std::vector<std::size_t> type_counts() const;

    // Dataset with runs [first, first + count).
    TrajectoryDataset subset(std::size_t first, std::size_t count) const;

    bool operator==(const TrajectoryDataset&) const = default;
};

struct GenerateOptions {
    std::size_t M = 1;
    std::size_t L = 2;
    double T = 1.0;
    std::uint64_t seed = 0;
    std::size_t first_index = 0;  // stream index of the first trajectory
    unsigned threads = 0;
};

// Initial condition m of the stream `seed` (deterministic per (seed, m)).
std::vector<Vec3> initial_condition(const ModelSpec& model, const ICSpec& ic, std::uint64_t seed, std::size_t m);

TrajectoryDataset generate_dataset(const ModelSpec& model, const ICSpec& ic, const IntegratorConfig& cfg,
                                   const GenerateOptions& opt);

}  // namespace geokernel
