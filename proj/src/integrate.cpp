#include "geokernel/integrate.hpp"

#include "geokernel/errors.hpp"
#include "geokernel/parallel.hpp"

#include <cmath>
#include <sstream>

namespace geokernel {

Scheme parse_scheme(const std::string& name) {
    if (name == "rk4p" || name == "RK4P") return Scheme::RK4P;
    if (name == "bdf4p" || name == "BDF4P") return Scheme::BDF4P;
    throw ValidationError("unknown integrator scheme '" + name + "'");
}

std::string scheme_name(Scheme s) {
    return s == Scheme::RK4P ? "rk4p" : "bdf4p";
}

void IntegratorConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("integrator: step size h must be positive");
    if (scheme == Scheme::BDF4P && startup_steps < 3) {
        throw ValidationError("integrator: BDF4P needs at least 3 startup steps");
    }
    if (!(fixed_point_tol > 0.0) || fixed_point_max_iter < 1) {
        throw ValidationError("integrator: invalid fixed-point settings");
    }
}

namespace {

void axpy(std::vector<Vec3>& out, const std::vector<Vec3>& x, double a, const std::vector<Vec3>& y) {
    out.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
}

std::vector<Vec3> project_all(const Manifold& m, std::vector<Vec3> pts) {
    for (auto& p : pts) p = m.project(p);
    return pts;
}

}  // namespace

std::vector<Vec3> rk4p_step(const ModelSpec& model, const std::vector<Vec3>& x, const std::vector<Vec3>& k1, double h) {
    std::vector<Vec3> tmp, k2, k3, k4;
    axpy(tmp, x, 0.5 * h, k1);
    rhs(model, tmp, k2);
    axpy(tmp, x, 0.5 * h, k2);
    rhs(model, tmp, k3);
    axpy(tmp, x, h, k3);
    rhs(model, tmp, k4);
    std::vector<Vec3> next(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        next[i] = x[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return project_all(model.manifold(), std::move(next));
}

Stepper::Stepper(const ModelSpec& model, IntegratorConfig cfg, SystemState initial) : model_(model), cfg_(cfg) {
    cfg_.validate();
    if (initial.points.size() != model.agents()) throw ValidationError("stepper: state size does not match the model");
    for (const auto& p : initial.points) {
        if (!model.manifold().contains(p)) throw ValidationError("stepper: initial point is not on the manifold");
    }
    history_.push_back(std::move(initial));
    rhs(model_, history_.back().points, velocity_);
}

std::vector<Vec3> Stepper::bdf4_update() const {
    const auto& y3 = history_[3].points;  // y_n
    const auto& y2 = history_[2].points;
    const auto& y1 = history_[1].points;
    const auto& y0 = history_[0].points;  // y_{n-3}
    const std::size_t n = y3.size();
    const double beta = 12.0 / 25.0 * cfg_.h;

    std::vector<Vec3> base(n), iter(n), f;
    for (std::size_t i = 0; i < n; ++i) {
        base[i] = (48.0 * y3[i] - 36.0 * y2[i] + 16.0 * y1[i] - 3.0 * y0[i]) / 25.0;
        iter[i] = 4.0 * y3[i] - 6.0 * y2[i] + 4.0 * y1[i] - y0[i];
    }
    for (int k = 0; k < cfg_.fixed_point_max_iter; ++k) {
        rhs(model_, iter, f);
        double change = 0.0, scale = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec3 next = base[i] + beta * f[i];
            change = std::max(change, (next - iter[i]).cwiseAbs().maxCoeff());
            scale = std::max(scale, next.cwiseAbs().maxCoeff());
            iter[i] = next;
        }
        if (change <= cfg_.fixed_point_tol * scale) return iter;
    }
    throw NumericalError("BDF4 fixed-point iteration did not converge");
}

void Stepper::advance() {
    const auto& m = model_.manifold();
    const SystemState& cur = history_.back();
    SystemState next;
    next.time = cur.time + cfg_.h;
    const bool use_bdf = cfg_.scheme == Scheme::BDF4P && steps_taken_ >= cfg_.startup_steps && history_.size() == 4;
    if (use_bdf) {
        next.points = project_all(m, bdf4_update());
    } else {
        next.points = rk4p_step(model_, cur.points, velocity_, cfg_.h);
    }
    for (const auto& p : next.points) {
        if (!p.allFinite()) throw NumericalError("integrator produced a non-finite state");
    }
    history_.push_back(std::move(next));
    if (history_.size() > 4) history_.pop_front();
    ++steps_taken_;
    rhs(model_, history_.back().points, velocity_);
}

namespace {

std::size_t step_count(double T, double h) {
    if (!(T > 0.0)) throw ValidationError("simulate: T must be positive");
    if (h > T) throw ValidationError("simulate: step size h exceeds T");
    const double ratio = T / h;
    const double steps = std::round(ratio);
    if (std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
        throw ValidationError("simulate: T must be an integer multiple of h");
    }
    return static_cast<std::size_t>(steps);
}

}  // namespace

Trajectory simulate(const ModelSpec& model, const std::vector<Vec3>& x0, double T, const IntegratorConfig& cfg) {
    cfg.validate();
    const std::size_t steps = step_count(T, cfg.h);
    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.velocities.reserve(steps + 1);

    Stepper stepper(model, cfg, SystemState{x0, 0.0});
    for (std::size_t s = 0;; ++s) {
        traj.times.push_back(static_cast<double>(s) * cfg.h);
        traj.states.push_back(stepper.state().points);
        traj.velocities.push_back(stepper.velocity());
        if (s == steps) break;
        try {
            stepper.advance();
        } catch (const NumericalError& e) {
            std::ostringstream msg;
            msg << "simulate: step failed at t = " << traj.times.back() << ": " << e.what();
            throw NumericalError(msg.str());
        }
    }
    return traj;
}

std::vector<double> observation_times(std::size_t L, double T) {
    if (L < 2) throw ValidationError("observe: need L >= 2");
    std::vector<double> t(L);
    for (std::size_t l = 0; l < L; ++l) t[l] = T * static_cast<double>(l) / static_cast<double>(L - 1);
    t.back() = T;
    return t;
}

ObservationSet observe(const ModelSpec& model, const Trajectory& traj, std::size_t L, double T) {
    if (traj.times.size() < 2) throw ValidationError("observe: trajectory too short");
    const double h = traj.times[1] - traj.times[0];
    if (T > traj.end_time() * (1.0 + 1e-12)) throw ValidationError("observe: T exceeds the trajectory");
    const auto& m = model.manifold();

    ObservationSet obs;
    obs.times = observation_times(L, T);
    obs.snaps.reserve(L);
    const std::size_t last = traj.times.size() - 1;
    for (double t : obs.times) {
        const double pos = t / h;
        const double node = std::round(pos);
        Snapshot snap;
        if (std::abs(pos - node) <= 1e-9 * std::max(1.0, pos)) {
            const auto j = std::min(static_cast<std::size_t>(node), last);
            snap.x = traj.states[j];
            snap.v = traj.velocities[j];
        } else {
            const auto j = std::min(static_cast<std::size_t>(std::floor(pos)), last - 1);
            const double s = pos - static_cast<double>(j);
            const double s2 = s * s, s3 = s2 * s;
            const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
            const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
            const auto& x0 = traj.states[j];
            const auto& x1 = traj.states[j + 1];
            const auto& v0 = traj.velocities[j];
            const auto& v1 = traj.velocities[j + 1];
            snap.x.resize(x0.size());
            for (std::size_t i = 0; i < x0.size(); ++i) {
                snap.x[i] = m.project(h00 * x0[i] + h10 * h * v0[i] + h01 * x1[i] + h11 * h * v1[i]);
            }
            rhs(model, snap.x, snap.v);
        }
        obs.snaps.push_back(std::move(snap));
    }
    return obs;
}

std::vector<std::size_t> TrajectoryDataset::type_counts() const {
    std::vector<std::size_t> counts(type_count, 0);
    for (int t : types) ++counts[static_cast<std::size_t>(t)];
    return counts;
}

TrajectoryDataset TrajectoryDataset::subset(std::size_t first, std::size_t count) const {
    if (first + count > runs.size()) throw ValidationError("dataset subset out of range");
    TrajectoryDataset out = *this;
    out.runs.assign(runs.begin() + static_cast<std::ptrdiff_t>(first),
                    runs.begin() + static_cast<std::ptrdiff_t>(first + count));
    return out;
}

std::vector<Vec3> initial_condition(const ModelSpec& model, const ICSpec& ic, std::uint64_t seed, std::size_t m) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(static_cast<std::uint64_t>(m) >> 32)};
    Rng rng(seq);
    return sample_initial(model.manifold(), ic, model.agents(), rng);
}

TrajectoryDataset generate_dataset(const ModelSpec& model, const ICSpec& ic, const IntegratorConfig& cfg,
                                   const GenerateOptions& opt) {
    if (opt.M < 1) throw ValidationError("generate_dataset: need M >= 1");
    cfg.validate();
    TrajectoryDataset ds;
    ds.manifold = model.manifold().descriptor();
    ds.types = model.types();
    ds.type_count = model.type_count();
    ds.T = opt.T;
    ds.seed = opt.seed;
    ds.times = observation_times(opt.L, opt.T);
    ds.runs.resize(opt.M);

    parallel_for(opt.M, opt.threads, [&](std::size_t k) {
        const std::size_t m = opt.first_index + k;
        try {
            const auto x0 = initial_condition(model, ic, opt.seed, m);
            const auto traj = simulate(model, x0, opt.T, cfg);
            ds.runs[k] = observe(model, traj, opt.L, opt.T);
        } catch (const NumericalError& e) {
            throw NumericalError("trajectory " + std::to_string(m) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("trajectory " + std::to_string(m) + ": " + e.what());
        }
    });
    return ds;
}

}  // namespace geokernel
