#include "geokernel/learn.hpp"

#include "geokernel/errors.hpp"
#include "geokernel/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <limits>

namespace geokernel {

double NormalEquations::loss(const Eigen::VectorXd& alpha) const {
    return c0 - 2.0 * b.dot(alpha) + alpha.dot(A * alpha);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Unnormalized sums for every observer type over a range of trajectories.
struct Accum {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double c0 = 0.0;
    std::size_t out_of_range = 0;
    double distance_seconds = 0.0;
    double assembly_seconds = 0.0;
};

struct Layout {
    std::size_t K = 1;
    std::vector<std::optional<SplineBasis>> bases;       // K * K
    std::vector<std::vector<std::size_t>> offsets;       // per observer, K + 1
    std::size_t dim(std::size_t k) const { return offsets[k].back(); }
};

void accumulate_snapshot(const Manifold& man, const Layout& lay, const std::vector<int>& types, const Snapshot& snap,
                         std::vector<Accum>& acc, std::vector<PairGeometry>& pairs,
                         std::vector<std::vector<Vec3>>& psi, std::vector<std::vector<char>>& mark,
                         std::vector<std::vector<std::size_t>>& touched) {
    const std::size_t n = snap.x.size();
    auto t0 = Clock::now();
    pairs.clear();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) pairs.push_back(man.pair(snap.x[i], snap.x[j]));
    }
    auto t1 = Clock::now();
    const double dist_time = std::chrono::duration<double>(t1 - t0).count();

    double values[kMaxDegree + 1];
    auto add = [&](std::size_t i, std::size_t ki, std::size_t kj, double r, const Vec3& w) {
        const auto& basis = lay.bases[ki * lay.K + kj];
        if (!basis) return;
        std::size_t first = 0;
        if (!basis->nonzero(r, first, values)) {
            ++acc[ki].out_of_range;
            return;
        }
        const std::size_t base = lay.offsets[ki][kj] + first;
        for (int k = 0; k <= basis->degree(); ++k) {
            const std::size_t idx = base + static_cast<std::size_t>(k);
            if (!mark[i][idx]) {
                mark[i][idx] = 1;
                touched[i].push_back(idx);
                psi[i][idx].setZero();
            }
            psi[i][idx] += values[k] * w;
        }
    };

    std::size_t p = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ki = static_cast<std::size_t>(types[i]);
        for (std::size_t j = i + 1; j < n; ++j, ++p) {
            const auto kj = static_cast<std::size_t>(types[j]);
            const auto& g = pairs[p];
            add(i, ki, kj, g.dist, g.w_xy);
            add(j, kj, ki, g.dist, g.w_yx);
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& a = acc[static_cast<std::size_t>(types[i])];
        const double lam = man.metric_factor(snap.x[i]);
        const auto& v = snap.v[i];
        a.c0 += lam * v.squaredNorm();
        for (std::size_t r : touched[i]) {
            const Vec3& pr = psi[i][r];
            a.b[static_cast<Eigen::Index>(r)] += lam * v.dot(pr);
            for (std::size_t c : touched[i]) {
                a.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) += lam * pr.dot(psi[i][c]);
            }
        }
        for (std::size_t r : touched[i]) mark[i][r] = 0;
        touched[i].clear();
    }
    const double asm_time = seconds_since(t1);
    // Timings are kept on the first accumulator only.
    acc[0].distance_seconds += dist_time;
    acc[0].assembly_seconds += asm_time;
}

std::vector<Accum> assemble_range(const TrajectoryDataset& ds, const Layout& lay, std::size_t m0, std::size_t m1) {
    const Manifold man(ds.manifold);
    const std::size_t n = ds.N();
    std::vector<Accum> acc(lay.K);
    for (std::size_t k = 0; k < lay.K; ++k) {
        acc[k].A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lay.dim(k)), static_cast<Eigen::Index>(lay.dim(k)));
        acc[k].b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lay.dim(k)));
    }
    std::vector<PairGeometry> pairs;
    pairs.reserve(n * (n - 1) / 2);
    std::vector<std::vector<Vec3>> psi(n);
    std::vector<std::vector<char>> mark(n);
    std::vector<std::vector<std::size_t>> touched(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t d = lay.dim(static_cast<std::size_t>(ds.types[i]));
        psi[i].assign(d, Vec3::Zero());
        mark[i].assign(d, 0);
    }
    for (std::size_t m = m0; m < m1; ++m) {
        for (const auto& snap : ds.runs[m].snaps) {
            if (snap.x.size() != n || snap.v.size() != n) throw ValidationError("dataset snapshot has the wrong size");
            accumulate_snapshot(man, lay, ds.types, snap, acc, pairs, psi, mark, touched);
        }
    }
    return acc;
}

// Number of work chunks is independent of the thread count so the reduction
// order, and hence every bit of A and b, does not depend on --threads.
constexpr std::size_t kChunks = 64;

std::vector<BlockSystem> assemble_layout(const TrajectoryDataset& ds, const Layout& lay, unsigned threads) {
    if (ds.M() == 0 || ds.L() == 0) throw ValidationError("assemble: empty dataset");
    if (ds.N() < 2) throw ValidationError("assemble: need at least two agents");
    for (int t : ds.types) {
        if (t < 0 || static_cast<std::size_t>(t) >= lay.K) throw ValidationError("assemble: type label out of range");
    }
    const std::size_t M = ds.M();
    const std::size_t chunks = std::min(M, kChunks);
    std::vector<std::vector<Accum>> parts(chunks);
    parallel_for(chunks, threads, [&](std::size_t c) {
        parts[c] = assemble_range(ds, lay, c * M / chunks, (c + 1) * M / chunks);
    });

    const double n = static_cast<double>(ds.N());
    const double scale = 1.0 / (static_cast<double>(ds.L()) * static_cast<double>(M));
    std::vector<BlockSystem> out(lay.K);
    for (std::size_t k = 0; k < lay.K; ++k) {
        auto& sys = out[k];
        sys.observer = k;
        sys.bases.assign(lay.bases.begin() + static_cast<std::ptrdiff_t>(k * lay.K),
                         lay.bases.begin() + static_cast<std::ptrdiff_t>((k + 1) * lay.K));
        sys.offsets = lay.offsets[k];
        Accum total = std::move(parts[0][k]);
        for (std::size_t c = 1; c < chunks; ++c) {
            const auto& p = parts[c][k];
            total.A += p.A;
            total.b += p.b;
            total.c0 += p.c0;
            total.out_of_range += p.out_of_range;
            total.distance_seconds += p.distance_seconds;
            total.assembly_seconds += p.assembly_seconds;
        }
        auto& ne = sys.ne;
        ne.scale = scale;
        // Psi was accumulated without its 1/N; the agent average adds another.
        ne.A = (scale / (n * n * n)) * total.A;
        ne.b = (scale / (n * n)) * total.b;
        ne.c0 = scale / n * total.c0;
        ne.out_of_range = total.out_of_range;
        ne.distance_seconds = total.distance_seconds;
        ne.assembly_seconds = total.assembly_seconds;
    }
    return out;
}

}  // namespace

NormalEquations assemble(const TrajectoryDataset& ds, const SplineBasis& basis, unsigned threads) {
    if (ds.type_count != 1) throw ValidationError("assemble: dataset is heterogeneous; use assemble_hetero");
    return assemble_hetero(ds, {basis}, threads).front().ne;
}

std::vector<BlockSystem> assemble_hetero(const TrajectoryDataset& ds,
                                         const std::vector<std::optional<SplineBasis>>& bases, unsigned threads) {
    Layout lay;
    lay.K = ds.type_count;
    if (lay.K == 0 || bases.size() != lay.K * lay.K) {
        throw ValidationError("assemble_hetero: need one basis slot per type pair");
    }
    lay.bases = bases;
    lay.offsets.resize(lay.K);
    for (std::size_t k = 0; k < lay.K; ++k) {
        auto& off = lay.offsets[k];
        off.assign(1, 0);
        for (std::size_t kp = 0; kp < lay.K; ++kp) {
            const auto& b = bases[k * lay.K + kp];
            off.push_back(off.back() + (b ? b->size() : 0));
        }
    }
    return assemble_layout(ds, lay, threads);
}

LearnReport solve(const NormalEquations& ne) {
    const auto t0 = Clock::now();
    LearnReport rep;
    const Eigen::Index n = ne.b.size();
    if (ne.A.rows() != n || ne.A.cols() != n) throw ValidationError("solve: A and b have different sizes");
    if (n == 0) {
        rep.cond = 1.0;
        return rep;
    }
    if (!ne.A.allFinite() || !ne.b.allFinite()) throw NumericalError("solve: non-finite entries in A or b");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ne.A);
    if (eig.info() != Eigen::Success) throw NumericalError("solve: eigendecomposition failed");
    const auto& ev = eig.eigenvalues();
    rep.lambda_min = ev[0];
    rep.lambda_max = ev[n - 1];
    rep.cond = rep.lambda_min > 0.0 ? rep.lambda_max / rep.lambda_min : std::numeric_limits<double>::infinity();

    bool done = false;
    if (rep.lambda_max > 0.0 && rep.lambda_min > kSingularCutoff * rep.lambda_max) {
        Eigen::LLT<Eigen::MatrixXd> llt(ne.A);
        if (llt.info() == Eigen::Success) {
            rep.coeffs = llt.solve(ne.b);
            done = true;
        }
    }
    if (!done) {
        rep.flagged = true;
        rep.coeffs = Eigen::VectorXd::Zero(n);
        const double cut = kSingularCutoff * std::max(rep.lambda_max, 0.0);
        const auto& U = eig.eigenvectors();
        for (Eigen::Index k = 0; k < n; ++k) {
            if (ev[k] > cut && ev[k] > 0.0) rep.coeffs += (U.col(k).dot(ne.b) / ev[k]) * U.col(k);
        }
    }
    if (!rep.coeffs.allFinite()) throw NumericalError("solve: non-finite coefficients");
    rep.residual_loss = std::max(0.0, ne.loss(rep.coeffs));
    rep.solve_seconds = seconds_since(t0);
    return rep;
}

EstimatorSet estimators_from(const std::vector<BlockSystem>& systems, const std::vector<LearnReport>& reports) {
    if (systems.size() != reports.size()) throw ValidationError("estimators_from: size mismatch");
    const std::size_t K = systems.size();
    EstimatorSet set(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto& sys = systems[k];
        for (std::size_t kp = 0; kp < K; ++kp) {
            const auto& b = sys.bases[kp];
            if (!b) continue;
            const auto off = static_cast<Eigen::Index>(sys.offsets[kp]);
            set.at(k, kp) = Estimator(*b, reports[k].coeffs.segment(off, static_cast<Eigen::Index>(b->size())));
        }
    }
    return set;
}

namespace {

template <class Phi>
double loss_impl(const TrajectoryDataset& ds, Phi&& phi) {
    if (ds.M() == 0 || ds.L() == 0) throw ValidationError("loss: empty dataset");
    const Manifold man(ds.manifold);
    const std::size_t n = ds.N();
    std::vector<Vec3> f(n);
    double total = 0.0;
    for (const auto& run : ds.runs) {
        for (const auto& snap : run.snaps) {
            std::fill(f.begin(), f.end(), Vec3::Zero());
            for (std::size_t i = 0; i < n; ++i) {
                const auto ki = static_cast<std::size_t>(ds.types[i]);
                for (std::size_t j = i + 1; j < n; ++j) {
                    const auto kj = static_cast<std::size_t>(ds.types[j]);
                    const PairGeometry g = man.pair(snap.x[i], snap.x[j]);
                    f[i] += phi(ki, kj, g.dist) * g.w_xy;
                    f[j] += phi(kj, ki, g.dist) * g.w_yx;
                }
            }
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const Vec3 res = snap.v[i] - f[i] / static_cast<double>(n);
                s += man.metric_factor(snap.x[i]) * res.squaredNorm();
            }
            total += s / static_cast<double>(n);
        }
    }
    return total / (static_cast<double>(ds.M()) * static_cast<double>(ds.L()));
}

}  // namespace

double loss(const TrajectoryDataset& ds, const KernelMatrix& kernels) {
    if (kernels.types() != ds.type_count) throw ValidationError("loss: kernel matrix does not match the dataset types");
    return loss_impl(ds, [&](std::size_t k, std::size_t kp, double r) { return kernels.at(k, kp).eval(r); });
}

double loss(const TrajectoryDataset& ds, const EstimatorSet& est) {
    if (est.types() != ds.type_count) throw ValidationError("loss: estimators do not match the dataset types");
    return loss_impl(ds, [&](std::size_t k, std::size_t kp, double r) { return est.at(k, kp).eval(r); });
}

}  // namespace geokernel
