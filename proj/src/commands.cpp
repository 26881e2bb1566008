#include "geokernel/commands.hpp"

#include "geokernel/dataset_io.hpp"
#include "geokernel/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace geokernel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Type labels are 1-based in every file a person reads.
std::string pair_label(std::size_t k, std::size_t kp) {
    return std::to_string(k + 1) + std::to_string(kp + 1);
}

PairFilter filter_for(std::size_t K, std::size_t k, std::size_t kp) {
    return K == 1 ? PairFilter{} : PairFilter{{k, kp}};
}

std::optional<EmpiricalMeasure> try_rho(const TrajectoryDataset& ds, const PairFilter& f) {
    // A pair no two agents can form (a single agent of a type with itself) has no measure.
    if (f && f->first == f->second && ds.type_counts()[f->first] < 2) return std::nullopt;
    return rho_empirical(ds, f);
}

void check_compatible(const ExperimentConfig& cfg, const TrajectoryDataset& ds) {
    if (!(ds.manifold == cfg.manifold)) throw ValidationError("dataset manifold does not match the configuration");
    if (ds.type_count != cfg.K() || ds.type_counts() != cfg.type_counts) {
        throw ValidationError("dataset population does not match the configuration");
    }
}

}  // namespace

TrajectoryDataset simulate_training(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t M) {
    GenerateOptions opt;
    opt.M = M;
    opt.L = cfg.L;
    opt.T = cfg.T;
    opt.seed = seed;
    opt.first_index = kTrainStream;
    opt.threads = cfg.threads;
    return generate_dataset(cfg.model(), cfg.ic, cfg.integrator, opt);
}

nlohmann::json LearnResult::report_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& r = reports[k];
        list.push_back({{"observer_type", k + 1},
                        {"size", r.coeffs.size()},
                        {"lambda_min", r.lambda_min},
                        {"lambda_max", r.lambda_max},
                        {"cond", r.cond},
                        {"residual_loss", r.residual_loss},
                        {"flagged", r.flagged},
                        {"out_of_range", systems[k].ne.out_of_range}});
    }
    return list;
}

LearnResult learn_dataset(const ExperimentConfig& cfg, const TrajectoryDataset& ds,
                          const std::vector<std::size_t>& basis_n) {
    LearnResult res;
    res.systems = assemble_hetero(ds, cfg.bases(ds, basis_n), cfg.threads);
    for (const auto& sys : res.systems) {
        res.reports.push_back(solve(sys.ne));
        res.distance_seconds += sys.ne.distance_seconds;
        res.assembly_seconds += sys.ne.assembly_seconds;
        res.solve_seconds += res.reports.back().solve_seconds;
    }
    res.estimators = estimators_from(res.systems, res.reports);
    return res;
}

const PairError& EvaluateReport::pair(std::size_t k, std::size_t kp) const {
    for (const auto& p : pairs) {
        if (p.k == k && p.kp == kp) return p;
    }
    throw ValidationError("no error entry for the requested type pair");
}

EvaluateReport evaluate(const ExperimentConfig& cfg, const TrajectoryDataset& ds, const EstimatorSet& est,
                        const std::filesystem::path& out_dir) {
    check_compatible(cfg, ds);
    const std::size_t K = ds.type_count;
    if (est.types() != K) throw ValidationError("estimators do not match the dataset types");
    std::filesystem::create_directories(out_dir);

    const KernelMatrix truth = cfg.kernels();
    const Manifold man(ds.manifold);
    const EstimatorSet dyn = cfg.smooth ? est.smooth() : est;
    const KernelMatrix est_kernels = dyn.to_kernels();
    const ModelSpec true_model(man, truth, ds.types);
    const ModelSpec est_model(man, est_kernels, ds.types);

    const TrajectoryDataset rho_ds = [&] {
        if (cfg.M_rho == 0) return ds;
        GenerateOptions opt{cfg.M_rho, cfg.L, cfg.T, ds.seed, kRhoStream, cfg.threads};
        return generate_dataset(true_model, cfg.ic, cfg.integrator, opt);
    }();

    EvaluateReport rep;
    std::string rho_text = "pair,bin_center[distance],mass[probability]\n";
    std::string err_text = "pair,rel_error[relative],absolute_flag\n";
    double r_plot = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t kp = 0; kp < K; ++kp) {
            PairError pe;
            pe.k = k;
            pe.kp = kp;
            const auto mu = try_rho(rho_ds, filter_for(K, k, kp));
            const auto& e = est.at(k, kp);
            if (mu) {
                pe.has_data = true;
                pe.error = rel_error(e, truth.at(k, kp), *mu);
                r_plot = std::max(r_plot, mu->max());
                for (const auto& b : mu->histogram(200)) {
                    rho_text += pair_label(k, kp) + "," + num(b.center) + "," + num(b.mass) + "\n";
                }
            } else {
                // Nothing to compare against; an estimator fixed at zero has zero error.
                pe.error = {e.empty() ? 0.0 : kInf, true};
            }
            err_text += pair_label(k, kp) + "," + num(pe.error.value) + "," + (pe.error.absolute ? "1" : "0") + "\n";
            rep.pairs.push_back(pe);
        }
    }

    std::string kern_text = "r[distance]";
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t kp = 0; kp < K; ++kp) {
            const auto l = pair_label(k, kp);
            kern_text += ",phi_" + l + "[1/time],phihat_" + l + "[1/time],phihat_smooth_" + l + "[1/time]";
        }
    }
    kern_text += "\n";
    constexpr int kGrid = 1000;
    for (int g = 0; g <= kGrid; ++g) {
        const double r = r_plot * g / kGrid;
        kern_text += num(r);
        for (std::size_t k = 0; k < K; ++k) {
            for (std::size_t kp = 0; kp < K; ++kp) {
                kern_text += "," + num(truth.at(k, kp).eval(r)) + "," + num(est.at(k, kp).eval(r)) + "," +
                             num(dyn.at(k, kp).eval(r));
            }
        }
        kern_text += "\n";
    }

    const std::size_t n_train = std::min(ds.M(), cfg.test_ics);
    std::vector<std::vector<Vec3>> train_ics, fresh_ics;
    for (std::size_t m = 0; m < n_train; ++m) train_ics.push_back(ds.runs[m].snaps.front().x);
    for (std::size_t m = 0; m < cfg.test_ics; ++m) {
        fresh_ics.push_back(initial_condition(true_model, cfg.ic, ds.seed, kFreshStream + m));
    }
    rep.training = traj_error_stats(true_model, est_model, train_ics, cfg.integrator, ds.T, ds.L(), cfg.threads);
    rep.fresh = traj_error_stats(true_model, est_model, fresh_ics, cfg.integrator, ds.T, ds.L(), cfg.threads);
    if (cfg.transfer_N > 0) {
        const ModelSpec big_true = cfg.model_with_agents(cfg.transfer_N);
        const ModelSpec big_est(man, est_kernels, big_true.types());
        std::vector<std::vector<Vec3>> ics;
        for (std::size_t m = 0; m < cfg.test_ics; ++m) {
            ics.push_back(initial_condition(big_true, cfg.ic, ds.seed, kTransferStream + m));
        }
        rep.transfer = traj_error_stats(big_true, big_est, ics, cfg.integrator, ds.T, ds.L(), cfg.threads);
    }

    std::string traj_text = "ics,agents,count,mean[distance],std[distance]\n";
    auto row = [&](const char* name, std::size_t agents, const TrajErrorStats& s) {
        traj_text += std::string(name) + "," + std::to_string(agents) + "," + std::to_string(s.errors.size()) + "," +
                     num(s.mean) + "," + num(s.std) + "\n";
    };
    row("training", ds.N(), rep.training);
    row("fresh", ds.N(), rep.fresh);
    if (rep.transfer) row("transfer", cfg.transfer_N, *rep.transfer);

    write_text(out_dir / "kernels.csv", kern_text);
    write_text(out_dir / "rho.csv", rho_text);
    write_text(out_dir / "rel_errors.csv", err_text);
    write_text(out_dir / "traj_errors.csv", traj_text);
    return rep;
}

StudyResult study(const ExperimentConfig& cfg, const std::filesystem::path& out_csv, std::ostream& log) {
    if (cfg.K() != 1) throw ValidationError("study: only single-type systems are supported");
    if (cfg.study_M.size() < 3) throw ValidationError("study: need at least three values of M");
    const std::size_t m_max = *std::max_element(cfg.study_M.begin(), cfg.study_M.end());
    const PiecewiseKernel truth = cfg.kernels().at(0, 0);

    // errors[(M, repeat)]; datasets are nested: every M uses a prefix of one run set.
    std::map<std::pair<std::size_t, std::size_t>, double> errors;
    for (std::size_t rep = 0; rep < cfg.study_repeats; ++rep) {
        const auto t0 = Clock::now();
        const auto full = simulate_training(cfg, cfg.seed + rep, m_max);
        const auto mu = rho_empirical(full);
        for (std::size_t M : cfg.study_M) {
            const auto res = learn_dataset(cfg, full.subset(0, M), cfg.study_basis_n(M));
            errors[{M, rep}] = rel_error(res.estimators.at(0, 0), truth, mu).value;
        }
        log << "study: repeat " << rep + 1 << "/" << cfg.study_repeats << " done in " << seconds_since(t0) << " s\n";
    }
    auto res = convergence_study(cfg.study_M, cfg.study_repeats,
                                 [&](std::size_t M, std::size_t rep) { return errors.at({M, rep}); });

    std::string text = "M[trajectories],rel_error_mean[relative],rel_error_std[relative],slope[log-log],ci_lo[log-log],"
                       "ci_hi[log-log]\n";
    for (const auto& p : res.points) {
        text += std::to_string(p.M) + "," + num(p.mean) + "," + num(p.std) + "," + num(res.fit.slope) + "," +
                num(res.fit.ci_lo) + "," + num(res.fit.ci_hi) + "\n";
    }
    write_text(out_csv, text);
    return res;
}

std::string rho_csv(const TrajectoryDataset& ds, std::size_t bins) {
    std::string text = "pair,bin_center[distance],mass[probability]\n";
    const std::size_t K = ds.type_count;
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t kp = 0; kp < K; ++kp) {
            const auto mu = try_rho(ds, filter_for(K, k, kp));
            if (!mu) continue;
            for (const auto& b : mu->histogram(bins)) {
                text += pair_label(k, kp) + "," + num(b.center) + "," + num(b.mass) + "\n";
            }
        }
    }
    return text;
}

void cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    const auto t0 = Clock::now();
    const auto ds = simulate_training(cfg, cfg.seed, cfg.M);
    write_dataset(ds, out);
    const auto [lo, hi] = observed_range(ds);
    log << "simulate: M=" << ds.M() << " L=" << ds.L() << " N=" << ds.N() << " R_min_obs=" << lo
        << " R_max_obs=" << hi << " wall=" << seconds_since(t0) << " s\n";
}

void cmd_learn(const ExperimentConfig& cfg, const std::filesystem::path& dataset, const std::filesystem::path& out,
               std::ostream& log) {
    const auto ds = read_dataset(dataset);
    check_compatible(cfg, ds);
    const auto res = learn_dataset(cfg, ds);
    const nlohmann::json doc = {{"estimators", res.estimators.to_json()}, {"report", res.report_json()}};
    write_text(out, doc.dump(2) + "\n");
    const nlohmann::json timing = {{"pairwise_distances_seconds", res.distance_seconds},
                                   {"assembly_seconds", res.assembly_seconds},
                                   {"solve_seconds", res.solve_seconds}};
    auto timing_path = out;
    timing_path += ".timing.json";
    write_text(timing_path, timing.dump(2) + "\n");
    for (std::size_t k = 0; k < res.reports.size(); ++k) {
        const auto& r = res.reports[k];
        log << "learn: observer type " << k + 1 << " n=" << r.coeffs.size() << " lambda_min=" << r.lambda_min
            << " cond=" << r.cond << " residual_loss=" << r.residual_loss << (r.flagged ? " [flagged]" : "") << "\n";
    }
    log << "learn: timing distances=" << res.distance_seconds << " s assembly=" << res.assembly_seconds
        << " s solve=" << res.solve_seconds << " s\n";
}

void cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& dataset,
                  const std::filesystem::path& estimators, const std::filesystem::path& out_dir, std::ostream& log) {
    const auto ds = read_dataset(dataset);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text(estimators));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("estimator file: ") + e.what());
    }
    const auto est = EstimatorSet::from_json(doc.contains("estimators") ? doc.at("estimators") : doc);
    const auto rep = evaluate(cfg, ds, est, out_dir);
    for (const auto& p : rep.pairs) {
        log << "evaluate: Err_" << pair_label(p.k, p.kp) << " = " << p.error.value
            << (p.error.absolute ? " (absolute)" : "") << "\n";
    }
    log << "evaluate: training ICs " << rep.training.mean << " +- " << rep.training.std << "\n";
    log << "evaluate: fresh ICs    " << rep.fresh.mean << " +- " << rep.fresh.std << "\n";
    if (rep.transfer) log << "evaluate: transfer     " << rep.transfer->mean << " +- " << rep.transfer->std << "\n";
}

void cmd_study(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log) {
    const auto res = study(cfg, out, log);
    log << "study: slope " << res.fit.slope << " CI [" << res.fit.ci_lo << ", " << res.fit.ci_hi << "]"
        << (res.floor_limited ? " [floor-limited]" : "") << (res.flat ? " [flat]" : "") << "\n";
}

void cmd_rho(const ExperimentConfig& cfg, const std::filesystem::path& dataset, const std::filesystem::path& out,
             std::ostream& log) {
    const auto ds = read_dataset(dataset);
    check_compatible(cfg, ds);
    write_text(out, rho_csv(ds));
    log << "rho: wrote " << out.string() << "\n";
}

}  // namespace geokernel
