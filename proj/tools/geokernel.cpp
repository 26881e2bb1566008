#include "geokernel/commands.hpp"
#include "geokernel/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "Experiment configuration (INI)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "Override run.seed");
    cmd->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    cmd->add_option("--out", c.out, "Output path")->required();
}

geokernel::ExperimentConfig load(const Common& c) {
    auto cfg = geokernel::ExperimentConfig::load(c.config);
    if (c.seed) cfg.seed = *c.seed;
    if (c.threads) cfg.threads = *c.threads;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learn interaction kernels of particle systems on Riemannian manifolds"};
    app.require_subcommand(1);

    Common sim_opt, learn_opt, eval_opt, study_opt, rho_opt;
    std::string learn_data, eval_data, eval_est, rho_data;
    std::vector<std::size_t> study_M;
    std::optional<std::size_t> study_repeats;

    auto* sim = app.add_subcommand("simulate", "Generate a training dataset");
    add_common(sim, sim_opt);

    auto* learn = app.add_subcommand("learn", "Learn estimators from a dataset");
    add_common(learn, learn_opt);
    learn->add_option("--data", learn_data, "Dataset file")->required()->check(CLI::ExistingFile);

    auto* eval = app.add_subcommand("evaluate", "Estimation and trajectory errors, plot CSVs");
    add_common(eval, eval_opt);
    eval->add_option("--data", eval_data, "Training dataset file")->required()->check(CLI::ExistingFile);
    eval->add_option("--estimators", eval_est, "Estimator file from learn")->required()->check(CLI::ExistingFile);

    auto* stud = app.add_subcommand("study", "Convergence rate of the estimation error in M");
    add_common(stud, study_opt);
    stud->add_option("--M", study_M, "Values of M (overrides study.M)")->delimiter(',');
    stud->add_option("--repeats", study_repeats, "Independent repeats (overrides study.repeats)");

    auto* rho = app.add_subcommand("rho", "Histogram of the empirical pairwise-distance measure");
    add_common(rho, rho_opt);
    rho->add_option("--data", rho_data, "Dataset file")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*sim) {
            geokernel::cmd_simulate(load(sim_opt), sim_opt.out, std::cout);
        } else if (*learn) {
            geokernel::cmd_learn(load(learn_opt), learn_data, learn_opt.out, std::cout);
        } else if (*eval) {
            geokernel::cmd_evaluate(load(eval_opt), eval_data, eval_est, eval_opt.out, std::cout);
        } else if (*stud) {
            auto cfg = load(study_opt);
            if (!study_M.empty()) cfg.study_M = study_M;
            if (study_repeats) cfg.study_repeats = *study_repeats;
            geokernel::cmd_study(cfg, study_opt.out, std::cout);
        } else if (*rho) {
            geokernel::cmd_rho(load(rho_opt), rho_data, rho_opt.out, std::cout);
        }
    } catch (const geokernel::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const geokernel::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return 0;
}
