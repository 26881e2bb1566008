#pragma once

#include "geokernel/basis.hpp"
#include "geokernel/config.hpp"
#include "geokernel/learn.hpp"
#include "geokernel/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace geokernel {

// Initial-condition streams: trajectory m of a stream uses (seed, offset + m),
// so training, fresh and transfer initial conditions never share a stream.
inline constexpr std::size_t kTrainStream = 0;
inline constexpr std::size_t kFreshStream = std::size_t{1} << 40;
inline constexpr std::size_t kTransferStream = std::size_t{2} << 40;
inline constexpr std::size_t kRhoStream = std::size_t{3} << 40;

TrajectoryDataset simulate_training(const ExperimentConfig& cfg, std::uint64_t seed, std::size_t M);

struct LearnResult {
    EstimatorSet estimators;
    std::vector<BlockSystem> systems;
    std::vector<LearnReport> reports;
    double distance_seconds = 0.0;
    double assembly_seconds = 0.0;
    double solve_seconds = 0.0;

    nlohmann::json report_json() const;
};

LearnResult learn_dataset(const ExperimentConfig& cfg, const TrajectoryDataset& ds,
                          const std::vector<std::size_t>& basis_n);
inline LearnResult learn_dataset(const ExperimentConfig& cfg, const TrajectoryDataset& ds) {
    return learn_dataset(cfg, ds, cfg.basis_n);
}

struct PairError {
    std::size_t k = 0, kp = 0;
    bool has_data = false;  // some pair of agents realizes this interaction
    RelError error;
};

struct EvaluateReport {
    std::vector<PairError> pairs;
    TrajErrorStats training;
    TrajErrorStats fresh;
    std::optional<TrajErrorStats> transfer;

    const PairError& pair(std::size_t k, std::size_t kp) const;
};

// Writes kernels.csv, rho.csv, rel_errors.csv and traj_errors.csv to out_dir.
EvaluateReport evaluate(const ExperimentConfig& cfg, const TrajectoryDataset& ds, const EstimatorSet& est,
                        const std::filesystem::path& out_dir);

// Writes the study table to out_csv.
StudyResult study(const ExperimentConfig& cfg, const std::filesystem::path& out_csv, std::ostream& log);

std::string rho_csv(const TrajectoryDataset& ds, std::size_t bins = 200);

// File-level commands behind the command-line tool.
void cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_learn(const ExperimentConfig& cfg, const std::filesystem::path& dataset, const std::filesystem::path& out,
               std::ostream& log);
void cmd_evaluate(const ExperimentConfig& cfg, const std::filesystem::path& dataset,
                  const std::filesystem::path& estimators, const std::filesystem::path& out_dir, std::ostream& log);
void cmd_study(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);
void cmd_rho(const ExperimentConfig& cfg, const std::filesystem::path& dataset, const std::filesystem::path& out,
             std::ostream& log);

}  // namespace geokernel
