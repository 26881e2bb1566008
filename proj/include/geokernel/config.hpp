#pragma once

#include "geokernel/basis.hpp"
#include "geokernel/dynamics.hpp"
#include "geokernel/integrate.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace geokernel {

// One experiment, read from an INI file (schema in configs/README.md).
struct ExperimentConfig {
    ManifoldDescriptor manifold = ManifoldDescriptor::sphere(5.0 / 3.141592653589793, 5.0);

    std::string dynamics = "od";  // od | lj | ps1 | file
    double lj_epsilon = 10.0;
    double lj_sigma = 1.0;
    std::string kernel_file;      // KernelMatrix json when dynamics = file
    std::vector<std::size_t> type_counts{20};

    IntegratorConfig integrator;
    double T = 10.0;
    std::size_t L = 100;
    std::size_t M = 100;
    std::size_t M_rho = 0;        // 0: use the training data for rho

    ICSpec ic;

    std::vector<std::size_t> basis_n{51};  // per type pair, row-major
    std::vector<int> basis_degree{1};
    bool fixed_range = false;
    double range_lo = 0.0;
    double range_hi = 0.0;
    bool smooth = true;

    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::size_t test_ics = 20;
    std::size_t transfer_N = 40;

    std::vector<std::size_t> study_M{32, 128, 512};
    std::size_t study_repeats = 3;
    // n for a study run with M trajectories: round(basis_n * (M / study_ref_M)^(1/3)), or basis_n when 0.
    std::size_t study_ref_M = 0;

    static ExperimentConfig load(const std::filesystem::path& path);
    static ExperimentConfig parse(const std::string& text);

    void validate() const;

    std::size_t N() const;
    std::size_t K() const { return type_counts.size(); }
    KernelMatrix kernels() const;
    ModelSpec model() const;
    // Same kernels with n agents; heterogeneous systems keep every type but the
    // first at its configured count.
    ModelSpec model_with_agents(std::size_t n) const;

    // Basis of every type pair for learning from `ds` with `n` functions per
    // pair. Pairs no two distinct agents can form are nullopt.
    std::vector<std::optional<SplineBasis>> bases(const TrajectoryDataset& ds,
                                                  const std::vector<std::size_t>& n) const;
    std::vector<std::optional<SplineBasis>> bases(const TrajectoryDataset& ds) const { return bases(ds, basis_n); }
    std::vector<std::size_t> study_basis_n(std::size_t M) const;
};

}  // namespace geokernel
