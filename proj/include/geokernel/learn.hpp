#pragma once

#include "geokernel/basis.hpp"
#include "geokernel/integrate.hpp"

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace geokernel {

// A alpha = b for one observer type, with every normalization applied:
//   Psi_eta(i) = 1/N sum_i' psi_eta(d_ii') w_ii'
//   A(eta, eta') = 1/(LM) sum_{m,l} 1/N sum_i <Psi_eta(i), Psi_eta'(i)>_g
//   b(eta)       = 1/(LM) sum_{m,l} 1/N sum_i <xdot_i, Psi_eta(i)>_g
// c0 is the same average of |xdot_i|_g^2, so loss(alpha) = c0 - 2 b.alpha + alpha.A.alpha.
struct NormalEquations {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double c0 = 0.0;
    double scale = 0.0;                  // 1/(LM)
    std::size_t out_of_range = 0;        // pair distances outside the basis range
    double distance_seconds = 0.0;       // CPU time spent on pairwise geometry
    double assembly_seconds = 0.0;       // CPU time spent accumulating A and b

    std::size_t size() const { return static_cast<std::size_t>(b.size()); }
    double loss(const Eigen::VectorXd& alpha) const;
};

NormalEquations assemble(const TrajectoryDataset& ds, const SplineBasis& basis, unsigned threads = 0);

// System of observer type k over the concatenated coefficients of
// phi_{k,0}, ..., phi_{k,K-1}. Absent bases are zero-dimension blocks.
struct BlockSystem {
    std::size_t observer = 0;
    std::vector<std::optional<SplineBasis>> bases;  // per neighbour type
    std::vector<std::size_t> offsets;               // K + 1 entries
    NormalEquations ne;
};

// bases[k * K + k'] is the basis of phi_{k,k'}, or nullopt to fix it at zero.
std::vector<BlockSystem> assemble_hetero(const TrajectoryDataset& ds,
                                         const std::vector<std::optional<SplineBasis>>& bases,
                                         unsigned threads = 0);

struct LearnReport {
    Eigen::VectorXd coeffs;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double cond = 0.0;
    double residual_loss = 0.0;
    bool flagged = false;  // minimum-norm spectral solve on a near-singular A
    double solve_seconds = 0.0;
};

inline constexpr double kSingularCutoff = 1e-12;

LearnReport solve(const NormalEquations& ne);

// Estimators of every block of a solved heterogeneous system.
EstimatorSet estimators_from(const std::vector<BlockSystem>& systems, const std::vector<LearnReport>& reports);

// 1/(ML) sum_{m,l} 1/N sum_i |xdot_i - f_phi(x)_i|_g^2.
double loss(const TrajectoryDataset& ds, const KernelMatrix& kernels);
double loss(const TrajectoryDataset& ds, const EstimatorSet& est);

}  // namespace geokernel
