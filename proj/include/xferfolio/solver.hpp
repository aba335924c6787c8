#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>

#include "xferfolio/types.hpp"

namespace xferfolio {

struct SolverConfig {
    int max_iterations = 5000;
    /// Step length relative to the gradient magnitude at each restart's
    /// start point; the absolute step is fixed along the path.
    double step_size = 0.05;
    double tolerance = 1e-8;   // stop when the iterate infinity-norm change falls below this
    int restarts = 8;          // random simplex starts plus the uniform start
};

struct SolveResult {
    Portfolio portfolio;
    double objective_value = 0.0;
    int iterations_used = 0;
    bool converged = false;
};

/// Euclidean projection onto the unit simplex via sort-and-threshold.
Portfolio project_to_simplex(const Eigen::VectorXd& v);

/// Same projection returning the raw weight vector; used in solver loops.
Eigen::VectorXd project_to_simplex_vector(const Eigen::VectorXd& v);

/// Sharpe objective mu'phi / sqrt(phi' sigma phi + eps) with a 1e-12 variance
/// floor so rank-deficient covariances cannot produce a singularity, and its
/// analytic gradient. Defined for any finite phi, not just simplex points,
/// which is what makes finite-difference checks straightforward.
double sharpe_objective(const Eigen::VectorXd& phi, const MomentEstimate& m);
Eigen::VectorXd sharpe_gradient(const Eigen::VectorXd& phi, const MomentEstimate& m);

/// Fine-tuning objective: Sharpe minus lambda * ||pretrained - phi||^2.
double transfer_objective(const Eigen::VectorXd& phi, const MomentEstimate& m,
                          const Eigen::VectorXd& pretrained, double lambda);
Eigen::VectorXd transfer_gradient(const Eigen::VectorXd& phi, const MomentEstimate& m,
                                  const Eigen::VectorXd& pretrained, double lambda);

/// Maximizes the Sharpe ratio over the simplex by projected gradient ascent,
/// taking the best iterate across restarts. Restart start points come from a
/// fixed internal stream, so the solve is a deterministic function of its
/// arguments. Ties within 1e-12 resolve to the earliest restart.
SolveResult optimize_direct(const MomentEstimate& m, const SolverConfig& cfg = {});

/// Pretraining solve: the same objective instantiated on source moments.
SolveResult optimize_source(const MomentEstimate& source_m, const SolverConfig& cfg = {});

/// Fine-tuning solve: Sharpe on target moments minus an L2 proximity penalty
/// toward the pretrained portfolio. The pretrained portfolio itself is
/// appended to the restart set, so a dominating penalty recovers it.
SolveResult optimize_transfer(const MomentEstimate& target_m, const Portfolio& pretrained,
                              double lambda, const SolverConfig& cfg = {});

/// Exhaustive evaluation over the simplex lattice with the given step; the
/// verification oracle for the solvers. Supports d <= 3 only.
std::pair<Portfolio, double> brute_force_oracle(
    const std::function<double(const Eigen::VectorXd&)>& objective, int d, double grid_step);

}  // namespace xferfolio
