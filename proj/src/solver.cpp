#include "xferfolio/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "xferfolio/errors.hpp"
#include "xferfolio/rng.hpp"

namespace xferfolio {

namespace {

constexpr double kVarianceEps = 1e-12;
constexpr double kTieWindow = 1e-12;
// Restart stream is keyed by a constant, not by the problem data: identical
// configs must use identical start points no matter what is being solved.
constexpr std::uint64_t kRestartStreamKey = 0x536F6C766552E57Aull;

void validate_config(const SolverConfig& cfg) {
    if (cfg.max_iterations <= 0 || cfg.step_size <= 0.0 || cfg.tolerance <= 0.0 ||
        cfg.restarts <= 0) {
        throw std::invalid_argument("solver config fields must be strictly positive");
    }
}

Eigen::VectorXd random_simplex_point(Eigen::Index d, CounterRng& rng) {
    // Dirichlet(1,...,1): normalized exponentials.
    Eigen::VectorXd w(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        w[i] = -std::log(rng.uniform_open());
    }
    return w / w.sum();
}

std::vector<Eigen::VectorXd> restart_points(Eigen::Index d, int restarts) {
    std::vector<Eigen::VectorXd> starts;
    starts.reserve(static_cast<std::size_t>(restarts));
    starts.push_back(Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d)));
    for (int r = 1; r < restarts; ++r) {
        CounterRng rng(kRestartStreamKey, {static_cast<std::uint64_t>(r)});
        starts.push_back(random_simplex_point(d, rng));
    }
    return starts;
}

#ifndef NDEBUG
bool on_simplex(const Eigen::VectorXd& w) {
    return w.minCoeff() >= 0.0 && std::abs(w.sum() - 1.0) <= 1e-9;
}
#endif

struct PathResult {
    Eigen::VectorXd best_point;
    double best_value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// One projected-gradient-ascent run. The step is cfg.step_size divided by
/// the gradient norm at the phase's start point, fixed along the phase: the
/// objective is positively homogeneous in mu, so tying the step to the
/// gradient scale makes the trajectory invariant under mu -> c*mu and keeps
/// one step size usable across annualization scales.
///
/// A step that overshoots the local curvature orbits the maximum instead of
/// settling (the iterate keeps changing but the best value stops improving),
/// so when that stall is detected the run resumes from the best-visited
/// point with the step cut by 10, up to four levels, all within the single
/// max_iterations budget. Runs that settle at the first level never shrink.
template <typename Evaluate>
PathResult ascend(const Eigen::VectorXd& start, const Evaluate& evaluate,
                  const SolverConfig& cfg) {
    constexpr int kStepLevels = 4;
    constexpr int kStallWindow = 100;

    PathResult out;
    Eigen::VectorXd phi = project_to_simplex_vector(start);
    Eigen::VectorXd grad(phi.size());
    double value = 0.0;
    evaluate(phi, value, grad);
    out.best_point = phi;
    out.best_value = value;

    int remaining = cfg.max_iterations;
    double level_scale = 1.0;
    for (int level = 0; level < kStepLevels && remaining > 0; ++level, level_scale *= 0.1) {
        if (level > 0) {
            phi = out.best_point;
            evaluate(phi, value, grad);
        }
        const double step = level_scale * cfg.step_size / std::max(1e-10, grad.norm());
        int since_improvement = 0;
        out.converged = false;
        while (remaining > 0) {
            --remaining;
            ++out.iterations;
            const Eigen::VectorXd next = project_to_simplex_vector(phi + step * grad);
            assert(on_simplex(next));
            const double change = (next - phi).cwiseAbs().maxCoeff();
            phi = next;
            evaluate(phi, value, grad);
            if (value > out.best_value) {
                out.best_value = value;
                out.best_point = phi;
                since_improvement = 0;
            } else {
                ++since_improvement;
            }
            if (change < cfg.tolerance) {
                out.converged = true;
                break;
            }
            if (since_improvement >= kStallWindow) {
                break;
            }
        }
        if (out.converged) break;
    }
    return out;
}

template <typename Evaluate>
SolveResult solve_over_starts(const std::vector<Eigen::VectorXd>& starts,
                              const Evaluate& evaluate, const SolverConfig& cfg) {
    PathResult best;
    bool first = true;
    for (const Eigen::VectorXd& start : starts) {
        PathResult run = ascend(start, evaluate, cfg);
        if (first || run.best_value > best.best_value + kTieWindow) {
            best = std::move(run);
            first = false;
        }
    }
    return SolveResult{make_portfolio(best.best_point), best.best_value, best.iterations,
                       best.converged};
}

}  // namespace

Eigen::VectorXd project_to_simplex_vector(const Eigen::VectorXd& v) {
    const Eigen::Index d = v.size();
    if (d < 1) {
        throw DimensionMismatch("cannot project an empty vector");
    }
    if (!v.allFinite()) {
        throw NonFinite("projection input contains NaN or Inf");
    }
    std::vector<double> sorted(v.data(), v.data() + d);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double threshold = sorted[0] - 1.0;
    for (Eigen::Index k = 0; k < d; ++k) {
        cumulative += sorted[static_cast<std::size_t>(k)];
        const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) {
            threshold = candidate;
        } else {
            break;
        }
    }
    return (v.array() - threshold).max(0.0);
}

Portfolio project_to_simplex(const Eigen::VectorXd& v) {
    return make_portfolio(project_to_simplex_vector(v));
}

double sharpe_objective(const Eigen::VectorXd& phi, const MomentEstimate& m) {
    const double s = std::sqrt(phi.dot(m.sigma() * phi) + kVarianceEps);
    return m.mu().dot(phi) / s;
}

Eigen::VectorXd sharpe_gradient(const Eigen::VectorXd& phi, const MomentEstimate& m) {
    const Eigen::VectorXd sigma_phi = m.sigma() * phi;
    const double s = std::sqrt(phi.dot(sigma_phi) + kVarianceEps);
    return m.mu() / s - (m.mu().dot(phi) / (s * s * s)) * sigma_phi;
}

double transfer_objective(const Eigen::VectorXd& phi, const MomentEstimate& m,
                          const Eigen::VectorXd& pretrained, double lambda) {
    return sharpe_objective(phi, m) - lambda * (pretrained - phi).squaredNorm();
}

Eigen::VectorXd transfer_gradient(const Eigen::VectorXd& phi, const MomentEstimate& m,
                                  const Eigen::VectorXd& pretrained, double lambda) {
    return sharpe_gradient(phi, m) + 2.0 * lambda * (pretrained - phi);
}

SolveResult optimize_direct(const MomentEstimate& m, const SolverConfig& cfg) {
    validate_config(cfg);
    const auto evaluate = [&m](const Eigen::VectorXd& phi, double& value, Eigen::VectorXd& grad) {
        const Eigen::VectorXd sigma_phi = m.sigma() * phi;
        const double s = std::sqrt(phi.dot(sigma_phi) + kVarianceEps);
        const double mean = m.mu().dot(phi);
        value = mean / s;
        grad = m.mu() / s - (mean / (s * s * s)) * sigma_phi;
    };
    return solve_over_starts(restart_points(m.d(), cfg.restarts), evaluate, cfg);
}

SolveResult optimize_source(const MomentEstimate& source_m, const SolverConfig& cfg) {
    return optimize_direct(source_m, cfg);
}

SolveResult optimize_transfer(const MomentEstimate& target_m, const Portfolio& pretrained,
                              double lambda, const SolverConfig& cfg) {
    validate_config(cfg);
    if (pretrained.d() != target_m.d()) {
        throw DimensionMismatch("pretrained portfolio and target moments disagree on d");
    }
    if (lambda < 0.0) {
        throw NegativeLambda("lambda is " + std::to_string(lambda));
    }
    const Eigen::VectorXd anchor = pretrained.weights();
    const auto evaluate = [&](const Eigen::VectorXd& phi, double& value, Eigen::VectorXd& grad) {
        const Eigen::VectorXd sigma_phi = target_m.sigma() * phi;
        const double s = std::sqrt(phi.dot(sigma_phi) + kVarianceEps);
        const double mean = target_m.mu().dot(phi);
        const Eigen::VectorXd pull = anchor - phi;
        value = mean / s - lambda * pull.squaredNorm();
        grad = target_m.mu() / s - (mean / (s * s * s)) * sigma_phi + (2.0 * lambda) * pull;
    };
    // The anchor goes last so that, on ties, the shared starts win and a
    // lambda of zero reproduces the direct solve bit for bit.
    std::vector<Eigen::VectorXd> starts = restart_points(target_m.d(), cfg.restarts);
    starts.push_back(anchor);
    return solve_over_starts(starts, evaluate, cfg);
}

std::pair<Portfolio, double> brute_force_oracle(
    const std::function<double(const Eigen::VectorXd&)>& objective, int d, double grid_step) {
    if (d < 1 || d > 3) {
        throw UnsupportedDimension("brute force oracle supports d in {1, 2, 3}, got " +
                                   std::to_string(d));
    }
    if (grid_step <= 0.0 || grid_step > 1e-2) {
        throw std::invalid_argument("grid_step must be in (0, 1e-2]");
    }
    const long n = std::lround(1.0 / grid_step);
    Eigen::VectorXd best(d);
    double best_value = 0.0;
    bool first = true;
    Eigen::VectorXd point(d);
    const auto consider = [&](const Eigen::VectorXd& p) {
        const double value = objective(p);
        if (first || value > best_value) {
            best = p;
            best_value = value;
            first = false;
        }
    };
    if (d == 1) {
        point[0] = 1.0;
        consider(point);
    } else if (d == 2) {
        for (long i = 0; i <= n; ++i) {
            point[0] = static_cast<double>(i) / static_cast<double>(n);
            point[1] = 1.0 - point[0];
            consider(point);
        }
    } else {
        for (long i = 0; i <= n; ++i) {
            for (long j = 0; j <= n - i; ++j) {
                point[0] = static_cast<double>(i) / static_cast<double>(n);
                point[1] = static_cast<double>(j) / static_cast<double>(n);
                point[2] = 1.0 - point[0] - point[1];
                consider(point);
            }
        }
    }
    // Lattice arithmetic can leave the last coordinate a hair below zero.
    return {project_to_simplex(best), best_value};
}

}  // namespace xferfolio
