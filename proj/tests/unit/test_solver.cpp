#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "builders.hpp"
#include "xferfolio/errors.hpp"
#include "xferfolio/rng.hpp"
#include "xferfolio/solver.hpp"

using namespace xferfolio;
using testsupport::random_moments;
using testsupport::random_simplex;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::VectorXd vec3(double a, double b, double c) {
    Eigen::VectorXd v(3);
    v << a, b, c;
    return v;
}

double inf_norm_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("simplex projection closed cases") {
    CHECK(inf_norm_diff(project_to_simplex(vec2(0.3, 0.7)).weights(), vec2(0.3, 0.7)) < 1e-15);
    CHECK(inf_norm_diff(project_to_simplex(vec2(2.0, 0.0)).weights(), vec2(1.0, 0.0)) < 1e-15);
    CHECK(inf_norm_diff(project_to_simplex(vec3(0.5, 0.5, 0.5)).weights(),
                        vec3(1.0 / 3, 1.0 / 3, 1.0 / 3)) < 1e-15);
    CHECK_THROWS_AS(project_to_simplex(vec2(std::nan(""), 0.0)), NonFinite);
}

TEST_CASE("simplex projection minimizes distance against the grid oracle") {
    CounterRng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = trial % 2 == 0 ? 2 : 3;
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = 4.0 * rng.gaussian();
        const Eigen::VectorXd projected = project_to_simplex_vector(v);

        const auto neg_dist = [&v](const Eigen::VectorXd& p) { return -(p - v).squaredNorm(); };
        const double step = d == 2 ? 1e-4 : 1e-3;
        const auto [oracle_point, oracle_value] = brute_force_oracle(neg_dist, d, step);
        // The oracle lattice is off the true minimizer by at most its step.
        CHECK(-(projected - v).squaredNorm() >= oracle_value - 1e-9);
        CHECK(inf_norm_diff(projected, oracle_point.weights()) < 2.0 * step);

        // Idempotent, and feasible to machine precision.
        CHECK(inf_norm_diff(project_to_simplex_vector(projected), projected) < 1e-15);
        CHECK(projected.minCoeff() >= 0.0);
        CHECK(std::abs(projected.sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("direct solve: symmetric instance lands on the uniform portfolio") {
    const MomentEstimate m(vec2(0.1, 0.1), Eigen::MatrixXd::Identity(2, 2));
    const SolveResult res = optimize_direct(m);
    CHECK(res.converged);
    CHECK(inf_norm_diff(res.portfolio.weights(), vec2(0.5, 0.5)) < 1e-7);
}

TEST_CASE("direct solve: closed-form two-asset optimum") {
    const MomentEstimate m(vec2(0.2, 0.1), Eigen::MatrixXd::Identity(2, 2));
    const SolveResult res = optimize_direct(m);
    CHECK(res.converged);
    CHECK(inf_norm_diff(res.portfolio.weights(), vec2(2.0 / 3.0, 1.0 / 3.0)) < 1e-4);
    CHECK(portfolio_sharpe(res.portfolio, m) ==
          doctest::Approx(0.22360679774997896).epsilon(1e-5));
    // The reported objective is the objective at the reported portfolio.
    CHECK(res.objective_value ==
          doctest::Approx(sharpe_objective(res.portfolio.weights(), m)).epsilon(1e-10));
}

TEST_CASE("direct solve: three assets against the brute-force grid") {
    const MomentEstimate m(vec3(0.3, 0.1, 0.1), 0.04 * Eigen::MatrixXd::Identity(3, 3));
    const SolveResult res = optimize_direct(m);
    const auto sharpe = [&m](const Eigen::VectorXd& p) { return sharpe_objective(p, m); };
    const auto [oracle_point, oracle_value] = brute_force_oracle(sharpe, 3, 1e-3);
    CHECK(res.objective_value >= oracle_value - 1e-3);
    CHECK(inf_norm_diff(res.portfolio.weights(), oracle_point.weights()) < 5e-3);
}

TEST_CASE("oracle agreement over random instances") {
    CounterRng rng(32);
    for (int trial = 0; trial < 20; ++trial) {
        const int d = trial % 2 == 0 ? 2 : 3;
        const MomentEstimate m = random_moments(d, rng);
        const SolveResult res = optimize_direct(m);
        const auto sharpe = [&m](const Eigen::VectorXd& p) { return sharpe_objective(p, m); };
        const auto [_, oracle_value] = brute_force_oracle(sharpe, d, 1e-3);
        CHECK(res.objective_value >= oracle_value - 1e-3);
    }
}

TEST_CASE("source solve delegates to the same objective") {
    CounterRng rng(33);
    const MomentEstimate m = random_moments(4, rng);
    const SolveResult direct = optimize_direct(m);
    const SolveResult source = optimize_source(m);
    CHECK(inf_norm_diff(direct.portfolio.weights(), source.portfolio.weights()) == 0.0);
    CHECK(direct.objective_value == source.objective_value);

    Eigen::VectorXd one(1);
    one << 0.15;
    const SolveResult singleton = optimize_source(MomentEstimate(one, 0.04 * Eigen::MatrixXd::Identity(1, 1)));
    CHECK(singleton.portfolio.weights()[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("argmax is invariant to positive scaling of mu") {
    CounterRng rng(34);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + static_cast<int>(rng.below(4));
        const MomentEstimate m = random_moments(d, rng);
        const SolveResult base = optimize_direct(m);
        for (double c : {0.5, 2.0}) {
            const MomentEstimate scaled(c * m.mu(), m.sigma());
            const SolveResult res = optimize_direct(scaled);
            CHECK(inf_norm_diff(res.portfolio.weights(), base.portfolio.weights()) < 1e-6);
        }
    }
}

TEST_CASE("gradients match central finite differences") {
    CounterRng rng(35);
    const double h = 1e-6;
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 2 + static_cast<int>(rng.below(5));
        const MomentEstimate m = random_moments(d, rng);
        const Eigen::VectorXd phi = random_simplex(d, rng);
        const Eigen::VectorXd anchor = random_simplex(d, rng);
        const double lambda = 2.0 * rng.uniform();

        const Eigen::VectorXd g_sharpe = sharpe_gradient(phi, m);
        const Eigen::VectorXd g_transfer = transfer_gradient(phi, m, anchor, lambda);
        Eigen::VectorXd fd_sharpe(d), fd_transfer(d);
        for (int i = 0; i < d; ++i) {
            Eigen::VectorXd up = phi, down = phi;
            up[i] += h;
            down[i] -= h;
            fd_sharpe[i] = (sharpe_objective(up, m) - sharpe_objective(down, m)) / (2.0 * h);
            fd_transfer[i] = (transfer_objective(up, m, anchor, lambda) -
                              transfer_objective(down, m, anchor, lambda)) /
                             (2.0 * h);
        }
        CHECK((g_sharpe - fd_sharpe).norm() <= 1e-5 * std::max(1e-8, g_sharpe.norm()));
        CHECK((g_transfer - fd_transfer).norm() <= 1e-5 * std::max(1e-8, g_transfer.norm()));
    }
}

TEST_CASE("transfer solve with lambda zero reproduces direct learning") {
    CounterRng rng(36);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + static_cast<int>(rng.below(5));
        const MomentEstimate m = random_moments(d, rng);
        const Portfolio anchor = make_portfolio(random_simplex(d, rng));
        const SolveResult direct = optimize_direct(m);
        const SolveResult transfer = optimize_transfer(m, anchor, 0.0);
        CHECK(inf_norm_diff(transfer.portfolio.weights(), direct.portfolio.weights()) < 1e-6);
    }
}

TEST_CASE("transfer solve with a dominating penalty returns the anchor") {
    CounterRng rng(37);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + static_cast<int>(rng.below(5));
        const MomentEstimate m = random_moments(d, rng);
        const Portfolio anchor = make_portfolio(random_simplex(d, rng));
        const SolveResult res = optimize_transfer(m, anchor, 1e6);
        CHECK(inf_norm_diff(res.portfolio.weights(), anchor.weights()) <= 1e-3);
    }
}

TEST_CASE("transfer solve matches the one-dimensional grid oracle") {
    const MomentEstimate m(vec2(0.1, 0.2), Eigen::MatrixXd::Identity(2, 2));
    const Portfolio anchor = make_portfolio(vec2(1.0, 0.0));
    const double lambda = 0.2;

    double best_t = 0.0;
    double best_value = -1e300;
    const long n = 100000;
    for (long k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(n);
        const double value =
            transfer_objective(vec2(t, 1.0 - t), m, anchor.weights(), lambda);
        if (value > best_value) {
            best_value = value;
            best_t = t;
        }
    }

    const SolveResult res = optimize_transfer(m, anchor, lambda);
    CHECK(std::abs(res.portfolio.weights()[0] - best_t) < 1e-3);
    CHECK(std::abs(res.objective_value - best_value) < 1e-3);
    CHECK(res.objective_value + 1e-9 >= best_value - 1e-3);
}

TEST_CASE("transfer solve rejects bad arguments") {
    const MomentEstimate m(vec2(0.1, 0.2), Eigen::MatrixXd::Identity(2, 2));
    const Portfolio anchor = make_portfolio(vec2(0.5, 0.5));
    CHECK_THROWS_AS(optimize_transfer(m, anchor, -0.1), NegativeLambda);

    Eigen::VectorXd mu3 = Eigen::VectorXd::Constant(3, 0.1);
    const MomentEstimate m3(mu3, Eigen::MatrixXd::Identity(3, 3));
    CHECK_THROWS_AS(optimize_transfer(m3, anchor, 0.2), DimensionMismatch);
}

TEST_CASE("brute force oracle contract") {
    const auto constant = [](const Eigen::VectorXd&) { return 7.5; };
    const auto [point, value] = brute_force_oracle(constant, 2, 1e-2);
    CHECK(value == 7.5);
    CHECK(point.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(brute_force_oracle(constant, 4, 1e-3), UnsupportedDimension);
    CHECK_THROWS_AS(brute_force_oracle(constant, 2, 0.5), std::invalid_argument);

    const MomentEstimate m(vec2(0.2, 0.1), Eigen::MatrixXd::Identity(2, 2));
    const auto sharpe = [&m](const Eigen::VectorXd& p) { return sharpe_objective(p, m); };
    const auto [best, sharpe_value] = brute_force_oracle(sharpe, 2, 1e-4);
    CHECK(best.weights()[0] == doctest::Approx(2.0 / 3.0).epsilon(2e-4));
    CHECK(sharpe_value == doctest::Approx(0.22360679774997896).epsilon(1e-6));
}
