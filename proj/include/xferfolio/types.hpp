#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "xferfolio/frequency.hpp"

namespace xferfolio {

/// Timestamped per-asset simple-return matrix. Immutable once constructed;
/// every estimation input in the library is one of these.
class ReturnSeries {
public:
    /// Validates shape, finiteness, strictly increasing timestamps, and that
    /// every session boundary index is in range.
    ReturnSeries(std::vector<std::string> asset_ids, std::vector<std::int64_t> timestamps,
                 Eigen::MatrixXd values, Frequency frequency,
                 std::vector<Eigen::Index> session_boundaries);

    const std::vector<std::string>& asset_ids() const { return asset_ids_; }
    const std::vector<std::int64_t>& timestamps() const { return timestamps_; }
    const Eigen::MatrixXd& values() const { return values_; }
    Frequency frequency() const { return frequency_; }
    const std::vector<Eigen::Index>& session_boundaries() const { return session_boundaries_; }

    Eigen::Index rows() const { return values_.rows(); }
    Eigen::Index asset_count() const { return values_.cols(); }

private:
    std::vector<std::string> asset_ids_;
    std::vector<std::int64_t> timestamps_;
    Eigen::MatrixXd values_;
    Frequency frequency_;
    std::vector<Eigen::Index> session_boundaries_;
};

/// Annualized mean vector and covariance matrix of an asset universe. The
/// covariance is symmetrized on construction and must be positive
/// semidefinite up to a -1e-10 eigenvalue tolerance; anything inside the
/// tolerance is clamped so that downstream square roots are well defined.
class MomentEstimate {
public:
    MomentEstimate(Eigen::VectorXd mu, Eigen::MatrixXd sigma, Eigen::Index sample_count = 0);

    const Eigen::VectorXd& mu() const { return mu_; }
    const Eigen::MatrixXd& sigma() const { return sigma_; }
    Eigen::Index d() const { return mu_.size(); }
    Eigen::Index sample_count() const { return sample_count_; }

private:
    Eigen::VectorXd mu_;
    Eigen::MatrixXd sigma_;
    Eigen::Index sample_count_;
};

/// Nonnegative weights on the unit simplex. Construct through make_portfolio,
/// which validates instead of silently renormalizing.
class Portfolio {
public:
    const Eigen::VectorXd& weights() const { return weights_; }
    Eigen::Index d() const { return weights_.size(); }

private:
    friend Portfolio make_portfolio(const Eigen::VectorXd& weights);
    explicit Portfolio(Eigen::VectorXd weights) : weights_(std::move(weights)) {}
    Eigen::VectorXd weights_;
};

/// Transfer-risk decomposition: r1 is the inverse source Sharpe ("quality"),
/// r2 the Gaussian Wasserstein-2 distance between source and target return
/// distributions ("relevance"), and r_trans their sum.
struct TransferRiskReport {
    double r1 = 0.0;
    double r2 = 0.0;
    double r_trans = 0.0;
    double source_sharpe = 0.0;
    bool degenerate_source = false;
};

/// Validates weights into a Portfolio. Entries in [-1e-12, 0) are treated as
/// roundoff and clamped to zero; anything more negative is an error, as is a
/// weight sum farther than 1e-9 from one.
Portfolio make_portfolio(const Eigen::VectorXd& weights);

/// Annualized Sharpe ratio mu'phi / sqrt(phi' sigma phi) with the risk-free
/// rate fixed at zero. Throws ZeroVariance when the portfolio variance is at
/// or below 1e-18.
double portfolio_sharpe(const Portfolio& phi, const MomentEstimate& m);

}  // namespace xferfolio
