#include "xferfolio/types.hpp"

#include <cmath>
#include <utility>

#include "xferfolio/errors.hpp"

namespace xferfolio {

namespace {
constexpr double kSimplexTolerance = 1e-9;
constexpr double kWeightRoundoff = 1e-12;
constexpr double kVarianceFloor = 1e-18;
constexpr double kPsdTolerance = 1e-10;
}  // namespace

ReturnSeries::ReturnSeries(std::vector<std::string> asset_ids, std::vector<std::int64_t> timestamps,
                           Eigen::MatrixXd values, Frequency frequency,
                           std::vector<Eigen::Index> session_boundaries)
    : asset_ids_(std::move(asset_ids)),
      timestamps_(std::move(timestamps)),
      values_(std::move(values)),
      frequency_(frequency),
      session_boundaries_(std::move(session_boundaries)) {
    const Eigen::Index t = values_.rows();
    const Eigen::Index d = values_.cols();
    if (d < 1 || static_cast<Eigen::Index>(asset_ids_.size()) != d) {
        throw DimensionMismatch("asset id count does not match value columns");
    }
    if (static_cast<Eigen::Index>(timestamps_.size()) != t) {
        throw DimensionMismatch("timestamp count does not match value rows");
    }
    if (!values_.allFinite()) {
        throw NonFinite("return series contains non-finite values");
    }
    for (std::size_t i = 1; i < timestamps_.size(); ++i) {
        if (timestamps_[i] <= timestamps_[i - 1]) {
            throw NonMonotoneTimestamps("timestamps must be strictly increasing at row " +
                                        std::to_string(i));
        }
    }
    for (Eigen::Index idx : session_boundaries_) {
        if (idx < 0 || idx >= t) {
            throw DimensionMismatch("session boundary index out of range");
        }
    }
}

MomentEstimate::MomentEstimate(Eigen::VectorXd mu, Eigen::MatrixXd sigma, Eigen::Index sample_count)
    : mu_(std::move(mu)), sigma_(std::move(sigma)), sample_count_(sample_count) {
    const Eigen::Index d = mu_.size();
    if (d < 1 || sigma_.rows() != d || sigma_.cols() != d) {
        throw DimensionMismatch("mu and sigma dimensions disagree");
    }
    if (!mu_.allFinite() || !sigma_.allFinite()) {
        throw NonFinite("moment estimate contains non-finite values");
    }
    sigma_ = ((sigma_ + sigma_.transpose()) * 0.5).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma_);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -kPsdTolerance) {
        throw NotPSD("covariance has eigenvalue " + std::to_string(min_eig));
    }
    if (min_eig < 0.0) {
        Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
        sigma_ = eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
        sigma_ = ((sigma_ + sigma_.transpose()) * 0.5).eval();
    }
}

Portfolio make_portfolio(const Eigen::VectorXd& weights) {
    if (weights.size() < 1) {
        throw DimensionMismatch("portfolio needs at least one asset");
    }
    if (!weights.allFinite()) {
        throw NonFinite("portfolio weights contain NaN or Inf");
    }
    Eigen::VectorXd w = weights;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] < -kWeightRoundoff) {
            throw NegativeWeight("weight " + std::to_string(i) + " is " + std::to_string(w[i]));
        }
        if (w[i] < 0.0) w[i] = 0.0;
    }
    const double sum = w.sum();
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
        throw NotNormalized("weights sum to " + std::to_string(sum));
    }
    return Portfolio(std::move(w));
}

double portfolio_sharpe(const Portfolio& phi, const MomentEstimate& m) {
    if (phi.d() != m.d()) {
        throw DimensionMismatch("portfolio and moments have different asset counts");
    }
    const Eigen::VectorXd& w = phi.weights();
    const double variance = w.dot(m.sigma() * w);
    if (variance <= kVarianceFloor) {
        throw ZeroVariance("portfolio variance is " + std::to_string(variance));
    }
    return m.mu().dot(w) / std::sqrt(variance);
}

}  // namespace xferfolio
