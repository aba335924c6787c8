#include "xferfolio/moments.hpp"

#include <string>
#include <vector>

#include "xferfolio/errors.hpp"

namespace xferfolio {

namespace {
constexpr double kSymmetryTolerance = 1e-8;
}

Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& sigma) {
    if (sigma.rows() != sigma.cols()) {
        throw DimensionMismatch("psd_repair needs a square matrix");
    }
    const double asymmetry = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry > kSymmetryTolerance) {
        throw NotSymmetric("asymmetry " + std::to_string(asymmetry) + " exceeds tolerance");
    }
    const Eigen::MatrixXd sym = (sigma + sigma.transpose()) * 0.5;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.eigenvalues().minCoeff() >= 0.0) {
        return sym;
    }
    Eigen::VectorXd clamped = eig.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXd repaired =
        eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
    return (repaired + repaired.transpose()) * 0.5;
}

MomentEstimate estimate_moments(const ReturnSeries& series, bool exclude_overnight) {
    const Eigen::Index t = series.rows();
    const Eigen::Index d = series.asset_count();

    std::vector<bool> drop(static_cast<std::size_t>(t), false);
    if (exclude_overnight && series.frequency().is_intraday()) {
        for (Eigen::Index idx : series.session_boundaries()) {
            drop[static_cast<std::size_t>(idx)] = true;
        }
    }

    Eigen::Index usable = 0;
    for (Eigen::Index i = 0; i < t; ++i) {
        if (!drop[static_cast<std::size_t>(i)]) ++usable;
    }
    if (usable < d + 2) {
        throw InsufficientData("need at least " + std::to_string(d + 2) + " rows, have " +
                               std::to_string(usable));
    }

    Eigen::MatrixXd rows(usable, d);
    Eigen::Index out = 0;
    for (Eigen::Index i = 0; i < t; ++i) {
        if (!drop[static_cast<std::size_t>(i)]) {
            rows.row(out++) = series.values().row(i);
        }
    }
    if (!rows.allFinite()) {
        throw NonFinite("return rows contain non-finite values");
    }

    const double annualization = series.frequency().periods_per_year();
    const Eigen::RowVectorXd mean = rows.colwise().mean();
    const Eigen::MatrixXd centered = rows.rowwise() - mean;
    Eigen::MatrixXd cov =
        (centered.transpose() * centered) / static_cast<double>(usable - 1);

    Eigen::VectorXd mu_annual = mean.transpose() * annualization;
    Eigen::MatrixXd sigma_annual = psd_repair(cov * annualization);
    return MomentEstimate(std::move(mu_annual), std::move(sigma_annual), usable);
}

}  // namespace xferfolio
