#include "xferfolio/transfer_risk.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "xferfolio/errors.hpp"

namespace xferfolio {

namespace {

constexpr double kSharpeFloor = 1e-6;
constexpr double kDegenerateCap = 1e6;

// Symmetric PSD square root; tiny negative eigenvalues are clamped, genuine
// ones are an error.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& sigma, const char* which) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
    const double max_eig = eig.eigenvalues().cwiseAbs().maxCoeff();
    const double tolerance = 1e-8 * std::max(1.0, max_eig);
    if (eig.eigenvalues().minCoeff() < -tolerance) {
        throw NotPSD(std::string(which) + " covariance fails the PSD tolerance");
    }
    Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

std::pair<double, bool> r1_inverse_sharpe(const Portfolio& source_phi,
                                          const MomentEstimate& source_m) {
    const double sharpe = portfolio_sharpe(source_phi, source_m);
    if (sharpe > kSharpeFloor) {
        return {1.0 / sharpe, false};
    }
    return {kDegenerateCap, true};
}

double gaussian_w2(const MomentEstimate& m_s, const MomentEstimate& m_t) {
    if (m_s.d() != m_t.d()) {
        throw DimensionMismatch("moment estimates have different asset counts");
    }
    // The Bures term tr(S + T - 2 (T^1/2 S T^1/2)^1/2) equals
    // || S^1/2 - U V' T^1/2 ||_F^2 with U, V from the SVD of S^1/2 T^1/2
    // (the orthogonal factor aligning the two square roots). The squared-norm
    // form is evaluated as a sum of squares, so it cannot go negative and
    // identical inputs give exactly zero instead of cancellation noise.
    const Eigen::MatrixXd root_s = psd_sqrt(m_s.sigma(), "source");
    const Eigen::MatrixXd root_t = psd_sqrt(m_t.sigma(), "target");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(root_s * root_t,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::MatrixXd aligned = svd.matrixU() * svd.matrixV().transpose() * root_t;
    const double bures_sq = (root_s - aligned).squaredNorm();

    const double mean_term = (m_s.mu() - m_t.mu()).squaredNorm();
    return std::sqrt(mean_term + bures_sq);
}

TransferRiskReport transfer_risk(const Portfolio& source_phi, const MomentEstimate& source_m,
                                 const MomentEstimate& target_m,
                                 const TransferRiskOptions& options) {
    TransferRiskReport report;
    const double sharpe = portfolio_sharpe(source_phi, source_m);
    report.source_sharpe = sharpe;
    if (sharpe > kSharpeFloor) {
        report.r1 = 1.0 / sharpe;
        report.degenerate_source = false;
    } else {
        report.r1 = kDegenerateCap;
        report.degenerate_source = true;
    }
    report.r2 = options.r2_weight * gaussian_w2(source_m, target_m);
    report.r_trans = report.r1 + report.r2;
    return report;
}

}  // namespace xferfolio
