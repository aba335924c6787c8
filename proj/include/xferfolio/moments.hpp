#pragma once

#include <Eigen/Dense>

#include "xferfolio/types.hpp"

namespace xferfolio {

/// Sample mean and unbiased (n-1 divisor) sample covariance of the per-period
/// returns, annualized by 252 x bars-per-day. When exclude_overnight is set
/// and the series is intraday, the rows at session boundaries (the bar that
/// spans the prior close to the open) are dropped before estimation, so that
/// the moments describe an intraday-only book.
///
/// Requires at least d + 2 usable rows. The covariance is symmetrized and
/// PSD-repaired before the estimate is returned.
MomentEstimate estimate_moments(const ReturnSeries& series, bool exclude_overnight);

/// Clamps negative eigenvalues of a symmetric matrix to zero and
/// reconstructs. Idempotent. Throws NotSymmetric when the input's asymmetry
/// exceeds 1e-8.
Eigen::MatrixXd psd_repair(const Eigen::MatrixXd& sigma);

}  // namespace xferfolio
