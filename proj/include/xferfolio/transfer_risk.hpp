#pragma once

#include <utility>

#include "xferfolio/types.hpp"

namespace xferfolio {

/// Inverse Sharpe ratio of the source portfolio under source moments. A
/// source whose Sharpe does not clear the 1e-6 positivity floor is flagged
/// degenerate and capped at 1e6 instead of erroring, so a sweep over random
/// source universes keeps running; the flag lets analysis exclude or inspect
/// those draws. Returns (r1, degenerate).
std::pair<double, bool> r1_inverse_sharpe(const Portfolio& source_phi,
                                          const MomentEstimate& source_m);

/// Wasserstein-2 distance between the Gaussians N(mu_s, sigma_s) and
/// N(mu_t, sigma_t):
///
///   sqrt( ||mu_s - mu_t||^2
///         + tr(sigma_s + sigma_t - 2 (sigma_t^1/2 sigma_s sigma_t^1/2)^1/2) )
///
/// Matrix square roots go through symmetric eigendecomposition with negative
/// eigenvalues clamped; the trace term is clamped at zero before the outer
/// sqrt to absorb roundoff.
double gaussian_w2(const MomentEstimate& m_s, const MomentEstimate& m_t);

/// Optional knobs for sensitivity studies. Defaults reproduce the plain
/// unweighted sum r1 + r2.
struct TransferRiskOptions {
    double r2_weight = 1.0;
};

/// Assembles the full report: r1 from the source portfolio and moments, r2
/// between source and target moments, r_trans their (optionally weighted) sum.
TransferRiskReport transfer_risk(const Portfolio& source_phi, const MomentEstimate& source_m,
                                 const MomentEstimate& target_m,
                                 const TransferRiskOptions& options = {});

}  // namespace xferfolio
