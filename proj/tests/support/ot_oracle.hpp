#pragma once

#include <cstdint>

#include "xferfolio/types.hpp"

namespace xferfolio::testsupport {

/// Independent route to the Gaussian W2 distance: draw n samples from each
/// distribution and solve the discrete optimal transport problem exactly.
/// With equal uniform weights the optimal coupling is an assignment, so the
/// value is sqrt(min-cost matching / n) under squared Euclidean cost.
double empirical_gaussian_w2(const MomentEstimate& a, const MomentEstimate& b, int n,
                             std::uint64_t seed);

}  // namespace xferfolio::testsupport
