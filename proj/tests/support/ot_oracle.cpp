#include "ot_oracle.hpp"

#include <cmath>
#include <vector>

#include "builders.hpp"
#include "lapjv.hpp"
#include "xferfolio/rng.hpp"

namespace xferfolio::testsupport {

double empirical_gaussian_w2(const MomentEstimate& a, const MomentEstimate& b, int n,
                             std::uint64_t seed) {
    CounterRng rng_a(seed, {0x4F545F41ull});
    CounterRng rng_b(seed, {0x4F545F42ull});
    const Eigen::MatrixXd xs = gaussian_samples(a.mu(), a.sigma(), n, rng_a);
    const Eigen::MatrixXd ys = gaussian_samples(b.mu(), b.sigma(), n, rng_b);

    Eigen::MatrixXd cost(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            cost(i, j) = (xs.row(i) - ys.row(j)).squaredNorm();
        }
    }
    std::vector<int> assignment;
    const double total = solve_assignment(cost, assignment);
    return std::sqrt(total / static_cast<double>(n));
}

}  // namespace xferfolio::testsupport
