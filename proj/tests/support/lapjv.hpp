#pragma once

#include <Eigen/Dense>
#include <vector>

namespace xferfolio::testsupport {

/// Exact minimum-cost perfect matching on a dense square cost matrix via
/// shortest augmenting paths with dual variables. O(n^3) worst case, fast in
/// practice for the sample sizes the tests use. Fills row_to_col with the
/// optimal assignment and returns the total cost.
double solve_assignment(const Eigen::MatrixXd& cost, std::vector<int>& row_to_col);

}  // namespace xferfolio::testsupport
