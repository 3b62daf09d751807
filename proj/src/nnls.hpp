#pragma once

#include <Eigen/Dense>

namespace coopstab::detail {

/// min |A x - b| subject to x >= 0 (Lawson-Hanson active set). Columns are
/// normalized internally.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations = 200);

}  // namespace coopstab::detail
