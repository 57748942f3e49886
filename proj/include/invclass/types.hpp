#pragma once

#include <Eigen/Dense>

namespace invclass {

using Vector = Eigen::VectorXd;
// Weights are stored one class per row so a row is contiguous in memory.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;

// Class indices are 0-based throughout the library; the CLI converts.
using ClassIndex = int;

}  // namespace invclass
