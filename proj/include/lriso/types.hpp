#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace lriso {

using Index = std::int64_t;

// Observations and per-point features are stored one row per point so that
// distance kernels can stream contiguous rows.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using IndexList = std::vector<Index>;
using LabelVector = std::vector<int>;

}  // namespace lriso
