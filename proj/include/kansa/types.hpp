#pragma once

#include <Eigen/Dense>
#include <vector>

namespace kansa {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Row-major so that each point (row) is contiguous and binds to PointRef.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;

// Exponent per coordinate axis; |alpha|_1 is the derivative order.
using MultiIndex = std::vector<int>;

int order(const MultiIndex& alpha);

// All multi-indices in d variables with total order <= max_order, graded
// by order and then lexicographically descending in the leading axis.
std::vector<MultiIndex> multi_indices_up_to(int d, int max_order);

}  // namespace kansa
