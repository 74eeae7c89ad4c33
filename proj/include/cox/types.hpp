#pragma once

#include <Eigen/Dense>

namespace cox {

template <class Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorT<double>;
using Matrix = MatrixT<double>;
using IntVector = Eigen::VectorXi;
using Index = Eigen::Index;

}  // namespace cox
