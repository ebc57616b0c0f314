#pragma once

// Dense reference implementations used to check the matrix-free code.

#include <Eigen/Dense>

#include "iagan/operators.hpp"
#include "iagan/tensor.hpp"

namespace oracle {

inline Eigen::MatrixXd dense(const iagan::LinearOperator& op) {
  Eigen::MatrixXd a(op.rows(), op.cols());
  iagan::Tensor e({op.cols()});
  for (std::size_t j = 0; j < op.cols(); ++j) {
    e.fill(0.0);
    e[j] = 1.0;
    const iagan::Tensor col = op.apply(e);
    for (std::size_t i = 0; i < op.rows(); ++i) a(i, j) = col[i];
  }
  return a;
}

inline Eigen::VectorXd vec(const iagan::Tensor& t) {
  return Eigen::Map<const Eigen::VectorXd>(t.data().data(), static_cast<Eigen::Index>(t.size()));
}

inline iagan::Tensor tensor(const Eigen::VectorXd& v) {
  return iagan::Tensor::vector(std::vector<double>(v.data(), v.data() + v.size()));
}

inline double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max(b.norm(), 1e-300);
  return (a - b).norm() / scale;
}

// A^T (A A^T)^{-1} r by dense LU
inline Eigen::VectorXd pinv_apply(const Eigen::MatrixXd& a, const Eigen::VectorXd& r) {
  return a.transpose() * (a * a.transpose()).partialPivLu().solve(r);
}

}  // namespace oracle
