#pragma once

#include <complex>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace nsa {

using Cplx = std::complex<double>;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using SpCMat = Eigen::SparseMatrix<Cplx>;
using Index = Eigen::Index;

inline constexpr Cplx kImagUnit{0.0, 1.0};

}  // namespace nsa
