#pragma once

#include <Eigen/Dense>
#include <complex>

namespace semiclassic {

using Real = double;
using Complex = std::complex<double>;

using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;

inline constexpr Real kPi = 3.141592653589793238462643383279502884;
inline constexpr Complex kI{0.0, 1.0};

} // namespace semiclassic
