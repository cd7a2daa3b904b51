#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace lyhlab {

using Complex = std::complex<double>;
using ComplexArray = std::vector<Complex>;

/// Matrices and vectors of at most complex dimension two live on the stack.
inline constexpr int kMaxComplexDimension = 2;

using SmallMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxComplexDimension,
                  kMaxComplexDimension>;
using SmallVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, kMaxComplexDimension, 1>;

/// Chart coordinates (z^1, ..., z^n) of a point.
using ChartPoint = SmallVector;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace lyhlab
