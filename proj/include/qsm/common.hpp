#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace qsm {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

// Numerical constants shared by every module. One support cutoff is used
// everywhere (Schmidt rank, support projectors, generalized inverses) so that
// rank decisions stay mutually consistent.
inline constexpr double kSupportCutoff = 1e-10;  // relative to largest eigenvalue
inline constexpr double kHermTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kNormTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kProbFloor = 1e-12;  // measurement outcomes below this carry zero weight

struct LayoutError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double log2_safe(double x) { return std::log2(x); }

// (M + M^dagger)/2. Applied after conjugation-style updates to stop
// round-off from drifting operators away from the Hermitian manifold.
inline Mat hermitize(const Mat& m) { return 0.5 * (m + m.adjoint()); }

inline double herm_deviation(const Mat& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace qsm
