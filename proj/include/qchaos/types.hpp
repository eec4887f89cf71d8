#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qchaos {

using cplx = std::complex<double>;
using Index = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct LeakageError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};

// A is the leading tensor factor, B the trailing one.
struct SubsystemSplit {
  Index dimA = 1;
  Index dimB = 1;
  Index dim() const { return dimA * dimB; }
};

enum class Side { A, B };

struct Estimate {
  double mean = 0.0;
  double err = 0.0;
};

inline Index ipow(Index base, int e) {
  Index r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace qchaos
