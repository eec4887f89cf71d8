#pragma once

#include <cmath>
#include <vector>

#include "types.hpp"

namespace qchaos {

// Spin J stored as twoJ. Single-spin index i = J - m, so i = 0 is m = +J.
struct Spin {
  int twoJ = 1;
  double J() const { return twoJ / 2.0; }
  Index dim() const { return twoJ + 1; }
  double m(Index i) const { return J() - static_cast<double>(i); }
};

inline Spin spin_from_double(double J) {
  const int twoJ = static_cast<int>(std::lround(2.0 * J));
  if (twoJ < 1 || std::abs(twoJ - 2.0 * J) > 1e-9) throw DomainError("spin must be a positive half-integer");
  return Spin{twoJ};
}

// Two equal spins: product index i1 * dim + i2, total Fz = m1 + m2 = 2J - i1 - i2.
inline int product_fz(const Spin& s, Index idx) {
  const Index i1 = idx / s.dim(), i2 = idx % s.dim();
  return s.twoJ - static_cast<int>(i1 + i2);
}

// Product indices of the Fz sector ordered by increasing i1 (decreasing m1).
inline std::vector<Index> sector_indices(const Spin& s, int fz) {
  std::vector<Index> out;
  const Index d = s.dim();
  for (Index i1 = 0; i1 < d; ++i1) {
    const Index i2 = s.twoJ - fz - i1;
    if (i2 >= 0 && i2 < d) out.push_back(i1 * d + i2);
  }
  return out;
}

inline ComplexMatrix spin_z(const Spin& s) {
  ComplexMatrix m = ComplexMatrix::Zero(s.dim(), s.dim());
  for (Index i = 0; i < s.dim(); ++i) m(i, i) = s.m(i);
  return m;
}

inline ComplexMatrix spin_plus(const Spin& s) {
  ComplexMatrix m = ComplexMatrix::Zero(s.dim(), s.dim());
  const double J = s.J();
  for (Index i = 1; i < s.dim(); ++i) {
    const double mm = s.m(i);
    m(i - 1, i) = std::sqrt((J - mm) * (J + mm + 1.0));
  }
  return m;
}

inline ComplexMatrix spin_x(const Spin& s) {
  const ComplexMatrix p = spin_plus(s);
  return (p + p.adjoint()) / 2.0;
}

inline ComplexMatrix spin_y(const Spin& s) {
  const ComplexMatrix p = spin_plus(s);
  return (p - p.adjoint()) / cplx(0, 2);
}

}  // namespace qchaos
