#pragma once

#include "tensor.hpp"

namespace qchaos {

// Site 1 is the most significant digit. T|i1...iN> = |iN i1 ... i(N-1)>.
inline Index translate_index(Index x, int n_sites, Index d, int shift = 1) {
  const Index top = ipow(d, n_sites - 1);
  shift = ((shift % n_sites) + n_sites) % n_sites;
  for (int s = 0; s < shift; ++s) x = (x % d) * top + x / d;
  return x;
}

// (T^shift psi)
inline StateVector apply_translation(const StateVector& psi, int n_sites, Index d, int shift = 1) {
  StateVector out(psi.size());
  for (Index x = 0; x < psi.size(); ++x) out(translate_index(x, n_sites, d, shift)) = psi(x);
  return out;
}

inline ComplexMatrix translation_matrix(int n_sites, Index d, int shift = 1) {
  const Index dim = ipow(d, n_sites);
  ComplexMatrix t = ComplexMatrix::Zero(dim, dim);
  for (Index x = 0; x < dim; ++x) t(translate_index(x, n_sites, d, shift), x) = 1.0;
  return t;
}

// T^{-s} M T^{s}
inline ComplexMatrix conjugate_by_translation(const ComplexMatrix& m, int n_sites, Index d, int s) {
  const Index dim = m.rows();
  std::vector<Index> p(dim);
  for (Index x = 0; x < dim; ++x) p[x] = translate_index(x, n_sites, d, s);
  ComplexMatrix out(dim, dim);
  // (T^{-s} M T^s)(x, y) = M(T^s x, T^s y) with T^s acting on basis labels.
  for (Index y = 0; y < dim; ++y)
    for (Index x = 0; x < dim; ++x) out(x, y) = m(p[x], p[y]);
  return out;
}

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0, cplx(0, -1), cplx(0, 1), 0;
  return m;
}
inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// op on site (0-based) of an n-site chain.
inline ComplexMatrix site_operator(const ComplexMatrix& op, int site, int n_sites) {
  const Index d = op.rows();
  return kron(kron(ComplexMatrix::Identity(ipow(d, site), ipow(d, site)), op),
              ComplexMatrix::Identity(ipow(d, n_sites - site - 1), ipow(d, n_sites - site - 1)));
}

}  // namespace qchaos
