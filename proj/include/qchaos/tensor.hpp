#pragma once

#include <algorithm>
#include <functional>
#include <numeric>

#include "types.hpp"

namespace qchaos {

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline StateVector kron(const StateVector& a, const StateVector& b) {
  StateVector out(a.size() * b.size());
  for (Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

inline ComplexMatrix kron_power(const ComplexMatrix& a, int t) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (int i = 0; i < t; ++i) out = kron(out, a);
  return out;
}

inline ComplexMatrix partial_trace(const ComplexMatrix& m, const SubsystemSplit& split, Side over) {
  const Index dA = split.dimA, dB = split.dimB;
  if (m.rows() != dA * dB || m.cols() != dA * dB)
    throw DimensionError("partial_trace: matrix is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", split expects " + std::to_string(dA * dB));
  if (over == Side::B) {
    ComplexMatrix r = ComplexMatrix::Zero(dA, dA);
    for (Index i = 0; i < dA; ++i)
      for (Index j = 0; j < dA; ++j) r(i, j) = m.block(i * dB, j * dB, dB, dB).trace();
    return r;
  }
  ComplexMatrix r = ComplexMatrix::Zero(dB, dB);
  for (Index i = 0; i < dA; ++i) r += m.block(i * dB, i * dB, dB, dB);
  return r;
}

inline double max_abs(const ComplexMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline bool is_hermitian(const ComplexMatrix& h, double tol = 1e-10) {
  return h.rows() == h.cols() && max_abs(h - h.adjoint()) <= tol;
}

inline ComplexMatrix hermitize(const ComplexMatrix& h, double tol = 1e-10) {
  if (!is_hermitian(h, tol)) throw DomainError("matrix is not Hermitian within tolerance");
  return (h + h.adjoint()) / 2.0;
}

// Singular values of a general matrix, or |eigenvalues| when Hermitian.
inline double trace_norm(const ComplexMatrix& m) {
  if (m.rows() == m.cols() && is_hermitian(m, 1e-12)) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((m + m.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("trace_norm: eigen solver failed");
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<ComplexMatrix> svd(m);
  if (svd.info() != Eigen::Success) throw Error("trace_norm: SVD did not converge");
  return svd.singularValues().sum();
}

inline ComplexMatrix herm_fn(const ComplexMatrix& h, const std::function<cplx(double)>& f) {
  const ComplexMatrix hs = hermitize(h);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hs);
  if (es.info() != Eigen::Success) throw Error("herm_fn: eigen solver failed");
  const auto& v = es.eigenvectors();
  StateVector fl(hs.rows());
  for (Index i = 0; i < hs.rows(); ++i) fl(i) = f(es.eigenvalues()(i));
  return v * fl.asDiagonal() * v.adjoint();
}

// Same for real symmetric input, keeping the eigenvectors real.
inline ComplexMatrix sym_fn(const RealMatrix& h, const std::function<cplx(double)>& f) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es((h + h.transpose()) / 2.0);
  if (es.info() != Eigen::Success) throw Error("sym_fn: eigen solver failed");
  const ComplexMatrix v = es.eigenvectors().cast<cplx>();
  StateVector fl(h.rows());
  for (Index i = 0; i < h.rows(); ++i) fl(i) = f(es.eigenvalues()(i));
  return v * fl.asDiagonal() * v.adjoint();
}

inline ComplexMatrix amplitude_matrix(const StateVector& psi, const SubsystemSplit& split) {
  if (psi.size() != split.dim()) throw DimensionError("state does not match split");
  ComplexMatrix m(split.dimA, split.dimB);
  for (Index a = 0; a < split.dimA; ++a)
    for (Index b = 0; b < split.dimB; ++b) m(a, b) = psi(a * split.dimB + b);
  return m;
}

inline std::vector<double> schmidt_coefficients(const StateVector& psi, const SubsystemSplit& split) {
  Eigen::BDCSVD<ComplexMatrix> svd(amplitude_matrix(psi, split));
  const RealVector s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline void normalize(StateVector& psi) { psi /= psi.norm(); }

// perm[k] = image of factor k. Factor k of the input lands in slot perm[k].
inline ComplexMatrix permutation_operator(const std::vector<int>& perm, Index d) {
  const int t = static_cast<int>(perm.size());
  std::vector<int> seen(t, 0);
  for (int p : perm) {
    if (p < 0 || p >= t || seen[p]) throw DomainError("permutation_operator: invalid permutation");
    seen[p] = 1;
  }
  const Index dim = ipow(d, t);
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  std::vector<Index> in(t), o(t);
  for (Index x = 0; x < dim; ++x) {
    Index r = x;
    for (int k = t - 1; k >= 0; --k) {
      in[k] = r % d;
      r /= d;
    }
    for (int k = 0; k < t; ++k) o[perm[k]] = in[k];
    Index y = 0;
    for (int k = 0; k < t; ++k) y = y * d + o[k];
    out(y, x) = 1.0;
  }
  return out;
}

inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// d(d+1)...(d+t-1)
inline double rising_factorial(Index d, int t) {
  double r = 1.0;
  for (int i = 0; i < t; ++i) r *= static_cast<double>(d + i);
  return r;
}

inline ComplexMatrix sym_projector_replicas(int t, Index d) {
  if (t < 1 || t > 4) throw DomainError("sym_projector_replicas: t must be in [1, 4]");
  std::vector<int> perm(t);
  std::iota(perm.begin(), perm.end(), 0);
  const Index dim = ipow(d, t);
  ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
  do {
    out += permutation_operator(perm, d);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

// Orthonormal coordinates on the symmetric subspace of (C^d)^{⊗t}.
// Basis element = normalized symmetrization of a nondecreasing index tuple.
class SymmetricCoords {
 public:
  SymmetricCoords(Index d, int t) : d_(d), t_(t) {
    std::vector<int> cur(t, 0);
    if (t == 0) {
      tuples_.push_back({});
    } else {
      build(cur, 0, 0);
    }
  }

  Index dim() const { return static_cast<Index>(tuples_.size()); }
  const std::vector<std::vector<int>>& tuples() const { return tuples_; }

  // Coordinates of |phi>^{⊗t}.
  StateVector power(const StateVector& phi) const {
    StateVector out(dim());
    for (Index m = 0; m < dim(); ++m) {
      const auto& tup = tuples_[m];
      cplx prod = 1.0;
      for (int i : tup) prod *= phi(i);
      out(m) = std::sqrt(weight_[m]) * prod;
    }
    return out;
  }

  // Columns: symmetric basis vectors in the full d^t space.
  ComplexMatrix isometry() const {
    const Index full = ipow(d_, t_);
    ComplexMatrix w = ComplexMatrix::Zero(full, dim());
    std::vector<int> perm(t_);
    for (Index m = 0; m < dim(); ++m) {
      std::vector<int> tup = tuples_[m];
      double count = 0;
      do {
        Index y = 0;
        for (int k = 0; k < t_; ++k) y = y * d_ + tup[k];
        w(y, m) = 1.0;
        count += 1.0;
      } while (std::next_permutation(tup.begin(), tup.end()));
      w.col(m) /= std::sqrt(count);
    }
    return w;
  }

 private:
  void build(std::vector<int>& cur, int pos, int lo) {
    if (pos == t_) {
      tuples_.push_back(cur);
      double w = factorial(t_);
      int run = 1;
      for (int k = 1; k <= t_; ++k) {
        if (k < t_ && cur[k] == cur[k - 1]) {
          ++run;
        } else {
          w /= factorial(run);
          run = 1;
        }
      }
      weight_.push_back(w);
      return;
    }
    for (int i = lo; i < d_; ++i) {
      cur[pos] = i;
      build(cur, pos + 1, i);
    }
  }

  Index d_;
  int t_;
  std::vector<std::vector<int>> tuples_;
  std::vector<double> weight_;
};

}  // namespace qchaos
