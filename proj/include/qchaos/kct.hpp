#pragma once

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "parallel.hpp"
#include "rmt.hpp"
#include "rng.hpp"
#include "spin.hpp"
#include "stats.hpp"
#include "tensor.hpp"

namespace qchaos {

// ---------------------------------------------------------------- Clebsch-Gordan

struct CGValue {
  double value = 0.0;
  bool allowed = false;  // false: selection rules violated, value is 0
};

namespace detail {

inline long double log_factorial(int n) {
  static const std::vector<long double> table = [] {
    std::vector<long double> t(16385, 0.0L);
    for (std::size_t k = 2; k < t.size(); ++k) t[k] = t[k - 1] + std::log(static_cast<long double>(k));
    return t;
  }();
  if (n < 0) throw DomainError("log_factorial: negative argument");
  if (static_cast<std::size_t>(n) < table.size()) return table[n];
  return std::lgamma(static_cast<long double>(n) + 1.0L);
}

}  // namespace detail

// All arguments doubled (tj1 = 2 j1 etc.). Racah summation in long double.
inline CGValue clebsch_gordan2(int tj1, int tm1, int tj2, int tm2, int tF, int tM) {
  CGValue out;
  if (tj1 < 0 || tj2 < 0 || tF < 0) return out;
  if (tM != tm1 + tm2) return out;
  if (std::abs(tm1) > tj1 || std::abs(tm2) > tj2 || std::abs(tM) > tF) return out;
  if ((tj1 + tm1) % 2 || (tj2 + tm2) % 2 || (tF + tM) % 2) return out;
  if (tF < std::abs(tj1 - tj2) || tF > tj1 + tj2 || (tj1 + tj2 + tF) % 2) return out;
  out.allowed = true;
  using detail::log_factorial;
  const int a = (tj1 + tj2 - tF) / 2, b = (tj1 - tj2 + tF) / 2, c = (-tj1 + tj2 + tF) / 2;
  const int s = (tj1 + tj2 + tF) / 2 + 1;
  const long double pre = 0.5L * (std::log(static_cast<long double>(tF + 1)) + log_factorial(a) +
                                  log_factorial(b) + log_factorial(c) - log_factorial(s) +
                                  log_factorial((tj1 + tm1) / 2) + log_factorial((tj1 - tm1) / 2) +
                                  log_factorial((tj2 + tm2) / 2) + log_factorial((tj2 - tm2) / 2) +
                                  log_factorial((tF + tM) / 2) + log_factorial((tF - tM) / 2));
  const int e1 = (tj1 - tm1) / 2, e2 = (tj2 + tm2) / 2;
  const int f1 = (tF - tj2 + tm1) / 2, f2 = (tF - tj1 - tm2) / 2;
  const int kmin = std::max({0, -f1, -f2});
  const int kmax = std::min({a, e1, e2});
  long double sum = 0.0L;
  for (int k = kmin; k <= kmax; ++k) {
    const long double lt = pre - (log_factorial(k) + log_factorial(a - k) + log_factorial(e1 - k) +
                                  log_factorial(e2 - k) + log_factorial(f1 + k) + log_factorial(f2 + k));
    sum += (k % 2 ? -1.0L : 1.0L) * std::exp(lt);
  }
  out.value = static_cast<double>(sum);
  return out;
}

inline CGValue clebsch_gordan(double j1, double m1, double j2, double m2, double F, double M) {
  auto twice = [](double x) {
    const long v = std::lround(2.0 * x);
    if (std::abs(2.0 * x - static_cast<double>(v)) > 1e-9) throw DomainError("clebsch_gordan: not a half-integer");
    return static_cast<int>(v);
  };
  return clebsch_gordan2(twice(j1), twice(m1), twice(j2), twice(m2), twice(F), twice(M));
}

// ---------------------------------------------------------------- sectors

struct KCTParams {
  double J = 1.0;
  double alpha = 0.0;
  double beta = 0.0;
  Spin spin() const { return spin_from_double(J); }
};

inline void check_sector(const Spin& s, int fz) {
  if (fz < -s.twoJ || fz > s.twoJ) throw DomainError("Fz outside [-2J, 2J]");
}

inline Index sector_dim(const Spin& s, int fz) { return s.dim() - std::abs(fz); }

// Row of product state (i1, .) inside the Fz sector basis.
inline Index sector_pos(int fz, Index i1) { return i1 - std::max(0, -fz); }

struct FzSector {
  int fz = 0;
  std::vector<Index> indices;  // product indices, increasing i1
  std::vector<double> m1, m2;
  Index dim() const { return static_cast<Index>(indices.size()); }
};

inline FzSector fz_sector(const Spin& s, int fz) {
  check_sector(s, fz);
  FzSector out;
  out.fz = fz;
  out.indices = sector_indices(s, fz);
  for (Index idx : out.indices) {
    out.m1.push_back(s.m(idx / s.dim()));
    out.m2.push_back(s.m(idx % s.dim()));
  }
  return out;
}

// Columns k: |F = |Fz| + k, M = Fz> in the sector basis. Rows follow fz_sector.
struct SectorCoupling {
  int fz = 0;
  std::vector<int> F;
  RealMatrix V;
};

namespace detail {

inline SectorCoupling coupling_nonneg(const Spin& s, int fz) {
  const FzSector sec = fz_sector(s, fz);
  const Index n = sec.dim();
  const double JJ = s.J() * (s.J() + 1.0);
  RealVector diag(n), sub(std::max<Index>(n - 1, 0));
  for (Index k = 0; k < n; ++k) diag(k) = sec.m1[k] * sec.m2[k];
  // rows ordered by decreasing m1: row k+1 has m1 - 1, m2 + 1
  for (Index k = 0; k + 1 < n; ++k) {
    const double m1 = sec.m1[k + 1], m2 = sec.m2[k + 1];
    sub(k) = 0.5 * std::sqrt((JJ - m1 * (m1 + 1.0)) * (JJ - m2 * (m2 - 1.0)));
  }
  SectorCoupling out;
  out.fz = fz;
  if (n == 1) {
    out.V = RealMatrix::Ones(1, 1);
  } else {
    Eigen::SelfAdjointEigenSolver<RealMatrix> es;
    es.computeFromTridiagonal(diag, sub);
    if (es.info() != Eigen::Success) throw Error("sector coupling: tridiagonal solver failed");
    out.V = es.eigenvectors();
  }
  for (Index k = 0; k < n; ++k) {
    out.F.push_back(std::abs(fz) + static_cast<int>(k));
    if (out.V(0, k) < 0) out.V.col(k) *= -1.0;  // stretched m1 = J component positive
  }
  return out;
}

}  // namespace detail

// Eigenvectors of I.J inside the sector; I.J = (F(F+1) - 2J(J+1))/2 orders columns by F.
// Condon-Shortley signs; for Fz < 0 via C^{F,-M}_{-m1,-m2} = (-1)^{2J-F} C^{F,M}_{m1,m2}.
inline SectorCoupling sector_coupling(const Spin& s, int fz) {
  check_sector(s, fz);
  if (fz >= 0) return detail::coupling_nonneg(s, fz);
  SectorCoupling pos = detail::coupling_nonneg(s, -fz);
  SectorCoupling out;
  out.fz = fz;
  out.F = pos.F;
  const Index n = pos.V.rows();
  out.V.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const double sign = ((s.twoJ - pos.F[k]) % 2) ? -1.0 : 1.0;
    for (Index r = 0; r < n; ++r) out.V(r, k) = sign * pos.V(n - 1 - r, k);
  }
  return out;
}

// ---------------------------------------------------------------- Floquet

inline ComplexMatrix subspace_floquet(const KCTParams& p, int fz) {
  const Spin s = p.spin();
  const SectorCoupling c = sector_coupling(s, fz);
  const FzSector sec = fz_sector(s, fz);
  const Index n = sec.dim();
  StateVector ph(n), kick(n);
  for (Index k = 0; k < n; ++k) {
    const double F = c.F[k];
    ph(k) = std::exp(-kI * (p.alpha / (2.0 * p.J)) * F * (F + 1.0));
    kick(k) = std::exp(-kI * p.beta * sec.m2[k]);
  }
  const ComplexMatrix V = c.V.cast<cplx>();
  return V * ph.asDiagonal() * V.transpose() * kick.asDiagonal();
}

inline std::vector<ComplexMatrix> sector_floquets(const KCTParams& p) {
  const Spin s = p.spin();
  return parallel_map<ComplexMatrix>(static_cast<std::size_t>(2 * s.twoJ + 1), [&](std::size_t k) {
    return subspace_floquet(p, static_cast<int>(k) - s.twoJ);
  });
}

inline ComplexMatrix embed_sectors(const Spin& s, const std::vector<ComplexMatrix>& blocks) {
  const Index d = s.dim() * s.dim();
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto idx = sector_indices(s, static_cast<int>(k) - s.twoJ);
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) u(idx[a], idx[b]) = blocks[k](a, b);
  }
  return u;
}

inline ComplexMatrix kct_floquet(const KCTParams& p) {
  const Spin s = p.spin();
  if (s.dim() * s.dim() > 4096) throw DomainError("kct_floquet: dimension above 2^12");
  return embed_sectors(s, sector_floquets(p));
}

inline ComplexMatrix restrict_to(const ComplexMatrix& m, const std::vector<Index>& rows, const std::vector<Index>& cols) {
  ComplexMatrix out(rows.size(), cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) out(a, b) = m(rows[a], cols[b]);
  return out;
}

struct KCTOperators {
  ComplexMatrix Iz, Ix, Jz, Jx, Fz;
};

inline KCTOperators kct_operators(const Spin& s) {
  const ComplexMatrix id = ComplexMatrix::Identity(s.dim(), s.dim());
  KCTOperators o;
  o.Iz = kron(spin_z(s), id);
  o.Ix = kron(spin_x(s), id);
  o.Jz = kron(id, spin_z(s));
  o.Jx = kron(id, spin_x(s));
  o.Fz = o.Iz + o.Jz;
  return o;
}

// max |T U T^{-1} - U^dag| with T = exp(i beta J_z) K.
inline double time_reversal_residual(const KCTParams& p, const ComplexMatrix& U) {
  const Spin s = p.spin();
  const Index d = s.dim();
  StateVector ph(d * d);
  for (Index i = 0; i < d * d; ++i) ph(i) = std::exp(kI * p.beta * s.m(i % d));
  const ComplexMatrix tut = ph.asDiagonal() * U.conjugate() * ph.conjugate().asDiagonal();
  return max_abs(tut - U.adjoint());
}

// ---------------------------------------------------------------- eigen decomposition

struct UnitaryEigen {
  RealVector phases;  // U = V diag(exp(-i phase)) V^dag
  ComplexMatrix V;
};

inline UnitaryEigen unitary_eigen(const ComplexMatrix& U) {
  Eigen::ComplexSchur<ComplexMatrix> schur(U);
  if (schur.info() != Eigen::Success) throw Error("unitary_eigen: Schur decomposition failed");
  const ComplexMatrix& T = schur.matrixT();
  UnitaryEigen out;
  out.V = schur.matrixU();
  out.phases.resize(U.rows());
  for (Index k = 0; k < U.rows(); ++k) out.phases(k) = -std::arg(T(k, k));
  return out;
}

// ---------------------------------------------------------------- coherent states and Husimi

// Rotation: derived from the projected product of rotated |J,J> states,
// mu = exp(-i dphi)(1 - sin(dtheta/2))/(1 + sin(dtheta/2)).
// Printed: mu = exp(i dphi/2)(1 + sin(dtheta/2))/(1 - sin(dtheta/2)).
enum class MuConvention { Rotation, Printed };

inline cplx log_mu(double dtheta, double dphi, MuConvention conv) {
  if (!std::isfinite(dtheta) || !std::isfinite(dphi)) throw DomainError("coherent state: non-finite angle");
  if (std::abs(dtheta) >= kPi) throw DomainError("coherent state: |dtheta| must be < pi");
  const double s = std::sin(dtheta / 2.0);
  const double lr = std::log1p(s) - std::log1p(-s);
  if (conv == MuConvention::Rotation) return {-lr, -dphi};
  return {lr, dphi / 2.0};
}

// Amplitudes on the Fz = 0 sector (row k: m1 = J - k, m2 = -m1), normalized.
inline StateVector spin_coherent_projected(double dtheta, double dphi, double J,
                                           MuConvention conv = MuConvention::Rotation) {
  const Spin s = spin_from_double(J);
  const cplx lm = log_mu(dtheta, dphi, conv);
  const Index n = s.dim();
  std::vector<double> lg(n);
  double top = -1e300;
  for (Index k = 0; k < n; ++k) {
    const double m = s.m(k);
    const int jm = static_cast<int>(k), jp = s.twoJ - jm;
    lg[k] = static_cast<double>(detail::log_factorial(s.twoJ) - detail::log_factorial(jm) - detail::log_factorial(jp)) +
            m * lm.real();
    top = std::max(top, lg[k]);
  }
  StateVector v(n);
  for (Index k = 0; k < n; ++k) v(k) = std::exp(lg[k] - top) * std::exp(kI * (s.m(k) * lm.imag()));
  return v / v.norm();
}

// Dense single-spin coherent state exp(-i phi Jz) exp(-i theta Jy)|J,J>.
inline StateVector spin_coherent_dense(const Spin& s, double theta, double phi) {
  StateVector top = StateVector::Zero(s.dim());
  top(0) = 1.0;
  const ComplexMatrix ry = herm_fn(spin_y(s), [theta](double x) { return std::exp(-kI * theta * x); });
  StateVector out = ry * top;
  for (Index i = 0; i < s.dim(); ++i) out(i) *= std::exp(-kI * phi * s.m(i));
  return out;
}

struct HusimiGrid {
  std::vector<double> dtheta;
  std::vector<double> dphi;
};

// Midpoint grid on (-pi, pi) x [0, 2 pi).
inline HusimiGrid uniform_husimi_grid(int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1) throw DomainError("husimi grid: empty");
  HusimiGrid g;
  for (int a = 0; a < n_theta; ++a) g.dtheta.push_back(-kPi + (a + 0.5) * 2.0 * kPi / n_theta);
  for (int b = 0; b < n_phi; ++b) g.dphi.push_back((b + 0.5) * 2.0 * kPi / n_phi);
  return g;
}

// Quadrature weights of d(sin(dtheta/2)) d(dphi) on a uniform grid.
inline RealMatrix husimi_weights(const HusimiGrid& g) {
  const double dth = 2.0 * kPi / static_cast<double>(g.dtheta.size());
  const double dph = 2.0 * kPi / static_cast<double>(g.dphi.size());
  RealMatrix w(g.dtheta.size(), g.dphi.size());
  for (std::size_t a = 0; a < g.dtheta.size(); ++a)
    w.row(a).setConstant(0.5 * std::cos(g.dtheta[a] / 2.0) * dth * dph);
  return w;
}

inline RealMatrix husimi(const StateVector& psi, const HusimiGrid& g, double J,
                         MuConvention conv = MuConvention::Rotation) {
  const Spin s = spin_from_double(J);
  if (psi.size() != s.dim()) throw DimensionError("husimi: state is not on the Fz = 0 sector");
  RealMatrix out(g.dtheta.size(), g.dphi.size());
  auto rows = parallel_map<RealVector>(g.dtheta.size(), [&](std::size_t a) {
    RealVector r(g.dphi.size());
    for (std::size_t b = 0; b < g.dphi.size(); ++b)
      r(b) = std::norm(spin_coherent_projected(g.dtheta[a], g.dphi[b], J, conv).dot(psi));
    return r;
  });
  for (std::size_t a = 0; a < rows.size(); ++a) out.row(a) = rows[a].transpose();
  return out;
}

// Wehrl entropy -int F ln F dmu, with the measure rescaled so that int F dmu = 1.
inline double husimi_entropy(const RealMatrix& field, const RealMatrix& weights) {
  const double z = field.cwiseProduct(weights).sum();
  if (z <= 0) throw DomainError("husimi_entropy: vanishing field");
  double h = 0.0;
  for (Index i = 0; i < field.size(); ++i) {
    const double f = field.data()[i];
    if (f > 0) h -= weights.data()[i] * f * std::log(f);
  }
  return h / z;
}

// ---------------------------------------------------------------- OTOCs (dense)

namespace detail {

inline double commutator_value(const ComplexMatrix& at, const ComplexMatrix& B, const StateVector* psi) {
  const ComplexMatrix c = at * B - B * at;
  if (psi) return 0.5 * (c * *psi).squaredNorm() / psi->squaredNorm();
  return 0.5 * c.squaredNorm() / static_cast<double>(c.rows());
}

}  // namespace detail

// (1/2)<[A(t), B]^dag [A(t), B]>, A(t) = U^{-t} A U^t. psi == nullptr: maximally mixed.
inline std::vector<double> otoc_series(const ComplexMatrix& A, const ComplexMatrix& B, const ComplexMatrix& U,
                                       int t_max, const StateVector* psi = nullptr) {
  if (A.rows() != U.rows() || B.rows() != U.rows() || (psi && psi->size() != U.rows()))
    throw DimensionError("otoc: operator dimensions differ");
  if (t_max < 0) throw DomainError("otoc: t_max < 0");
  std::vector<double> out;
  ComplexMatrix at = A;
  const ComplexMatrix ud = U.adjoint();
  for (int t = 0; t <= t_max; ++t) {
    if (t > 0) at = ud * at * U;
    out.push_back(detail::commutator_value(at, B, psi));
  }
  return out;
}

inline double otoc_commutator(const ComplexMatrix& A, const ComplexMatrix& B, const ComplexMatrix& U, int t,
                              const StateVector* psi = nullptr) {
  return otoc_series(A, B, U, t, psi).back();
}

// C2 - C4 with the 1/d trace normalization.
inline std::pair<double, double> otoc_c2_c4(const ComplexMatrix& at, const ComplexMatrix& B) {
  const double d = static_cast<double>(at.rows());
  const ComplexMatrix ab = at * B;
  return {(ab * ab.adjoint()).trace().real() / d, (ab * ab).trace().real() / d};
}

struct InfiniteAverage {
  double value = 0.0;
  int degenerate_clusters = 0;  // clusters with more than one eigenphase
};

namespace detail {

inline std::vector<int> phase_clusters(const RealVector& ph, double tol, int& n_clusters) {
  const Index n = ph.size();
  std::vector<Index> order(n);
  for (Index i = 0; i < n; ++i) order[i] = i;
  auto wrapped = [&](Index i) { return std::remainder(ph(i), 2.0 * kPi); };
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return wrapped(a) < wrapped(b); });
  std::vector<int> label(n, 0);
  int c = 0;
  for (Index k = 0; k < n; ++k) {
    if (k > 0 && std::abs(wrapped(order[k]) - wrapped(order[k - 1])) > tol) ++c;
    label[order[k]] = c;
  }
  // wrap-around: first and last cluster meet across +-pi
  if (n > 1 && c > 0 && 2.0 * kPi - (wrapped(order[n - 1]) - wrapped(order[0])) <= tol)
    for (auto& l : label)
      if (l == c) l = 0;
  n_clusters = c + 1;
  return label;
}

inline ComplexMatrix cluster_diag(const ComplexMatrix& x, const std::vector<int>& label) {
  ComplexMatrix out = ComplexMatrix::Zero(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = 0; j < x.cols(); ++j)
      if (label[i] == label[j]) out(i, j) = x(i, j);
  return out;
}

}  // namespace detail

// Long-time mean of otoc_commutator for Hermitian A, B. Eigenphases closer than tol are
// merged into clusters; resonant terms within a cluster are kept. Gap coincidences between
// distinct clusters are treated as non-resonant.
inline InfiniteAverage otoc_infinite_average(const ComplexMatrix& A, const ComplexMatrix& B, const ComplexMatrix& U,
                                             const StateVector* psi = nullptr, double tol = 1e-8) {
  if (!is_hermitian(A) || !is_hermitian(B)) throw DomainError("otoc_infinite_average: Hermitian A, B required");
  const UnitaryEigen eg = unitary_eigen(U);
  int nc = 0;
  const std::vector<int> label = detail::phase_clusters(eg.phases, tol, nc);
  InfiniteAverage out;
  std::vector<int> count(nc, 0);
  for (int l : label) ++count[l];
  for (int c : count)
    if (c > 1) ++out.degenerate_clusters;
  const ComplexMatrix& V = eg.V;
  const ComplexMatrix a = V.adjoint() * A * V, b = V.adjoint() * B * V;
  using detail::cluster_diag;
  // time average of A_t Y A_t
  auto avg_aya = [&](const ComplexMatrix& y) {
    const ComplexMatrix ad = cluster_diag(a, label), yd = cluster_diag(y, label);
    return ComplexMatrix(ad * y * ad + cluster_diag(a * yd * a, label) - ad * yd * ad);
  };
  const ComplexMatrix b2 = b * b;
  const ComplexMatrix a2d = cluster_diag(a * a, label);
  const ComplexMatrix aba = avg_aya(b);
  const ComplexMatrix m = avg_aya(b2) + b * a2d * b - aba * b - b * aba;
  if (psi) {
    const StateVector v = V.adjoint() * *psi;
    out.value = 0.5 * v.dot(m * v).real() / v.squaredNorm();
  } else {
    out.value = 0.5 * m.trace().real() / static_cast<double>(U.rows());
  }
  return out;
}

// lambda = slope / 2 of log C(t) over t in [t_lo, t_hi] (series indexed by t).
inline LinearFit otoc_growth_fit(const std::vector<double>& c, int t_lo, int t_hi) {
  if (t_lo < 0 || t_hi >= static_cast<int>(c.size()) || t_hi - t_lo < 1) throw DomainError("otoc_growth_fit: bad window");
  std::vector<double> x, y;
  for (int t = t_lo; t <= t_hi; ++t) {
    if (c[t] <= 0) throw DomainError("otoc_growth_fit: non-positive OTOC");
    x.push_back(t);
    y.push_back(std::log(c[t]));
  }
  return linear_fit(x, y);
}

// ---------------------------------------------------------------- I_z J_z sector sum

inline std::vector<double> izjz_otoc_series(const KCTParams& p, int t_max) {
  if (t_max < 0) throw DomainError("izjz_otoc: t_max < 0");
  const Spin s = p.spin();
  const std::size_t n_sec = static_cast<std::size_t>(2 * s.twoJ + 1);
  auto per = parallel_map<std::vector<double>>(n_sec, [&](std::size_t k) {
    const int fz = static_cast<int>(k) - s.twoJ;
    const FzSector sec = fz_sector(s, fz);
    const ComplexMatrix U = subspace_floquet(p, fz);
    const ComplexMatrix ud = U.adjoint();
    ComplexMatrix at = ComplexMatrix::Zero(sec.dim(), sec.dim());
    ComplexMatrix b = at;
    for (Index i = 0; i < sec.dim(); ++i) {
      at(i, i) = sec.m1[i];
      b(i, i) = sec.m2[i];
    }
    std::vector<double> out;
    for (int t = 0; t <= t_max; ++t) {
      if (t > 0) at = ud * at * U;
      const ComplexMatrix ab = at * b;
      out.push_back((ab * ab.adjoint()).trace().real() - (ab * ab).trace().real());
    }
    return out;
  });
  const double norm = static_cast<double>(s.dim() * s.dim());
  std::vector<double> total(t_max + 1, 0.0);
  for (const auto& v : per)
    for (int t = 0; t <= t_max; ++t) total[t] += v[t];
  for (auto& x : total) x /= norm;
  return total;
}

inline double izjz_otoc(const KCTParams& p, int t) { return izjz_otoc_series(p, t).back(); }

// ---------------------------------------------------------------- block-sparse sector operators

// Operator on the product space stored as blocks (Fz_row, Fz_col) in sector bases.
struct SectorOperator {
  Spin spin;
  std::map<std::pair<int, int>, ComplexMatrix> blocks;

  cplx trace() const {
    cplx t = 0.0;
    for (const auto& [k, m] : blocks)
      if (k.first == k.second) t += m.trace();
    return t;
  }
};

inline SectorOperator operator*(const SectorOperator& x, const SectorOperator& y) {
  SectorOperator out{x.spin, {}};
  for (const auto& [kx, mx] : x.blocks)
    for (const auto& [ky, my] : y.blocks) {
      if (kx.second != ky.first) continue;
      const std::pair<int, int> key{kx.first, ky.second};
      auto it = out.blocks.find(key);
      if (it == out.blocks.end())
        out.blocks.emplace(key, mx * my);
      else
        it->second.noalias() += mx * my;
    }
  return out;
}

inline cplx trace_product(const SectorOperator& x, const SectorOperator& y) {
  cplx t = 0.0;
  for (const auto& [kx, mx] : x.blocks) {
    auto it = y.blocks.find({kx.second, kx.first});
    if (it != y.blocks.end()) t += mx.cwiseProduct(it->second.transpose()).sum();
  }
  return t;
}

// op acting on spin 1 (Side::A) or spin 2 (Side::B).
inline SectorOperator local_sector_operator(const Spin& s, const ComplexMatrix& op, Side side) {
  SectorOperator out{s, {}};
  const Index d = s.dim();
  for (Index i1 = 0; i1 < d; ++i1)
    for (Index i2 = 0; i2 < d; ++i2) {
      const int fr = s.twoJ - static_cast<int>(i1 + i2);
      for (Index j = 0; j < d; ++j) {
        const cplx v = side == Side::A ? op(i1, j) : op(i2, j);
        if (v == cplx(0.0)) continue;
        const Index c1 = side == Side::A ? j : i1, c2 = side == Side::A ? i2 : j;
        const int fc = s.twoJ - static_cast<int>(c1 + c2);
        auto& blk = out.blocks[{fr, fc}];
        if (blk.size() == 0) blk = ComplexMatrix::Zero(sector_dim(s, fr), sector_dim(s, fc));
        blk(sector_pos(fr, i1), sector_pos(fc, c1)) += v;
      }
    }
  return out;
}

inline SectorOperator to_sector_operator(const Spin& s, const ComplexMatrix& m, double tol = 0.0) {
  if (m.rows() != s.dim() * s.dim()) throw DimensionError("to_sector_operator: dimension mismatch");
  SectorOperator out{s, {}};
  for (int fr = -s.twoJ; fr <= s.twoJ; ++fr)
    for (int fc = -s.twoJ; fc <= s.twoJ; ++fc) {
      ComplexMatrix blk = restrict_to(m, sector_indices(s, fr), sector_indices(s, fc));
      if (blk.cwiseAbs().maxCoeff() > tol) out.blocks.emplace(std::make_pair(fr, fc), std::move(blk));
    }
  return out;
}

inline ComplexMatrix to_dense(const SectorOperator& x) {
  const Spin& s = x.spin;
  ComplexMatrix out = ComplexMatrix::Zero(s.dim() * s.dim(), s.dim() * s.dim());
  for (const auto& [k, m] : x.blocks) {
    const auto r = sector_indices(s, k.first), c = sector_indices(s, k.second);
    for (std::size_t a = 0; a < r.size(); ++a)
      for (std::size_t b = 0; b < c.size(); ++b) out(r[a], c[b]) = m(a, b);
  }
  return out;
}

// U^dag X U for block-diagonal U (blocks[k] on Fz = k - 2J).
inline SectorOperator conjugate_blocks(const SectorOperator& x, const std::vector<ComplexMatrix>& u) {
  SectorOperator out{x.spin, {}};
  const int off = x.spin.twoJ;
  for (const auto& [k, m] : x.blocks) out.blocks.emplace(k, u[k.first + off].adjoint() * m * u[k.second + off]);
  return out;
}

inline std::pair<double, double> sector_c2_c4(const SectorOperator& at, const SectorOperator& b) {
  const double d = static_cast<double>(at.spin.dim() * at.spin.dim());
  const SectorOperator ab = at * b;
  SectorOperator ba = b * at;
  return {trace_product(ab, ba).real() / d, trace_product(ab, ab).real() / d};
}

// C2 - C4 for A = I_x (x) 1, B = 1 (x) J_x with the 1/(2J+1)^2 normalization, t = 0..t_max.
inline std::vector<double> ixjx_otoc_series(const KCTParams& p, int t_max) {
  const Spin s = p.spin();
  const auto u = sector_floquets(p);
  SectorOperator at = local_sector_operator(s, spin_x(s), Side::A);
  const SectorOperator b = local_sector_operator(s, spin_x(s), Side::B);
  std::vector<double> out;
  for (int t = 0; t <= t_max; ++t) {
    if (t > 0) at = conjugate_blocks(at, u);
    const auto [c2, c4] = sector_c2_c4(at, b);
    out.push_back(c2 - c4);
  }
  return out;
}

// ---------------------------------------------------------------- structure checks

// table(a, b) = || U_{Fa}^dag A U_{Fb} || with U_F = U P_F, rows/cols Fz = -2J..2J.
inline RealMatrix sector_norm_table(const Spin& s, const ComplexMatrix& U, const ComplexMatrix& A) {
  const int n = 2 * s.twoJ + 1;
  const Index d = s.dim() * s.dim();
  std::vector<ComplexMatrix> uf(n);
  for (int k = 0; k < n; ++k) {
    ComplexMatrix p = ComplexMatrix::Zero(d, d);
    for (Index i : sector_indices(s, k - s.twoJ)) p(i, i) = 1.0;
    uf[k] = U * p;
  }
  RealMatrix out(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) out(a, b) = (uf[a].adjoint() * A * uf[b]).norm();
  return out;
}

struct IxJxReport {
  RealMatrix table_A, table_B;
  bool adjacency_ok = false;
  double max_offpattern = 0.0;
  double min_onpattern = 0.0;
  double max_four_point = 0.0;
  bool four_point_ok = false;
  bool ok() const { return adjacency_ok && four_point_ok; }
};

inline bool adjacency_pattern_ok(const RealMatrix& t, double thr, double& off, double& on) {
  bool ok = true;
  off = 0.0;
  on = 1e300;
  for (Index a = 0; a < t.rows(); ++a)
    for (Index b = 0; b < t.cols(); ++b) {
      if (std::abs(a - b) == 1) {
        on = std::min(on, t(a, b));
        ok = ok && t(a, b) > thr;
      } else {
        off = std::max(off, t(a, b));
        ok = ok && t(a, b) <= thr;
      }
    }
  return ok;
}

inline IxJxReport ixjx_structure_check(const KCTParams& p, int t_max = 10, double thr = 1e-10, double tol4 = 1e-9) {
  const Spin s = p.spin();
  const KCTOperators o = kct_operators(s);
  const ComplexMatrix U = kct_floquet(p);
  IxJxReport r;
  r.table_A = sector_norm_table(s, U, o.Ix);
  r.table_B = sector_norm_table(s, U, o.Jx);
  double offA, onA, offB, onB;
  const bool okA = adjacency_pattern_ok(r.table_A, thr, offA, onA);
  const bool okB = adjacency_pattern_ok(r.table_B, thr, offB, onB);
  r.adjacency_ok = okA && okB;
  r.max_offpattern = std::max(offA, offB);
  r.min_onpattern = std::min(onA, onB);
  const Index d = s.dim() * s.dim();
  for (int fz = -s.twoJ; fz <= s.twoJ; ++fz) {
    ComplexMatrix pf = ComplexMatrix::Zero(d, d);
    for (Index i : sector_indices(s, fz)) pf(i, i) = 1.0;
    const ComplexMatrix uf = U * pf;
    ComplexMatrix ut = pf;  // U_F^t
    for (int t = 0; t <= t_max; ++t) {
      if (t > 0) ut = uf * ut;
      const ComplexMatrix at = ut.adjoint() * o.Ix * ut;
      const cplx f = (at * o.Jx * at * o.Jx).trace();
      r.max_four_point = std::max(r.max_four_point, std::abs(f));
    }
  }
  r.four_point_ok = r.max_four_point <= tol4;
  return r;
}

// ---------------------------------------------------------------- RMT saturation

inline double rmt_saturation_c2_closed(const SectorOperator& A, const SectorOperator& B) {
  const Spin& s = A.spin;
  const SectorOperator a2 = A * A, b2 = B * B;
  double total = 0.0;
  for (int fz = -s.twoJ; fz <= s.twoJ; ++fz) {
    const auto ia = a2.blocks.find({fz, fz});
    const auto ib = b2.blocks.find({fz, fz});
    if (ia == a2.blocks.end() || ib == b2.blocks.end()) continue;
    const ComplexMatrix& xa = ia->second;
    const ComplexMatrix& xb = ib->second;
    const cplx v = xa.cwiseProduct(xb).sum() + xa.trace() * xb.trace();
    total += v.real() / static_cast<double>(sector_dim(s, fz) + 1);
  }
  return total / static_cast<double>(s.dim() * s.dim());
}

inline double rmt_saturation_c2_closed(const Spin& s, const ComplexMatrix& A, const ComplexMatrix& B) {
  return rmt_saturation_c2_closed(to_sector_operator(s, A), to_sector_operator(s, B));
}

struct RMTSaturation {
  double closed_form = 0.0;
  Estimate c2;
  Estimate c4;
};

inline RMTSaturation rmt_saturation_C2(const ComplexMatrix& A, const ComplexMatrix& B, double J,
                                       std::size_t n_samples, std::uint64_t seed) {
  const Spin s = spin_from_double(J);
  if (A.rows() != s.dim() * s.dim() || B.rows() != A.rows()) throw DimensionError("rmt_saturation: dimension mismatch");
  if (n_samples < 2) throw DomainError("rmt_saturation: need >= 2 samples");
  RMTSaturation out;
  out.closed_form = rmt_saturation_c2_closed(s, A, B);
  const SectorOperator a = to_sector_operator(s, A), b = to_sector_operator(s, B);
  auto vals = parallel_map<std::pair<double, double>>(n_samples, [&](std::size_t i) {
    Rng rng(seed, i);
    std::vector<ComplexMatrix> u;
    for (int fz = -s.twoJ; fz <= s.twoJ; ++fz) u.push_back(sample_coe(sector_dim(s, fz), rng));
    return sector_c2_c4(conjugate_blocks(a, u), b);
  });
  std::vector<double> c2, c4;
  for (const auto& [x, y] : vals) {
    c2.push_back(x);
    c4.push_back(y);
  }
  out.c2 = mean_stderr(c2);
  out.c4 = mean_stderr(c4);
  return out;
}

// Largest |MC mean - closed form| / stderr over the entries of E[W^dag P W], W in COE(d).
inline double coe_conjugation_zscore(const ComplexMatrix& P, std::size_t n_samples, std::uint64_t seed) {
  const Index d = P.rows();
  auto samples = parallel_map<ComplexMatrix>(n_samples, [&](std::size_t i) {
    Rng rng(seed, i);
    const ComplexMatrix w = sample_coe(d, rng);
    return ComplexMatrix(w.adjoint() * P * w);
  });
  const ComplexMatrix ref = coe_avg_conjugation(P);
  double z = 0.0;
  for (Index r = 0; r < d; ++r)
    for (Index c = 0; c < d; ++c)
      for (int part = 0; part < 2; ++part) {
        std::vector<double> xs;
        for (const auto& m : samples) xs.push_back(part ? m(r, c).imag() : m(r, c).real());
        const Estimate e = mean_stderr(xs);
        const double target = part ? ref(r, c).imag() : ref(r, c).real();
        if (e.err > 0) z = std::max(z, std::abs(e.mean - target) / e.err);
      }
  return z;
}

// ---------------------------------------------------------------- GUE / diagonal-GUE identities

struct GUEIdentity {
  Estimate mc;
  double closed_form = 0.0;
};

inline Index square_side(Index n) {
  const Index d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n) throw DimensionError("bipartite unitary must have dimension d^2");
  return d;
}

inline ComplexMatrix matrix_power(const ComplexMatrix& u, int t) {
  if (t < 0) throw DomainError("matrix_power: negative exponent");
  ComplexMatrix out = ComplexMatrix::Identity(u.rows(), u.cols());
  for (int k = 0; k < t; ++k) out = u * out;
  return out;
}

// d^2 - (1/d^2) Tr[S_AA (U^{dag t})^{(x)2} S_AA (U^t)^{(x)2}], factors ordered (A1, B1, A2, B2).
inline double gue_otoc_closed_form(const ComplexMatrix& U, int t) {
  const Index d = square_side(U.rows());
  const ComplexMatrix ut = matrix_power(U, t);
  const ComplexMatrix u2 = kron(ut, ut);
  const ComplexMatrix saa = permutation_operator({2, 1, 0, 3}, d);
  const double dd = static_cast<double>(d * d);
  return dd - (saa * u2.adjoint() * saa * u2).trace().real() / dd;
}

// MC over P = O1 (x) 1, Q = 1 (x) O2 with O1, O2 in GUE(d); C = (1/d^2)[Tr(P_t^2 Q^2) - Tr(P_t Q P_t Q)].
inline GUEIdentity gue_otoc_identity(const ComplexMatrix& U, int t, std::size_t n_samples, std::uint64_t seed) {
  const Index d = square_side(U.rows());
  const ComplexMatrix ut = matrix_power(U, t);
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  auto vals = parallel_map<double>(n_samples, [&](std::size_t i) {
    Rng rng(seed, i);
    const ComplexMatrix P = kron(sample_gue(d, rng), id);
    const ComplexMatrix Q = kron(id, sample_gue(d, rng));
    const ComplexMatrix pt = ut.adjoint() * P * ut;
    const auto [c2, c4] = otoc_c2_c4(pt, Q);
    return c2 - c4;
  });
  return {mean_stderr(vals), gue_otoc_closed_form(U, t)};
}

// 1 - (1/d^2) sum_kl |<k|U^t|l>|^4 with d = dim U.
inline double dgue_cgp(const ComplexMatrix& U, int t) {
  const ComplexMatrix ut = matrix_power(U, t);
  const double d = static_cast<double>(U.rows());
  return 1.0 - ut.cwiseAbs2().cwiseAbs2().sum() / (d * d);
}

// Same sum with the 1/d normalization that the diagonal-Gaussian average produces.
inline double dgue_otoc_mixed(const ComplexMatrix& U, int t) {
  const ComplexMatrix ut = matrix_power(U, t);
  return 1.0 - ut.cwiseAbs2().cwiseAbs2().sum() / static_cast<double>(U.rows());
}

// MC over diagonal Gaussian P, Q on the full space; C = (1/d)[Tr(P_t^2 Q^2) - Tr(P_t Q P_t Q)].
inline Estimate dgue_otoc_mc(const ComplexMatrix& U, int t, std::size_t n_samples, std::uint64_t seed) {
  const ComplexMatrix ut = matrix_power(U, t);
  const Index d = U.rows();
  auto vals = parallel_map<double>(n_samples, [&](std::size_t i) {
    Rng rng(seed, i);
    const ComplexMatrix P = sample_diagonal_gue(d, rng), Q = sample_diagonal_gue(d, rng);
    const auto [c2, c4] = otoc_c2_c4(ut.adjoint() * P * ut, Q);
    return c2 - c4;
  });
  return mean_stderr(vals);
}

}  // namespace qchaos
