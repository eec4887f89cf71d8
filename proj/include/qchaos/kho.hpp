#pragma once

#include <cmath>
#include <sstream>

#include "tensor.hpp"

namespace qchaos {

struct FockSpace {
  Index D = 256;
  double omega = 1.0;
  double hbar = 1.0;
  double x_scale() const { return std::sqrt(hbar / (2.0 * omega)); }
};

inline void check_space(const FockSpace& s) {
  if (s.D < 16) throw DomainError("FockSpace: D must be >= 16");
  if (!(s.omega > 0) || !(s.hbar > 0)) throw DomainError("FockSpace: omega and hbar must be positive");
}

struct FockOperators {
  ComplexMatrix a, a_dag, X, P, n;
};

inline RealMatrix lowering_real(Index D) {
  RealMatrix a = RealMatrix::Zero(D, D);
  for (Index k = 1; k < D; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

inline FockOperators fock_operators(const FockSpace& s) {
  check_space(s);
  FockOperators ops;
  const ComplexMatrix a = lowering_real(s.D).cast<cplx>();
  ops.a = a;
  ops.a_dag = a.adjoint();
  ops.X = s.x_scale() * (a + ops.a_dag);
  ops.P = kI * std::sqrt(s.hbar * s.omega / 2.0) * (ops.a_dag - a);
  ops.n = ComplexMatrix::Zero(s.D, s.D);
  for (Index k = 0; k < s.D; ++k) ops.n(k, k) = static_cast<double>(k);
  return ops;
}

// Eigen-decomposition of the truncated position operator (tridiagonal, real).
struct PositionBasis {
  RealVector x;   // eigenvalues
  RealMatrix V;   // columns are eigenvectors in the Fock basis
};

inline PositionBasis position_basis(const FockSpace& s) {
  check_space(s);
  RealVector diag = RealVector::Zero(s.D), sub(s.D - 1);
  for (Index k = 1; k < s.D; ++k) sub(k - 1) = s.x_scale() * std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<RealMatrix> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw Error("position_basis: tridiagonal solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// f(X) in the Fock basis.
inline ComplexMatrix position_function(const PositionBasis& pb, const std::function<cplx(double)>& f) {
  StateVector fx(pb.x.size());
  for (Index i = 0; i < pb.x.size(); ++i) fx(i) = f(pb.x(i));
  const ComplexMatrix v = pb.V.cast<cplx>();
  return v * fx.asDiagonal() * v.transpose();
}

inline double top_population(const StateVector& v, double fraction = 0.1) {
  const Index D = v.size();
  const Index start = D - std::max<Index>(1, static_cast<Index>(std::ceil(fraction * static_cast<double>(D))));
  const double total = v.squaredNorm();
  return total > 0 ? v.tail(D - start).squaredNorm() / total : 0.0;
}

inline StateVector fock_state(Index n, const FockSpace& s) {
  StateVector v = StateVector::Zero(s.D);
  v(n) = 1.0;
  return v;
}

inline StateVector coherent_state(cplx alpha, const FockSpace& s, double guard = 1e-6) {
  check_space(s);
  if (std::norm(alpha) > static_cast<double>(s.D) / 4.0)
    throw DomainError("coherent_state: |alpha|^2 exceeds D/4");
  StateVector v(s.D);
  v(0) = std::exp(-std::norm(alpha) / 2.0);
  for (Index k = 1; k < s.D; ++k) v(k) = v(k - 1) * alpha / std::sqrt(static_cast<double>(k));
  const double tail = top_population(v);
  if (tail > guard) throw LeakageError("coherent_state: tail population above guard, increase D");
  v /= v.norm();
  return v;
}

// Coherent state centered at phase-space point (X, P).
inline cplx coherent_alpha(double x, double p, const FockSpace& s) {
  return {std::sqrt(s.omega / (2.0 * s.hbar)) * x, p / std::sqrt(2.0 * s.omega * s.hbar)};
}

enum class KickOrder { PhaseThenKick, KickThenPhase };

struct KHOFloquet {
  FockSpace space;
  double R = 4.0;
  double K = 0.0;
  double leakage_guard = 1e-6;
  ComplexMatrix U;       // full one-period unitary
  ComplexMatrix kick;    // exp(-i (K/hbar) cos X)
  StateVector phase;     // diagonal of exp(-i (2 pi / R) n)

  StateVector apply(const StateVector& v) const { return phase.cwiseProduct(kick * v); }
  StateVector apply_adjoint(const StateVector& v) const { return kick.adjoint() * phase.conjugate().cwiseProduct(v); }
};

inline StateVector free_phases(const FockSpace& s, double angle) {
  StateVector ph(s.D);
  for (Index k = 0; k < s.D; ++k) ph(k) = std::exp(-kI * (angle * static_cast<double>(k)));
  return ph;
}

// U = exp(-i (2 pi / R) n) exp(-i (K / hbar) cos X).
inline KHOFloquet build_floquet(const FockSpace& s, double R, double K, double guard = 1e-6) {
  check_space(s);
  KHOFloquet f;
  f.space = s;
  f.R = R;
  f.K = K;
  f.leakage_guard = guard;
  const PositionBasis pb = position_basis(s);
  const double hb = s.hbar;
  f.kick = position_function(pb, [K, hb](double x) { return std::exp(-kI * (K / hb) * std::cos(x)); });
  f.phase = free_phases(s, 2.0 * kPi / R);
  f.U = f.phase.asDiagonal() * f.kick;
  if (max_abs(f.U.adjoint() * f.U - ComplexMatrix::Identity(s.D, s.D)) > 1e-10)
    throw Error("build_floquet: result is not unitary within 1e-10");
  return f;
}

inline ComplexMatrix heisenberg_op(const ComplexMatrix& U, const ComplexMatrix& A, int t) {
  ComplexMatrix out = A;
  for (int s = 0; s < t; ++s) out = U.adjoint() * out * U;
  return out;
}

// One Heisenberg step G -> U^† G U using the factorized Floquet operator.
inline ComplexMatrix heisenberg_step(const KHOFloquet& f, const ComplexMatrix& G) {
  const ComplexMatrix pg = f.phase.conjugate().asDiagonal() * G * f.phase.asDiagonal();
  ComplexMatrix tmp;
  tmp.noalias() = f.kick.adjoint() * pg;
  ComplexMatrix out;
  out.noalias() = tmp * f.kick;
  return out;
}

inline void leakage_check(double pop, const KHOFloquet& f, const char* where) {
  if (pop > f.leakage_guard) {
    std::ostringstream os;
    os << where << ": top-level population " << pop << " exceeds guard " << f.leakage_guard
       << " at D=" << f.space.D << ", increase D";
    throw LeakageError(os.str());
  }
}

// A(t) v = U^{†t} A U^t v, with leakage recorded on the forward leg.
inline StateVector heisenberg_apply(const KHOFloquet& f, const ComplexMatrix& A, const StateVector& v, int t,
                                    double* leak) {
  StateVector w = v;
  for (int s = 0; s < t; ++s) {
    w = f.apply(w);
    *leak = std::max(*leak, top_population(w));
  }
  w = A * w;
  *leak = std::max(*leak, top_population(w));
  for (int s = 0; s < t; ++s) w = f.apply_adjoint(w);
  *leak = std::max(*leak, top_population(w));
  return w;
}

struct OtocValue {
  double value = 0.0;
  double leakage = 0.0;
};

inline OtocValue otoc_commutator_state(const KHOFloquet& f, const ComplexMatrix& A, const ComplexMatrix& B,
                                       const StateVector& psi, int t) {
  double leak = top_population(psi);
  const StateVector bpsi = B * psi;
  const StateVector x = heisenberg_apply(f, A, bpsi, t, &leak);
  const StateVector y = B * heisenberg_apply(f, A, psi, t, &leak);
  leak = std::max(leak, top_population(bpsi));
  leakage_check(leak, f, "otoc");
  return {(x - y).squaredNorm() / psi.squaredNorm(), leak};
}

inline double otoc_ladder(const StateVector& psi, const KHOFloquet& f, int t) {
  const FockOperators ops = fock_operators(f.space);
  return otoc_commutator_state(f, ops.a, ops.a_dag, psi, t).value;
}

inline double otoc_xp(const StateVector& psi, const KHOFloquet& f, int t) {
  const FockOperators ops = fock_operators(f.space);
  return otoc_commutator_state(f, ops.X, ops.P, psi, t).value;
}

// Per-Fock-state OTOC values from G = a(t): C_n = || sqrt(n+1) G e_{n+1} - a^† G e_n ||^2.
inline std::vector<double> fock_otocs_from_operator(const ComplexMatrix& G, Index M) {
  const Index D = G.rows();
  std::vector<double> out(M);
  for (Index n = 0; n < M; ++n) {
    StateVector col = std::sqrt(static_cast<double>(n + 1)) * G.col(n + 1);
    col.tail(D - 1) -= G.col(n).head(D - 1).cwiseProduct(
        RealVector::LinSpaced(D - 1, 1, static_cast<double>(D - 1)).cwiseSqrt().cast<cplx>());
    out[n] = col.squaredNorm();
  }
  return out;
}

inline double operator_leakage(const ComplexMatrix& G, Index ncols) {
  double leak = 0.0;
  for (Index c = 0; c < ncols; ++c) leak = std::max(leak, top_population(G.col(c)));
  return leak;
}

struct FockAverageSeries {
  std::vector<int> t;
  std::vector<double> avg;
  double leakage = 0.0;
};

// Mean OTOC over |0>..|M-1> at t = 0, stride, 2 stride, ... <= t_max.
inline FockAverageSeries avg_fock_otoc_series(const KHOFloquet& f, int t_max, Index M, int stride = 1) {
  if (M > f.space.D / 2) throw DomainError("avg_fock_otoc: M must be <= D/2");
  const FockOperators ops = fock_operators(f.space);
  ComplexMatrix G = ops.a;
  FockAverageSeries out;
  for (int t = 0; t <= t_max; ++t) {
    if (t > 0) G = heisenberg_step(f, G);
    if (t % stride != 0) continue;
    const double leak = operator_leakage(G, M + 1);
    out.leakage = std::max(out.leakage, leak);
    leakage_check(leak, f, "avg_fock_otoc");
    const auto vals = fock_otocs_from_operator(G, M);
    double s = 0;
    for (double v : vals) s += v;
    out.t.push_back(t);
    out.avg.push_back(s / static_cast<double>(M));
  }
  return out;
}

inline double avg_fock_otoc(const KHOFloquet& f, int t, Index M) {
  return avg_fock_otoc_series(f, t, M, std::max(1, t)).avg.back();
}

// Closed forms.
inline double r2_vacuum_otoc(double K, double omega, double hbar, int t) {
  return 1.0 + K * K * t * t / (4.0 * omega * omega) * std::exp(-hbar / (2.0 * omega)) * std::cosh(hbar / (2.0 * omega));
}

inline double r2_fock_average_otoc(double K, double omega, int t) { return 1.0 + K * K * t * t / (8.0 * omega * omega); }

// <n| cos^2 X |n> = (1 + e^{-hbar/omega} L_n(2 hbar / omega)) / 2
inline double fock_cos2(Index n, double omega, double hbar) {
  return 0.5 * (1.0 + std::exp(-hbar / omega) * std::laguerre(static_cast<unsigned>(n), 2.0 * hbar / omega));
}

inline double displacement_fock_average(cplx beta, Index M) {
  const double b2 = std::norm(beta);
  double s = 0.0;
  for (Index n = 0; n < M; ++n) s += std::laguerre(static_cast<unsigned>(n), b2);
  return std::exp(-b2 / 2.0) * s / static_cast<double>(M);
}

// Order-K^2 expansion of the ladder OTOC, valid for small K.
inline double otoc_ladder_small_k(const StateVector& psi, const FockSpace& s, double R, double K, int t) {
  const FockOperators ops = fock_operators(s);
  const PositionBasis pb = position_basis(s);
  const ComplexMatrix cosx = position_function(pb, [](double x) { return cplx(std::cos(x)); });
  const ComplexMatrix sinx = position_function(pb, [](double x) { return cplx(std::sin(x)); });
  const double th = 2.0 * kPi / R;
  // f(X_{theta j}) = P^{-j} f(X) P^{j}
  auto rotated = [&](const ComplexMatrix& m, int j) {
    const StateVector ph = free_phases(s, th * j);
    return ComplexMatrix(ph.conjugate().asDiagonal() * m * ph.asDiagonal());
  };
  std::vector<ComplexMatrix> c(t), sn(t);
  for (int j = 0; j < t; ++j) {
    c[j] = rotated(cosx, j);
    sn[j] = rotated(sinx, j);
  }
  StateVector m1 = StateVector::Zero(s.D);
  for (int j = 0; j < t; ++j) m1 += c[j] * psi;
  m1 *= 1.0 / (2.0 * s.omega);
  StateVector m2 = StateVector::Zero(s.D);
  const ComplexMatrix& ad = ops.a_dag;
  for (int j = 0; j < t; ++j)
    for (int n = 0; n < j; ++n) {
      const ComplexMatrix inner = c[n] * sn[j] - sn[j] * c[n];
      m2 += std::exp(kI * (th * j)) * (inner * (ad * psi) - ad * (inner * psi));
    }
  m2 *= -1.0 / (s.hbar * std::sqrt(2.0 * s.hbar * s.omega));
  return 1.0 + K * K * (m1.squaredNorm() + 2.0 * psi.dot(m2).real());
}

}  // namespace qchaos
