#pragma once

#include <cmath>
#include <vector>

#include "kho.hpp"
#include "stats.hpp"

namespace qchaos {

// Encoding unitary U_omega = Kick * exp(-i omega tau n), omega taken from the FockSpace.
struct EncodingFloquet {
  FockSpace space;
  double tau = 1.0;
  double K = 0.0;
  double leakage_guard = 1e-6;
  ComplexMatrix kick;
  StateVector phase;

  StateVector apply(const StateVector& v) const { return kick * phase.cwiseProduct(v); }
  StateVector apply_adjoint(const StateVector& v) const { return phase.conjugate().cwiseProduct(kick.adjoint() * v); }
  ComplexMatrix matrix() const { return kick * phase.asDiagonal(); }
  // U^† G U
  ComplexMatrix conjugate(const ComplexMatrix& G) const {
    ComplexMatrix tmp;
    tmp.noalias() = kick.adjoint() * G;
    ComplexMatrix out;
    out.noalias() = tmp * kick;
    return phase.conjugate().asDiagonal() * out * phase.asDiagonal();
  }
};

inline EncodingFloquet build_encoding(const FockSpace& s, double tau, double K, double guard = 1e-6) {
  check_space(s);
  EncodingFloquet f;
  f.space = s;
  f.tau = tau;
  f.K = K;
  f.leakage_guard = guard;
  const PositionBasis pb = position_basis(s);
  const double hb = s.hbar;
  f.kick = position_function(pb, [K, hb](double x) { return std::exp(-kI * (K / hb) * std::cos(x)); });
  f.phase = free_phases(s, s.omega * tau);
  return f;
}

// tau = 2 pi / (R omega)
inline double tau_for(double R, double omega) { return 2.0 * kPi / (R * omega); }

struct QFIGenerator {
  int t = 0;
  ComplexMatrix matrix;
  double omega = 0.0, tau = 0.0, K = 0.0;
};

// i U^† dU/domega = tau n + (K / 2 omega hbar) A sin A,  A = P^† X P.
inline ComplexMatrix generator_one_step(const FockSpace& s, double tau, double K) {
  check_space(s);
  const PositionBasis pb = position_basis(s);
  ComplexMatrix h = position_function(pb, [](double x) { return cplx(x * std::sin(x)); });
  const StateVector ph = free_phases(s, s.omega * tau);
  h = ph.conjugate().asDiagonal() * h * ph.asDiagonal();
  h *= K / (2.0 * s.omega * s.hbar);
  for (Index k = 0; k < s.D; ++k) h(k, k) += tau * static_cast<double>(k);
  return (h + h.adjoint()) / 2.0;
}

// Sum_{j<t} U^{-j} h(1) U^j, via H_t = h(1) + U^† H_{t-1} U. Leakage probed on the lowest D/4 columns.
inline QFIGenerator generator_t(const FockSpace& s, double tau, double K, int t, double guard = 1e-6) {
  if (t < 1) throw DomainError("generator_t: t must be >= 1");
  const EncodingFloquet f = build_encoding(s, tau, K, guard);
  const ComplexMatrix h1 = generator_one_step(s, tau, K);
  ComplexMatrix h = h1;
  for (int j = 1; j < t; ++j) h = h1 + f.conjugate(h);
  const Index probe = std::max<Index>(1, s.D / 4);
  const Index top = std::max<Index>(1, static_cast<Index>(std::ceil(0.1 * static_cast<double>(s.D))));
  const double total = h.leftCols(probe).squaredNorm();
  const double leak = total > 0 ? h.bottomLeftCorner(top, probe).squaredNorm() / total : 0.0;
  if (leak > guard) {
    std::ostringstream os;
    os << "generator_t: top-level weight " << leak << " exceeds guard at D=" << s.D << ", increase D";
    throw LeakageError(os.str());
  }
  return {t, (h + h.adjoint()) / 2.0, s.omega, tau, K};
}

inline double qfi_variance(const StateVector& psi, const ComplexMatrix& h) {
  const StateVector hp = h * psi;
  const double nrm = psi.squaredNorm();
  const cplx mean = psi.dot(hp) / nrm;
  return std::max(0.0, 4.0 * (hp - mean * psi).squaredNorm() / nrm);
}

inline double qfi_variance(const StateVector& psi, const QFIGenerator& g) { return qfi_variance(psi, g.matrix); }

// R = 2 (omega tau = pi) closed form:
// h(t) = tau [t n + i k S1 (a^† sinX - sinX a) + k^2 S2 sin^2 X] + (K t / 2 omega hbar) X sinX,  k = K / sqrt(2 omega hbar).
struct R2GeneratorParts {
  ComplexMatrix n, cross, sin2, xsin;
  double tau = 0.0, kappa = 0.0, xcoef = 0.0;
};

inline R2GeneratorParts r2_generator_parts(const FockSpace& s, double K) {
  const FockOperators ops = fock_operators(s);
  const PositionBasis pb = position_basis(s);
  const ComplexMatrix sinx = position_function(pb, [](double x) { return cplx(std::sin(x)); });
  R2GeneratorParts p;
  p.n = ops.n;
  p.cross = kI * (ops.a_dag * sinx - sinx * ops.a);
  p.sin2 = position_function(pb, [](double x) { return cplx(std::sin(x) * std::sin(x)); });
  p.xsin = position_function(pb, [](double x) { return cplx(x * std::sin(x)); });
  p.tau = kPi / s.omega;
  p.kappa = K / std::sqrt(2.0 * s.omega * s.hbar);
  p.xcoef = K / (2.0 * s.omega * s.hbar);
  return p;
}

inline double s1_poly(double t) { return t * (t - 1.0) / 2.0; }
inline double s2_poly(double t) { return t * (t - 1.0) * (2.0 * t - 1.0) / 6.0; }

inline ComplexMatrix r2_generator(const R2GeneratorParts& p, double t) {
  return p.tau * (t * p.n + p.kappa * s1_poly(t) * p.cross + p.kappa * p.kappa * s2_poly(t) * p.sin2) +
         p.xcoef * t * p.xsin;
}

// QFI of the closed-form generator at many t from four fixed vectors.
inline std::vector<double> r2_qfi_series(const R2GeneratorParts& p, const StateVector& psi, const std::vector<double>& ts) {
  const StateVector vn = p.n * psi, vc = p.cross * psi, vs = p.sin2 * psi, vx = p.xsin * psi;
  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) {
    const StateVector hp = p.tau * (t * vn + p.kappa * s1_poly(t) * vc + p.kappa * p.kappa * s2_poly(t) * vs) +
                           p.xcoef * t * vx;
    const cplx mean = psi.dot(hp);
    out.push_back(4.0 * (hp - mean * psi).squaredNorm());
  }
  return out;
}

struct QFISeries {
  std::vector<int> t;
  std::vector<double> qfi;
  std::vector<double> mean_n;
  double leakage = 0.0;
};

// QFI by propagating d psi_t / d omega:  dpsi_{t+1} = U (-i h(1) psi_t + dpsi_t).
inline QFISeries qfi_series(const StateVector& psi0, const FockSpace& s, double tau, double K, int t_max, int stride = 1,
                            double guard = 1e-6) {
  const EncodingFloquet f = build_encoding(s, tau, K, guard);
  const ComplexMatrix h1 = generator_one_step(s, tau, K);
  StateVector psi = psi0 / psi0.norm();
  StateVector dpsi = StateVector::Zero(s.D);
  QFISeries out;
  for (int t = 1; t <= t_max; ++t) {
    dpsi = f.apply(-kI * (h1 * psi) + dpsi);
    psi = f.apply(psi);
    if (t % stride != 0 && t != t_max) continue;
    const double leak = top_population(psi);
    out.leakage = std::max(out.leakage, leak);
    if (leak > guard) {
      std::ostringstream os;
      os << "qfi_series: top-level population " << leak << " exceeds guard at D=" << s.D << ", increase D";
      throw LeakageError(os.str());
    }
    const cplx ov = psi.dot(dpsi);
    out.t.push_back(t);
    out.qfi.push_back(std::max(0.0, 4.0 * (dpsi.squaredNorm() - std::norm(ov))));
    double n = 0.0;
    for (Index k = 0; k < s.D; ++k) n += static_cast<double>(k) * std::norm(psi(k));
    out.mean_n.push_back(n);
  }
  return out;
}

// |<psi| U_{omega+eps}^{†t} U_omega^t |psi>|^2 for t = 1..t_max.
inline std::vector<double> loschmidt_series(const StateVector& psi0, const FockSpace& s, double eps, double tau, double K,
                                            int t_max, double guard = 1e-6) {
  if (eps < 0) throw DomainError("loschmidt_echo: eps must be >= 0");
  FockSpace sp = s;
  sp.omega = s.omega + eps;
  const EncodingFloquet f0 = build_encoding(s, tau, K, guard), f1 = build_encoding(sp, tau, K, guard);
  StateVector a = psi0 / psi0.norm(), b = a;
  std::vector<double> out;
  for (int t = 1; t <= t_max; ++t) {
    a = f0.apply(a);
    b = eps == 0.0 ? a : f1.apply(b);
    const double leak = std::max(top_population(a), top_population(b));
    if (leak > guard) throw LeakageError("loschmidt_echo: top-level population exceeds guard, increase D");
    out.push_back(std::min(1.0, std::norm(b.dot(a))));
  }
  return out;
}

inline double loschmidt_echo(const StateVector& psi, const FockSpace& s, double eps, int t, double tau, double K,
                             double guard = 1e-6) {
  if (t < 1) return 1.0;
  return loschmidt_series(psi, s, eps, tau, K, t, guard).back();
}

struct FiniteDifferenceQFI {
  double value = 0.0;
  double residual = 0.0;
  std::vector<double> raw;  // 4 (1 - echo) / eps^2 per ladder entry
};

inline std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  RealMatrix A(static_cast<Index>(x.size()), degree + 1);
  RealVector b(static_cast<Index>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      A(static_cast<Index>(i), k) = p;
      p *= x[i];
    }
    b(static_cast<Index>(i)) = y[i];
  }
  const RealVector c = A.colPivHouseholderQr().solve(b);
  return {c.data(), c.data() + c.size()};
}

// Extrapolates 4(1 - echo)/eps^2 to eps -> 0 with a polynomial in eps. Throws when the
// full-ladder and reduced-ladder extrapolations differ by more than tol.
inline FiniteDifferenceQFI qfi_finite_difference(const StateVector& psi, const FockSpace& s, int t, double tau, double K,
                                                 std::vector<double> ladder = {1e-3, 5e-4, 2.5e-4}, double tol = 0.01,
                                                 double guard = 1e-6) {
  if (ladder.size() < 3) throw DomainError("qfi_finite_difference: ladder needs >= 3 values");
  std::sort(ladder.begin(), ladder.end());
  FiniteDifferenceQFI out;
  for (double e : ladder) {
    if (!(e > 0)) throw DomainError("qfi_finite_difference: ladder values must be positive");
    out.raw.push_back(4.0 * (1.0 - loschmidt_echo(psi, s, e, t, tau, K, guard)) / (e * e));
  }
  const int deg = std::min<int>(2, static_cast<int>(ladder.size()) - 1);
  out.value = polyfit(ladder, out.raw, deg)[0];
  const std::vector<double> small(ladder.begin(), ladder.end() - 1), small_raw(out.raw.begin(), out.raw.end() - 1);
  const double reduced = polyfit(small, small_raw, std::min<int>(deg - 1, static_cast<int>(small.size()) - 1))[0];
  out.residual = std::abs(out.value - reduced) / std::max(std::abs(out.value), 1e-12);
  if (out.residual > tol) {
    std::ostringstream os;
    os << "qfi_finite_difference: ladder residual " << out.residual << " above " << tol << ", eps too large";
    throw DomainError(os.str());
  }
  return out;
}

// <l| n(t) |l> <= l + sqrt(2l) K t / sqrt(omega hbar) + K^2 t^2 / (2 omega hbar)
inline double fock_energy_bound(Index l, double K, double omega, double hbar, int t) {
  const double k = K * t / std::sqrt(2.0 * omega * hbar);
  const double r = std::sqrt(static_cast<double>(l)) + k;
  return r * r;
}

inline double mean_energy(const StateVector& psi0, const EncodingFloquet& f, int t) {
  StateVector psi = psi0 / psi0.norm();
  for (int s = 0; s < t; ++s) psi = f.apply(psi);
  const double leak = top_population(psi);
  if (leak > f.leakage_guard) throw LeakageError("mean_energy: top-level population exceeds guard, increase D");
  double n = 0.0;
  for (Index k = 0; k < psi.size(); ++k) n += static_cast<double>(k) * std::norm(psi(k));
  Index nz = 0, which = 0;
  for (Index k = 0; k < psi0.size(); ++k)
    if (psi0(k) != cplx(0.0)) {
      ++nz;
      which = k;
    }
  if (nz == 1) {
    const double bound = fock_energy_bound(which, f.K, f.space.omega, f.space.hbar, t);
    if (n > bound * (1.0 + 1e-9) + 1e-9) throw Error("mean_energy: Fock-state energy bound violated");
  }
  return n;
}

// R = 2: <n| n(t) |n> = n + (K^2 t^2 / 4 omega)(1 - e^{-1/omega} L_n(2/omega)),  hbar = 1.
inline double r2_fock_mean_energy(Index n, double K, double omega, int t) {
  return static_cast<double>(n) +
         K * K * t * t / (4.0 * omega) * (1.0 - std::exp(-1.0 / omega) * std::laguerre(static_cast<unsigned>(n), 2.0 / omega));
}

// Log-log fit over the final decade of (t, y).
inline LinearFit final_decade_fit(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.empty()) throw DomainError("final_decade_fit: empty series");
  const double tmax = t.back();
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= tmax / 10.0) {
      xs.push_back(t[i]);
      ys.push_back(y[i]);
    }
  return loglog_fit(xs, ys);
}

inline LinearFit window_fit(const std::vector<double>& t, const std::vector<double>& y, double lo, double hi) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] >= lo && t[i] <= hi) {
      xs.push_back(t[i]);
      ys.push_back(y[i]);
    }
  return loglog_fit(xs, ys);
}

}  // namespace qchaos
