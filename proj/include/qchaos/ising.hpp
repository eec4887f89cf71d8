#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "designs.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "tensor.hpp"

namespace qchaos {

enum class Boundary { PBC, OBC, WeakBond };
enum class DisorderKind { None, Bond, Field };

inline const char* to_string(Boundary b) {
  switch (b) {
    case Boundary::PBC: return "pbc";
    case Boundary::OBC: return "obc";
    case Boundary::WeakBond: return "weak-bond";
  }
  return "?";
}

inline const char* to_string(DisorderKind k) {
  switch (k) {
    case DisorderKind::None: return "none";
    case DisorderKind::Bond: return "bond";
    case DisorderKind::Field: return "field";
  }
  return "?";
}

struct IsingSpec {
  int N = 12;
  Boundary bc = Boundary::PBC;
  double J = 1.0;
  double J_1N = 0.5;  // WeakBond only
  double h_x = (std::sqrt(5.0) + 1.0) / 4.0;
  double h_y = (std::sqrt(5.0) + 5.0) / 8.0;
  DisorderKind disorder = DisorderKind::None;
  double v = 0.0;  // variance of the Gaussian disorder
  std::uint64_t seed = 0;
};

// H = sum_b J_b X_i X_j + sum_i hx_i X_i + sum_i hy_i Y_i, applied without storing a matrix.
struct IsingHamiltonian {
  struct Bond {
    int i, j;
    double J;
  };
  int N = 0;
  std::vector<Bond> bonds;
  std::vector<double> hx, hy;

  Index dim() const { return ipow(2, N); }

  // Upper bound on the spectral radius.
  double norm_bound() const {
    double s = 0.0;
    for (const auto& b : bonds) s += std::abs(b.J);
    for (int i = 0; i < N; ++i) s += std::abs(hx[i]) + std::abs(hy[i]);
    return s;
  }

  Index mask(int site) const { return Index{1} << (N - 1 - site); }

  // out = H psi
  void apply(const StateVector& psi, StateVector& out) const {
    const Index dim = psi.size();
    out.setZero(dim);
    for (const auto& b : bonds) {
      const Index m = mask(b.i) | mask(b.j);
      for (Index x = 0; x < dim; ++x) out(x) += b.J * psi(x ^ m);
    }
    for (int i = 0; i < N; ++i) {
      const Index m = mask(i);
      const cplx iy(0.0, hy[i]);
      for (Index x = 0; x < dim; ++x) {
        // Y|0> = i|1>, Y|1> = -i|0>: <x|Y|x^m> = i for x bit set, -i otherwise.
        const cplx yx = (x & m) ? iy : -iy;
        out(x) += hx[i] * psi(x ^ m) + yx * psi(x ^ m);
      }
    }
  }

  StateVector operator*(const StateVector& psi) const {
    StateVector out;
    apply(psi, out);
    return out;
  }

  ComplexMatrix dense() const {
    if (N > 12) throw DomainError("IsingHamiltonian::dense: N above 12");
    ComplexMatrix h(dim(), dim());
    for (Index x = 0; x < dim(); ++x) {
      StateVector e = StateVector::Zero(dim());
      e(x) = 1.0;
      h.col(x) = *this * e;
    }
    return h;
  }
};

inline IsingHamiltonian build_ising(const IsingSpec& s) {
  if (s.N < 2 || s.N > 14) throw DomainError("ising: N must be in [2, 14]");
  if (s.v < 0.0) throw DomainError("ising: disorder variance must be >= 0");
  IsingHamiltonian h;
  h.N = s.N;
  h.hx.assign(s.N, s.h_x);
  h.hy.assign(s.N, s.h_y);
  Rng rng(s.seed, 41);
  std::vector<double> eta(s.N, 0.0), xi(s.N, 0.0);
  const double sd = std::sqrt(s.v);
  if (s.disorder == DisorderKind::Bond)
    for (auto& e : eta) e = sd * rng.normal();
  if (s.disorder == DisorderKind::Field)
    for (auto& e : xi) e = sd * rng.normal();
  for (int i = 0; i < s.N; ++i) h.hy[i] += xi[i];
  for (int i = 0; i + 1 < s.N; ++i) h.bonds.push_back({i, i + 1, s.J + eta[i]});
  if (s.bc == Boundary::PBC) h.bonds.push_back({s.N - 1, 0, s.J + eta[s.N - 1]});
  if (s.bc == Boundary::WeakBond) h.bonds.push_back({s.N - 1, 0, s.J_1N + eta[s.N - 1]});
  return h;
}

inline ComplexMatrix build_hamiltonian(const IsingSpec& s) { return build_ising(s).dense(); }

// exp(-i H tau) psi by a Chebyshev series with Bessel coefficients, truncated at 1e-15.
inline StateVector evolve(const StateVector& psi, const IsingHamiltonian& h, double tau) {
  if (tau == 0.0) return psi;
  const double a = 1.01 * h.norm_bound();
  const double x = a * tau;
  const auto scaled = [&](const StateVector& v) { return StateVector(h * v / a); };
  StateVector t0 = psi, t1 = scaled(psi);
  StateVector out = std::cyl_bessel_j(0.0, std::abs(x)) * t0;
  const double sgn = tau > 0 ? 1.0 : -1.0;
  cplx ik = cplx(0.0, -sgn);  // (-i)^k for tau > 0
  out += 2.0 * ik * std::cyl_bessel_j(1.0, std::abs(x)) * t1;
  for (int k = 2;; ++k) {
    const double jk = std::cyl_bessel_j(static_cast<double>(k), std::abs(x));
    StateVector t2 = 2.0 * scaled(t1) - t0;
    ik *= cplx(0.0, -sgn);
    out += 2.0 * ik * jk * t2;
    t0.swap(t1);
    t1.swap(t2);
    if (k > std::abs(x) + 10 && std::abs(jk) < 1e-15) break;
    if (k > 100000) throw Error("evolve: Chebyshev series did not converge");
  }
  return out;
}

// Dense spectral reference.
inline StateVector evolve_dense(const StateVector& psi, const ComplexMatrix& h, double tau) {
  return herm_fn(h, [tau](double e) { return std::exp(cplx(0.0, -e * tau)); }) * psi;
}

inline StateVector all_zero_state(int n) {
  StateVector s = StateVector::Zero(ipow(2, n));
  s(0) = 1.0;
  return s;
}

// sum_j |gamma_j^2 - 1/d_A| over all d_A Schmidt slots.
inline double schmidt_delta1(const StateVector& psi, const SubsystemSplit& split) {
  const std::vector<double> g = schmidt_coefficients(psi, split);
  double s = 0.0;
  for (Index j = 0; j < split.dimA; ++j) {
    const double gj = j < static_cast<Index>(g.size()) ? g[j] : 0.0;
    s += std::abs(gj * gj - 1.0 / static_cast<double>(split.dimA));
  }
  return s;
}

// ---------------------------------------------------------------- time series

struct DeltaSeries {
  std::vector<double> tau;
  std::vector<int> ts;
  std::vector<std::vector<double>> delta;  // delta[k][i]: moment ts[k] at tau[i]
  std::vector<double> translation_residual;
};

// Propagates |0...0> along an increasing tau grid.
inline DeltaSeries delta_timeseries(const IsingSpec& spec, int n_a, const std::vector<int>& ts,
                                    const std::vector<double>& tau, const BasisSpec& bspec = {}) {
  for (std::size_t i = 1; i < tau.size(); ++i)
    if (tau[i] < tau[i - 1]) throw DomainError("delta_timeseries: tau grid must be increasing");
  if (n_a < 1 || n_a >= spec.N) throw DomainError("delta_timeseries: need 1 <= N_A < N");
  const IsingHamiltonian h = build_ising(spec);
  const MeasurementBasis basis = build_basis(bspec, spec.N - n_a);
  const SubsystemSplit split{ipow(2, n_a), ipow(2, spec.N - n_a)};
  DeltaSeries out;
  out.tau = tau;
  out.ts = ts;
  out.delta.assign(ts.size(), {});
  StateVector psi = all_zero_state(spec.N);
  double now = 0.0;
  for (double t : tau) {
    psi = evolve(psi, h, t - now);
    psi /= psi.norm();
    now = t;
    const ProjectedEnsemble e = projected_ensemble(psi, basis, split);
    for (std::size_t k = 0; k < ts.size(); ++k) out.delta[k].push_back(delta_t(e, ts[k]));
    out.translation_residual.push_back((apply_translation(psi, spec.N, 2, 1) - psi).norm());
  }
  return out;
}

struct SeriesSummary {
  LinearFit early;  // log-log over the early window
  bool early_ok = false;
  double late_mean = 0.0;
  double late_sigma = 0.0;  // temporal standard deviation
  std::size_t late_count = 0;
};

inline SeriesSummary summarize_series(const std::vector<double>& tau, const std::vector<double>& delta,
                                      double early_lo = 1.0, double early_hi = 4.0) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < tau.size(); ++i)
    if (tau[i] >= early_lo && tau[i] <= early_hi) {
      x.push_back(tau[i]);
      y.push_back(delta[i]);
    }
  SeriesSummary s;
  s.early = loglog_fit(x, y);
  s.early_ok = s.early.r2 >= 0.95;
  const std::size_t start = tau.size() - tau.size() / 3;
  std::vector<double> late(delta.begin() + static_cast<std::ptrdiff_t>(start), delta.end());
  const Estimate e = mean_stderr(late);
  s.late_mean = e.mean;
  s.late_sigma = sample_stddev(late);
  s.late_count = late.size();
  return s;
}

// ---------------------------------------------------------------- random-state baselines

struct Baseline {
  std::vector<Estimate> per_t;  // mean and standard error, one per requested t
  std::vector<double> sigma;    // sample standard deviation
};

// Delta^(t) over random states of a symmetry sector; q = null gives Haar states.
inline Baseline delta_baseline(const SymmetryProjector* q, int n, int n_a, const std::vector<int>& ts,
                               int n_samples, std::uint64_t seed) {
  BasisSpec comp;
  const auto samples = delta_samples(q, build_basis(comp, n - n_a), n_a, ts, n_samples, seed);
  Baseline b;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    std::vector<double> xs;
    for (const auto& s : samples) xs.push_back(s.delta[k]);
    b.per_t.push_back(mean_stderr(xs));
    b.sigma.push_back(sample_stddev(xs));
  }
  return b;
}

// Random states R_0^{N-1} ... R_0^0 T_0 |psi>, computational-basis measurements.
inline Baseline rmt_baseline(int n, int n_a, const std::vector<int>& ts, int n_samples, std::uint64_t seed) {
  const SymmetryProjector q = build_projector(SymmetryKind::TranslationPlusReflection, 0, n);
  return delta_baseline(&q, n, n_a, ts, n_samples, seed);
}

// ---------------------------------------------------------------- disorder averages

struct DisorderAverage {
  Estimate exponent;  // mean and standard error of the early exponent over realizations
  std::vector<double> exponents;
};

inline DisorderAverage disorder_exponent(IsingSpec spec, int n_a, int t, const std::vector<double>& tau,
                                         int realizations) {
  const auto ex = parallel_map<double>(static_cast<std::size_t>(realizations), [&](std::size_t r) {
    IsingSpec s = spec;
    s.seed = spec.seed + r;
    const DeltaSeries d = delta_timeseries(s, n_a, {t}, tau);
    return summarize_series(d.tau, d.delta[0]).early.slope;
  });
  DisorderAverage out;
  out.exponents = ex;
  out.exponent = mean_stderr(ex);
  return out;
}

inline std::vector<double> linear_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(lo + step * static_cast<double>(i));
  return g;
}

}  // namespace qchaos
