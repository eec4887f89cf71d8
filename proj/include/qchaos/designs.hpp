#pragma once

#include <Eigen/Eigenvalues>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "parallel.hpp"
#include "rmt.hpp"
#include "rng.hpp"
#include "sites.hpp"
#include "stats.hpp"
#include "tensor.hpp"

// Projected ensembles of symmetric generator states.
// Sites are 0-based, site 0 is the most significant digit. A = leading N_A sites, B = trailing N_B sites.

namespace qchaos {

// ---------------------------------------------------------------- site permutations

// perm[i] = destination site of site i. Returns y(x): the basis label after the move.
inline std::vector<Index> site_permutation_map(const std::vector<int>& perm, Index d) {
  const int n = static_cast<int>(perm.size());
  const Index dim = ipow(d, n);
  std::vector<Index> place(n);
  for (int i = 0; i < n; ++i) place[i] = ipow(d, n - 1 - perm[i]);
  std::vector<Index> out(dim);
  for (Index x = 0; x < dim; ++x) {
    Index r = x, y = 0;
    for (int i = n - 1; i >= 0; --i) {
      y += (r % d) * place[i];
      r /= d;
    }
    out[x] = y;
  }
  return out;
}

inline std::vector<int> shift_sites(int n, int j) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = ((i + j) % n + n) % n;
  return p;
}

// Reflection about site c: i -> 2c - i (mod n).
inline std::vector<int> reflect_about_site(int n, int c) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = ((2 * c - i) % n + n) % n;
  return p;
}

// Mirror of the open chain: i -> n - 1 - i.
inline std::vector<int> mirror_sites(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = n - 1 - i;
  return p;
}

// Number of cycles of the site shift by j.
inline int shift_cycle_count(int n, int j) {
  std::vector<int> seen(n, 0);
  const std::vector<int> p = shift_sites(n, j);
  int cycles = 0;
  for (int s = 0; s < n; ++s) {
    if (seen[s]) continue;
    ++cycles;
    for (int x = s; !seen[x]; x = p[x]) seen[x] = 1;
  }
  return cycles;
}

// Tr(sum_j e^{2 pi i j k/N} T^j) by counting cycles: Tr(T^j) = d^{#cycles}.
inline double translation_projector_trace_cycles(int n, Index d, int k) {
  cplx acc = 0.0;
  for (int j = 0; j < n; ++j)
    acc += std::polar(1.0, 2.0 * kPi * j * k / n) * static_cast<double>(ipow(d, shift_cycle_count(n, j)));
  return acc.real();
}

inline bool is_prime(int n) {
  if (n < 2) return false;
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) return false;
  return true;
}

inline double translation_projector_trace_prime(int n, Index d, int k) {
  if (!is_prime(n)) throw DomainError("translation_projector_trace_prime: N must be prime");
  const double dn = static_cast<double>(ipow(d, n)), dd = static_cast<double>(d);
  return (((k % n) + n) % n == 0) ? dn + dd * (n - 1) : dn - dd;
}

// ---------------------------------------------------------------- symmetry projectors

enum class SymmetryKind { Translation, Z2, Reflection, U1, TranslationPlusReflection };

inline const char* to_string(SymmetryKind k) {
  switch (k) {
    case SymmetryKind::Translation: return "translation";
    case SymmetryKind::Z2: return "z2";
    case SymmetryKind::Reflection: return "reflection";
    case SymmetryKind::U1: return "u1";
    case SymmetryKind::TranslationPlusReflection: return "translation+reflection";
  }
  return "?";
}

// One factor: sum_g coeff_g P_g, optionally followed by a diagonal mask.
struct ProjectorStage {
  std::vector<cplx> coeff;
  std::vector<std::vector<Index>> maps;  // empty map = identity
  RealVector mask;                       // size 0 = no mask

  StateVector apply(const StateVector& psi) const {
    StateVector out = StateVector::Zero(psi.size());
    if (maps.empty()) {
      out = psi;
    } else {
      for (std::size_t g = 0; g < maps.size(); ++g) {
        const cplx c = coeff[g];
        if (maps[g].empty()) {
          out += c * psi;
          continue;
        }
        const auto& m = maps[g];
        for (Index x = 0; x < psi.size(); ++x) out(m[x]) += c * psi(x);
      }
    }
    if (mask.size()) out = out.cwiseProduct(mask.cast<cplx>());
    return out;
  }
};

// Translation: T_k = sum_j e^{2 pi i j k/N} T^j, norm N, T phi = e^{-2 pi i k/N} phi.
// Z2: Z_k = I + (-1)^k prod sigma^x, norm 2. Reflection: I + (-1)^k R (mirror), norm 2.
// U1: projector on sum_j (-1)^{f_j+1} = charge, norm 1.
// TranslationPlusReflection: R^{N-1}_0 ... R^0_0 T_0 (charge 0), norm_const 0 (not idempotent).
struct SymmetryProjector {
  SymmetryKind kind = SymmetryKind::Translation;
  int charge = 0;
  int N = 1;
  Index d = 2;
  double norm_const = 1.0;
  std::vector<ProjectorStage> stages;  // applied first to last

  Index dim() const { return ipow(d, N); }

  StateVector apply(const StateVector& psi) const {
    if (psi.size() != dim()) throw DimensionError("SymmetryProjector: state dimension mismatch");
    StateVector v = psi;
    for (const auto& s : stages) v = s.apply(v);
    return v;
  }

  ComplexMatrix matrix() const {
    if (dim() > 4096) throw DomainError("SymmetryProjector::matrix: dimension above 4096");
    ComplexMatrix m(dim(), dim());
    for (Index x = 0; x < dim(); ++x) {
      StateVector e = StateVector::Zero(dim());
      e(x) = 1.0;
      m.col(x) = apply(e);
    }
    return m;
  }
};

namespace detail {

inline ProjectorStage two_term_stage(const std::vector<Index>& g, double sign) {
  ProjectorStage s;
  s.coeff = {1.0, sign};
  s.maps = {{}, g};
  return s;
}

inline std::vector<Index> global_flip_map(int n) {
  const Index dim = ipow(2, n);
  std::vector<Index> m(dim);
  for (Index x = 0; x < dim; ++x) m[x] = (dim - 1) ^ x;
  return m;
}

}  // namespace detail

inline SymmetryProjector build_projector(SymmetryKind kind, int charge, int n_sites, Index d = 2) {
  if (n_sites < 1 || d < 2) throw DomainError("build_projector: need N >= 1 and d >= 2");
  if (ipow(d, n_sites) > (Index{1} << 16)) throw DomainError("build_projector: d^N above 2^16");
  SymmetryProjector q;
  q.kind = kind;
  q.charge = charge;
  q.N = n_sites;
  q.d = d;
  const auto parity_sign = [&](const char* what) {
    if (charge != 0 && charge != 1) throw DomainError(std::string(what) + ": charge must be 0 or 1");
    return charge == 0 ? 1.0 : -1.0;
  };
  switch (kind) {
    case SymmetryKind::Translation: {
      if (charge < 0 || charge >= n_sites) throw DomainError("translation: charge must be in [0, N)");
      ProjectorStage s;
      for (int j = 0; j < n_sites; ++j) {
        s.coeff.push_back(std::polar(1.0, 2.0 * kPi * j * charge / n_sites));
        s.maps.push_back(j == 0 ? std::vector<Index>{} : site_permutation_map(shift_sites(n_sites, j), d));
      }
      q.stages.push_back(std::move(s));
      q.norm_const = n_sites;
      break;
    }
    case SymmetryKind::Z2: {
      if (d != 2) throw DomainError("z2: qubits only");
      q.stages.push_back(detail::two_term_stage(detail::global_flip_map(n_sites), parity_sign("z2")));
      q.norm_const = 2.0;
      break;
    }
    case SymmetryKind::Reflection: {
      q.stages.push_back(
          detail::two_term_stage(site_permutation_map(mirror_sites(n_sites), d), parity_sign("reflection")));
      q.norm_const = 2.0;
      break;
    }
    case SymmetryKind::U1: {
      if (d != 2) throw DomainError("u1: qubits only");
      if (std::abs(charge) > n_sites || (charge + n_sites) % 2 != 0)
        throw DomainError("u1: charge must have the parity of N and |charge| <= N");
      ProjectorStage s;
      s.mask = RealVector::Zero(q.dim());
      for (Index x = 0; x < q.dim(); ++x) {
        const int ones = std::popcount(static_cast<std::uint64_t>(x));
        if (2 * ones - n_sites == charge) s.mask(x) = 1.0;
      }
      q.stages.push_back(std::move(s));
      q.norm_const = 1.0;
      break;
    }
    case SymmetryKind::TranslationPlusReflection: {
      if (charge != 0) throw DomainError("translation+reflection: only charge 0");
      q = build_projector(SymmetryKind::Translation, 0, n_sites, d);
      q.kind = kind;
      for (int c = 0; c < n_sites; ++c)
        q.stages.push_back(detail::two_term_stage(site_permutation_map(reflect_about_site(n_sites, c), d), 1.0));
      q.norm_const = 0.0;
      break;
    }
  }
  return q;
}

// Distance of phi from the declared charge sector.
inline double symmetry_residual(const SymmetryProjector& q, const StateVector& phi) {
  const Index d = q.d;
  const int n = q.N;
  switch (q.kind) {
    case SymmetryKind::Translation:
      return (apply_translation(phi, n, d, 1) - std::polar(1.0, -2.0 * kPi * q.charge / n) * phi).norm();
    case SymmetryKind::Z2:
    case SymmetryKind::Reflection: {
      const std::vector<Index> m = q.kind == SymmetryKind::Z2 ? detail::global_flip_map(n)
                                                                : site_permutation_map(mirror_sites(n), d);
      StateVector g(phi.size());
      for (Index x = 0; x < phi.size(); ++x) g(m[x]) = phi(x);
      return (g - (q.charge == 0 ? 1.0 : -1.0) * phi).norm();
    }
    case SymmetryKind::U1: return (phi - q.stages[0].apply(phi)).norm();
    case SymmetryKind::TranslationPlusReflection: {
      double r = (apply_translation(phi, n, d, 1) - phi).norm();
      for (int c = 0; c < n; ++c) {
        const std::vector<Index> m = site_permutation_map(reflect_about_site(n, c), d);
        StateVector g(phi.size());
        for (Index x = 0; x < phi.size(); ++x) g(m[x]) = phi(x);
        r = std::max(r, (g - phi).norm());
      }
      return r;
    }
  }
  return 0.0;
}

// Q|psi>/norm with |psi> Haar random. Resamples up to 5 times when the projection vanishes.
inline StateVector sample_symmetric_state(const SymmetryProjector& q, Rng& rng) {
  for (int attempt = 0; attempt < 5; ++attempt) {
    StateVector v = q.apply(random_state(q.dim(), rng));
    const double nv = v.norm();
    if (nv > 1e-10) return v / nv;
  }
  throw DomainError("sample_symmetric_state: projection annihilated 5 samples");
}

inline StateVector sample_symmetric_state(const SymmetryProjector& q, std::uint64_t seed) {
  Rng rng(seed);
  return sample_symmetric_state(q, rng);
}

// Haar generator when q is null.
inline StateVector sample_generator(const SymmetryProjector* q, Index dim, Rng& rng) {
  return q ? sample_symmetric_state(*q, rng) : random_state(dim, rng);
}

// ---------------------------------------------------------------- measurement bases

enum class BasisKind { Computational, LocalProduct, GlobalHaar, EigTB, EigUTB, EigTB2, EigTB3, AlphaMix, SigmaX };

inline const char* to_string(BasisKind k) {
  switch (k) {
    case BasisKind::Computational: return "computational";
    case BasisKind::LocalProduct: return "local-product";
    case BasisKind::GlobalHaar: return "global-haar";
    case BasisKind::EigTB: return "eig-tb";
    case BasisKind::EigUTB: return "eig-utb";
    case BasisKind::EigTB2: return "eig-tb2";
    case BasisKind::EigTB3: return "eig-tb3";
    case BasisKind::AlphaMix: return "alpha-mix";
    case BasisKind::SigmaX: return "sigma-x";
  }
  return "?";
}

struct BasisSpec {
  BasisKind kind = BasisKind::Computational;
  double alpha = 1.0;         // AlphaMix
  std::uint64_t seed = 0;     // LocalProduct, GlobalHaar, EigUTB
  std::optional<ComplexMatrix> u;  // LocalProduct: explicit single-site unitary
};

// Columns are the basis vectors |b>.
struct MeasurementBasis {
  BasisKind kind = BasisKind::Computational;
  int N_B = 0;
  Index d = 2;
  double alpha = 1.0;
  ComplexMatrix vectors;
  Index size() const { return vectors.cols(); }
};

inline double orthonormality_error(const MeasurementBasis& b) {
  return max_abs(b.vectors.adjoint() * b.vectors - ComplexMatrix::Identity(b.size(), b.size()));
}

// Eigenbasis of T^r on n sites from orbits of basis labels: |o, m> = p^{-1/2} sum_j e^{2 pi i j m/p} T^{rj}|o>.
inline ComplexMatrix translation_eigenbasis(int n, Index d, int r) {
  const Index dim = ipow(d, n);
  ComplexMatrix v = ComplexMatrix::Zero(dim, dim);
  std::vector<char> seen(dim, 0);
  Index col = 0;
  for (Index x = 0; x < dim; ++x) {
    if (seen[x]) continue;
    std::vector<Index> orbit;
    for (Index y = x; !seen[y]; y = translate_index(y, n, d, r)) {
      seen[y] = 1;
      orbit.push_back(y);
    }
    const int p = static_cast<int>(orbit.size());
    for (int m = 0; m < p; ++m, ++col)
      for (int j = 0; j < p; ++j) v(orbit[j], col) = std::polar(1.0 / std::sqrt(double(p)), 2.0 * kPi * j * m / p);
  }
  return v;
}

inline MeasurementBasis build_basis(const BasisSpec& spec, int n_b, Index d = 2) {
  if (n_b < 1) throw DomainError("build_basis: N_B must be >= 1");
  MeasurementBasis b;
  b.kind = spec.kind;
  b.N_B = n_b;
  b.d = d;
  b.alpha = spec.alpha;
  const Index dim = ipow(d, n_b);
  const auto need_qubits = [&] {
    if (d != 2) throw DomainError(std::string("build_basis: ") + to_string(spec.kind) + " needs d = 2");
  };
  switch (spec.kind) {
    case BasisKind::Computational: b.vectors = ComplexMatrix::Identity(dim, dim); break;
    case BasisKind::LocalProduct: {
      Rng rng(spec.seed, 11);
      const ComplexMatrix u = spec.u ? *spec.u : sample_cue(d, rng);
      if (u.rows() != d || max_abs(u.adjoint() * u - ComplexMatrix::Identity(d, d)) > 1e-10)
        throw DomainError("build_basis: local unitary must be d x d unitary");
      b.vectors = kron_power(u, n_b);
      break;
    }
    case BasisKind::GlobalHaar: {
      Rng rng(spec.seed, 12);
      b.vectors = sample_cue(dim, rng);
      break;
    }
    case BasisKind::EigTB: b.vectors = translation_eigenbasis(n_b, d, 1); break;
    case BasisKind::EigTB2: b.vectors = translation_eigenbasis(n_b, d, 2); break;
    case BasisKind::EigTB3: b.vectors = translation_eigenbasis(n_b, d, 3); break;
    case BasisKind::EigUTB: {
      // Eigenbasis of u_{first B site} T_B.
      Rng rng(spec.seed, 13);
      const ComplexMatrix u = site_operator(sample_cue(d, rng), 0, n_b);
      Eigen::ComplexSchur<ComplexMatrix> schur(u * translation_matrix(n_b, d, 1));
      if (schur.info() != Eigen::Success) throw Error("build_basis: Schur decomposition failed");
      b.vectors = schur.matrixU();
      break;
    }
    case BasisKind::AlphaMix: {
      need_qubits();
      if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) throw DomainError("build_basis: alpha must be in [0, 1]");
      const double th = std::atan2(1.0 - spec.alpha, spec.alpha);
      ComplexMatrix last(2, 2), hx(2, 2);
      last << std::cos(th / 2), -std::sin(th / 2), std::sin(th / 2), std::cos(th / 2);
      const double s = 1.0 / std::sqrt(2.0);
      hx << s, s, s, -s;
      b.vectors = kron(kron_power(hx, n_b - 1), last);
      break;
    }
    case BasisKind::SigmaX: {
      need_qubits();
      ComplexMatrix hx(2, 2);
      const double s = 1.0 / std::sqrt(2.0);
      hx << s, s, s, -s;
      b.vectors = kron_power(hx, n_b);
      break;
    }
  }
  return b;
}

// ---------------------------------------------------------------- projected ensembles

struct ProjectedEnsemble {
  std::vector<double> p;
  ComplexMatrix states;  // column m: normalized state on A
  std::vector<Index> outcome;
  double dropped_mass = 0.0;
  Index size() const { return static_cast<Index>(p.size()); }
};

inline constexpr double kZeroOutcome = 1e-14;

inline ProjectedEnsemble projected_ensemble(const StateVector& psi, const MeasurementBasis& basis,
                                            const SubsystemSplit& split) {
  if (basis.vectors.rows() != split.dimB) throw DimensionError("projected_ensemble: basis does not match B");
  const double n0 = psi.squaredNorm();
  if (std::abs(n0 - 1.0) > 1e-8) throw DomainError("projected_ensemble: generator not normalized");
  const ComplexMatrix raw = amplitude_matrix(psi, split) * basis.vectors.conjugate();
  ProjectedEnsemble e;
  std::vector<Index> keep;
  double kept = 0.0;
  for (Index b = 0; b < raw.cols(); ++b) {
    const double pb = raw.col(b).squaredNorm();
    if (pb < kZeroOutcome) {
      e.dropped_mass += pb;
      continue;
    }
    keep.push_back(b);
    kept += pb;
  }
  e.states.resize(split.dimA, static_cast<Index>(keep.size()));
  for (std::size_t m = 0; m < keep.size(); ++m) {
    const double pb = raw.col(keep[m]).squaredNorm();
    e.p.push_back(pb / kept);
    e.states.col(m) = raw.col(keep[m]) / std::sqrt(pb);
    e.outcome.push_back(keep[m]);
  }
  return e;
}

inline ComplexMatrix moment_operator(const ProjectedEnsemble& e, int t) {
  if (t < 1 || t > 4) throw DomainError("moment_operator: t must be in [1, 4]");
  const Index dA = e.states.rows();
  ComplexMatrix m = ComplexMatrix::Zero(ipow(dA, t), ipow(dA, t));
  for (Index b = 0; b < e.size(); ++b) {
    StateVector v = e.states.col(b);
    StateVector vt = v;
    for (int k = 1; k < t; ++k) vt = kron(vt, v);
    m.noalias() += e.p[b] * vt * vt.adjoint();
  }
  return m;
}

// Same moment in orthonormal coordinates on the symmetric subspace.
inline ComplexMatrix moment_sym(const ProjectedEnsemble& e, const SymmetricCoords& c) {
  ComplexMatrix v(c.dim(), e.size());
  for (Index b = 0; b < e.size(); ++b) v.col(b) = std::sqrt(e.p[b]) * c.power(e.states.col(b));
  return v * v.adjoint();
}

// Pi_t / D with Pi_t the sum over replica permutations and D = d(d+1)...(d+t-1).
inline ComplexMatrix haar_moment_state(Index dA, int t) {
  return sym_projector_replicas(t, dA) / rising_factorial(dA, t);
}

inline double delta_t(const ProjectedEnsemble& e, int t) {
  const SymmetricCoords c(e.states.rows(), t);
  const ComplexMatrix m = moment_sym(e, c);
  return trace_norm(m - ComplexMatrix::Identity(c.dim(), c.dim()) / static_cast<double>(c.dim()));
}

inline double delta_t(const StateVector& psi, const MeasurementBasis& basis, const SubsystemSplit& split, int t) {
  return delta_t(projected_ensemble(psi, basis, split), t);
}

// Dense reference for small cases.
inline double delta_t_dense(const ProjectedEnsemble& e, int t) {
  return trace_norm(moment_operator(e, t) - haar_moment_state(e.states.rows(), t));
}

// ---------------------------------------------------------------- violation of the sufficient condition

// <b|Q|b> as an operator on A.
inline ComplexMatrix partial_expectation(const SymmetryProjector& q, const StateVector& b, Index dA) {
  const Index dB = b.size();
  if (dA * dB != q.dim()) throw DimensionError("partial_expectation: dimensions do not match");
  const SubsystemSplit split{dA, dB};
  ComplexMatrix out(dA, dA);
  for (Index a = 0; a < dA; ++a) {
    StateVector e = StateVector::Zero(q.dim());
    e.segment(a * dB, dB) = b;
    out.col(a) = amplitude_matrix(q.apply(e), split) * b.conjugate();
  }
  return out;
}

// sum_b || <b|Q|b> - I ||_1 / d^{N_B}
inline double violation(const SymmetryProjector& q, const MeasurementBasis& basis, int n_a) {
  if (n_a + basis.N_B != q.N || basis.d != q.d) throw DimensionError("violation: N_A + N_B must equal N");
  const Index dA = ipow(q.d, n_a);
  const auto terms = parallel_map<double>(static_cast<std::size_t>(basis.size()), [&](std::size_t b) {
    const ComplexMatrix x = partial_expectation(q, basis.vectors.col(static_cast<Index>(b)), dA);
    return trace_norm(x - ComplexMatrix::Identity(dA, dA));
  });
  return pairwise_sum(terms) / static_cast<double>(basis.size());
}

// ---------------------------------------------------------------- partial traces of translation powers

enum class PtraceKind { PermutationOnA, ScaledIdentity };

struct PtraceClass {
  PtraceKind kind;
  ComplexMatrix witness;
};

inline PtraceClass classify_ptrace_T_power(int n, int n_a, int j, Index d = 2) {
  if (j < 1 || j >= n) throw DomainError("classify_ptrace_T_power: need 1 <= j < N");
  if (n_a < 1 || n_a >= n) throw DomainError("classify_ptrace_T_power: need 1 <= N_A < N");
  if (ipow(d, n) > 4096) throw DomainError("classify_ptrace_T_power: d^N above 4096");
  PtraceClass c;
  c.kind = n_a >= std::gcd(n, j) ? PtraceKind::PermutationOnA : PtraceKind::ScaledIdentity;
  c.witness = partial_trace(translation_matrix(n, d, j), {ipow(d, n_a), ipow(d, n - n_a)}, Side::B);
  return c;
}

// ---------------------------------------------------------------- symmetric-subspace moments

namespace detail {

// Full-space labels of each symmetric basis element.
inline std::vector<std::vector<Index>> sym_positions(const SymmetricCoords& c, Index d, int t) {
  std::vector<std::vector<Index>> out;
  for (auto tup : c.tuples()) {
    std::vector<Index> ys;
    do {
      Index y = 0;
      for (int k = 0; k < t; ++k) y = y * d + tup[k];
      ys.push_back(y);
    } while (std::next_permutation(tup.begin(), tup.end()));
    out.push_back(std::move(ys));
  }
  return out;
}

}  // namespace detail

// W^dag M W for M on (C^d)^{⊗t}.
inline ComplexMatrix to_sym_coords(const ComplexMatrix& m, Index d, int t) {
  const SymmetricCoords c(d, t);
  const auto pos = detail::sym_positions(c, d, t);
  ComplexMatrix out(c.dim(), c.dim());
  for (Index a = 0; a < c.dim(); ++a)
    for (Index b = 0; b < c.dim(); ++b) {
      cplx s = 0.0;
      for (Index y : pos[a])
        for (Index x : pos[b]) s += m(y, x);
      out(a, b) = s / std::sqrt(double(pos[a].size() * pos[b].size()));
    }
  return out;
}

struct SymmetricClosedForm {
  ComplexMatrix moment;  // unit trace, symmetric coordinates
  double alpha = 0.0;    // Tr(Q^{⊗t} Pi_t), Pi_t = sum of permutations
};

// Q^{⊗t} Pi_t / alpha_t in symmetric coordinates. Q^{⊗t} commutes with replica permutations,
// so the product lives on the symmetric subspace.
inline SymmetricClosedForm symmetric_closed_form(const ComplexMatrix& q, int t) {
  const Index d = q.rows();
  const SymmetricCoords c(d, t);
  const auto pos = detail::sym_positions(c, d, t);
  std::vector<std::vector<Index>> digits(ipow(d, t), std::vector<Index>(t));
  for (Index y = 0; y < ipow(d, t); ++y) {
    Index r = y;
    for (int k = t - 1; k >= 0; --k) {
      digits[y][k] = r % d;
      r /= d;
    }
  }
  ComplexMatrix g(c.dim(), c.dim());
  for (Index a = 0; a < c.dim(); ++a)
    for (Index b = 0; b < c.dim(); ++b) {
      cplx s = 0.0;
      for (Index y : pos[a])
        for (Index x : pos[b]) {
          cplx prod = 1.0;
          for (int k = 0; k < t; ++k) prod *= q(digits[y][k], digits[x][k]);
          s += prod;
        }
      g(a, b) = s / std::sqrt(double(pos[a].size() * pos[b].size()));
    }
  SymmetricClosedForm out;
  const double tr = g.trace().real();
  out.alpha = factorial(t) * tr;
  out.moment = g / tr;
  return out;
}

struct MomentCheck {
  ComplexMatrix mc_moment;    // symmetric coordinates
  ComplexMatrix closed_form;  // symmetric coordinates
  double distance = 0.0;
  double alpha = 0.0;
};

// E over symmetric states of (|phi><phi|)^{⊗t} against Q^{⊗t} Pi_t / alpha_t.
inline MomentCheck symmetric_moment_mc_check(const SymmetryProjector& q, int t, std::size_t n_samples,
                                             std::uint64_t seed) {
  if (ipow(q.dim(), t) > 4096) throw DomainError("symmetric_moment_mc_check: d^{Nt} above 2^12");
  if (n_samples == 0) throw DomainError("symmetric_moment_mc_check: need samples");
  const SymmetricCoords c(q.dim(), t);
  MomentCheck out;
  const SymmetricClosedForm cf = symmetric_closed_form(q.matrix(), t);
  out.closed_form = cf.moment;
  out.alpha = cf.alpha;
  out.mc_moment = chunked_sum<ComplexMatrix>(n_samples, [&](std::size_t i) {
                    Rng rng(seed, i);
                    const StateVector v = c.power(sample_symmetric_state(q, rng));
                    return ComplexMatrix(v * v.adjoint());
                  }) /
                  static_cast<double>(n_samples);
  out.distance = trace_norm(out.mc_moment - out.closed_form);
  return out;
}

inline MomentCheck tinv_moment_mc_check(int n, int k, int t, std::size_t n_samples, std::uint64_t seed,
                                        Index d = 2) {
  return symmetric_moment_mc_check(build_projector(SymmetryKind::Translation, k, n, d), t, n_samples, seed);
}

// (Z_{0,N_A}^{⊗t} + Z_{1,N_A}^{⊗t}) Pi_t / N on A, dense.
inline ComplexMatrix z2_closed_form_moment(int n_a, int t) {
  if (t < 1 || t > 3) throw DomainError("z2_closed_form_moment: t must be in [1, 3]");
  const Index dA = ipow(2, n_a);
  const ComplexMatrix sx = kron_power(pauli_x(), n_a), id = ComplexMatrix::Identity(dA, dA);
  const ComplexMatrix m = (kron_power(id + sx, t) + kron_power(id - sx, t)) * sym_projector_replicas(t, dA);
  return m / m.trace().real();
}

// Generator average of the projected-ensemble moment, symmetric coordinates on A.
inline ComplexMatrix projected_moment_mc(const SymmetryProjector* q, const MeasurementBasis& basis, int n, int n_a,
                                         int t, std::size_t n_samples, std::uint64_t seed) {
  const Index d = basis.d, dA = ipow(d, n_a);
  const SubsystemSplit split{dA, ipow(d, n - n_a)};
  const SymmetricCoords c(dA, t);
  return chunked_sum<ComplexMatrix>(n_samples, [&](std::size_t i) {
           Rng rng(seed, i);
           const StateVector psi = sample_generator(q, split.dim(), rng);
           return moment_sym(projected_ensemble(psi, basis, split), c);
         }) /
         static_cast<double>(n_samples);
}

// ---------------------------------------------------------------- sweeps

struct DeltaSample {
  int sample_id = 0;
  std::vector<double> delta;  // one per requested t
  double dropped_mass = 0.0;
};

// Delta^(t) for n_gen generator states. Each sample uses Rng(seed, sample_id).
inline std::vector<DeltaSample> delta_samples(const SymmetryProjector* q, const MeasurementBasis& basis, int n_a,
                                              const std::vector<int>& ts, int n_gen, std::uint64_t seed) {
  const Index d = basis.d;
  const SubsystemSplit split{ipow(d, n_a), ipow(d, basis.N_B)};
  if (q && q->dim() != split.dim()) throw DimensionError("delta_samples: generator does not match N_A + N_B");
  return parallel_map<DeltaSample>(static_cast<std::size_t>(n_gen), [&](std::size_t i) {
    Rng rng(seed, i);
    const ProjectedEnsemble e = projected_ensemble(sample_generator(q, split.dim(), rng), basis, split);
    DeltaSample s;
    s.sample_id = static_cast<int>(i);
    s.dropped_mass = e.dropped_mass;
    for (int t : ts) s.delta.push_back(delta_t(e, t));
    return s;
  });
}

}  // namespace qchaos
