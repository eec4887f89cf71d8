#pragma once

#include <cstdint>

#include "parallel.hpp"
#include "rng.hpp"
#include "sites.hpp"
#include "spin.hpp"
#include "stats.hpp"
#include "tensor.hpp"

namespace qchaos {

enum class EnsembleKind { CUE, COE, GUE, DiagonalPhase, DiagonalGUE };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::CUE;
  Index dim = 2;
  std::uint64_t seed = 0;
};

inline ComplexMatrix sample_cue(Index d, Rng& rng) {
  const ComplexMatrix z = ginibre(d, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
  const ComplexMatrix& r = qr.matrixQR();
  for (Index i = 0; i < d; ++i) {
    const cplx rii = r(i, i);
    const double a = std::abs(rii);
    q.col(i) *= (a > 0 ? rii / a : cplx(1.0));
  }
  return q;
}

inline ComplexMatrix sample_coe(Index d, Rng& rng) {
  const ComplexMatrix u = sample_cue(d, rng);
  return u.transpose() * u;
}

// Off-diagonal E|O_ij|^2 = 1, diagonal real N(0, 1).
inline ComplexMatrix sample_gue(Index d, Rng& rng) {
  ComplexMatrix o(d, d);
  for (Index i = 0; i < d; ++i) {
    o(i, i) = rng.normal();
    for (Index j = i + 1; j < d; ++j) {
      o(i, j) = rng.complex_normal();
      o(j, i) = std::conj(o(i, j));
    }
  }
  return o;
}

inline ComplexMatrix sample_diagonal_phase(Index d, Rng& rng) {
  ComplexMatrix v = ComplexMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) v(i, i) = std::exp(kI * (2.0 * kPi * (rng.uniform() - 0.5)));
  return v;
}

inline ComplexMatrix sample_diagonal_gue(Index d, Rng& rng) {
  ComplexMatrix v = ComplexMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i) v(i, i) = rng.normal();
  return v;
}

inline ComplexMatrix sample(EnsembleKind kind, Index d, Rng& rng) {
  switch (kind) {
    case EnsembleKind::CUE: return sample_cue(d, rng);
    case EnsembleKind::COE: return sample_coe(d, rng);
    case EnsembleKind::GUE: return sample_gue(d, rng);
    case EnsembleKind::DiagonalPhase: return sample_diagonal_phase(d, rng);
    case EnsembleKind::DiagonalGUE: return sample_diagonal_gue(d, rng);
  }
  throw DomainError("unknown ensemble");
}

inline ComplexMatrix sample(const EnsembleSpec& spec) {
  if (spec.dim < 1) throw DomainError("ensemble dim must be >= 1");
  Rng rng(spec.seed);
  return sample(spec.kind, spec.dim, rng);
}

// Closed-form second moment E[U^{†⊗2} A U^{⊗2}] = cI I + cS SWAP.
inline ComplexMatrix haar_moment2(const ComplexMatrix& a) {
  const Index n = a.rows();
  const Index d = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
  if (d * d != n || a.cols() != n) throw DimensionError("haar_moment2: dimension is not a perfect square");
  const ComplexMatrix swap = permutation_operator({1, 0}, d);
  const cplx trA = a.trace();
  const cplx trAS = (a * swap).trace();
  const double dd = static_cast<double>(d);
  if (d == 1) return a;
  const cplx cI = (trA - trAS / dd) / (dd * dd - 1.0);
  const cplx cS = (trAS - trA / dd) / (dd * dd - 1.0);
  return cI * ComplexMatrix::Identity(n, n) + cS * swap;
}

// E_W[W^† P W] over COE(d).
inline ComplexMatrix coe_avg_conjugation(const ComplexMatrix& p) {
  if (p.rows() != p.cols()) throw DimensionError("coe_avg_conjugation: square input required");
  const Index d = p.rows();
  return (p.transpose() + p.trace() * ComplexMatrix::Identity(d, d)) / static_cast<double>(d + 1);
}

struct BlockCOESpec {
  double J = 0.5;
  std::uint64_t seed = 0;
};

inline std::vector<int> fz_values(const Spin& s) {
  std::vector<int> out;
  for (int f = -s.twoJ; f <= s.twoJ; ++f) out.push_back(f);
  return out;
}

inline ComplexMatrix sample_block_coe(const Spin& s, Rng& rng) {
  const Index d = s.dim() * s.dim();
  ComplexMatrix u = ComplexMatrix::Zero(d, d);
  for (int fz : fz_values(s)) {
    const auto idx = sector_indices(s, fz);
    const Index n = static_cast<Index>(idx.size());
    const ComplexMatrix w = sample_coe(n, rng);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) u(idx[a], idx[b]) = w(a, b);
  }
  return u;
}

inline ComplexMatrix sample_block_coe(const BlockCOESpec& spec) {
  Rng rng(spec.seed);
  return sample_block_coe(spin_from_double(spec.J), rng);
}

// Polar part of Z' = sum_j T^{-j} Z T^j. Resamples on rank deficiency.
inline ComplexMatrix sample_tinv_unitary(int n_sites, Index local_dim, std::uint64_t seed) {
  const Index dim = ipow(local_dim, n_sites);
  if (dim > 4096) throw DomainError("sample_tinv_unitary: dimension above 2^12");
  for (int attempt = 0; attempt < 6; ++attempt) {
    Rng rng(seed + static_cast<std::uint64_t>(attempt));
    const ComplexMatrix z = ginibre(dim, rng);
    ComplexMatrix zp = z;
    for (int j = 1; j < n_sites; ++j) zp += conjugate_by_translation(z, n_sites, local_dim, j);
    Eigen::BDCSVD<ComplexMatrix> svd(zp, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0)) continue;
    return svd.matrixU() * svd.matrixV().adjoint();
  }
  throw Error("sample_tinv_unitary: Z' rank deficient after 5 retries");
}

// Haar-state estimate of Tr(W(t) V^† W(t) V) via d(d+1) <W(t)><V^†W(t)V>.
inline Estimate randomized_otoc_estimate(const ComplexMatrix& w, const ComplexMatrix& v,
                                         const ComplexMatrix& u_t, std::size_t n_samples,
                                         std::uint64_t seed) {
  if (std::abs(w.trace()) > 1e-10) throw DomainError("randomized_otoc_estimate: W must be traceless");
  const Index d = w.rows();
  const ComplexMatrix wt = u_t.adjoint() * w * u_t;
  const ComplexMatrix vwv = v.adjoint() * wt * v;
  const double scale = static_cast<double>(d) * static_cast<double>(d + 1);
  auto vals = parallel_map<double>(n_samples, [&](std::size_t i) {
    Rng rng(seed, i);
    const StateVector psi = random_state(d, rng);
    const cplx x = psi.dot(wt * psi);
    const cplx y = psi.dot(vwv * psi);
    return scale * (x * y).real();
  });
  return mean_stderr(vals);
}

}  // namespace qchaos
