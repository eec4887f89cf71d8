#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "parallel.hpp"
#include "rng.hpp"
#include "stats.hpp"
#include "types.hpp"

namespace qchaos {

struct KHOPoint {
  double u = 0.0;  // P / omega
  double v = 0.0;  // X
};

struct KHOParams {
  double eps = 0.0;  // K / omega
  double R = 4.0;
};

inline KHOPoint kho_step(const KHOPoint& p, const KHOParams& params) {
  const double th = 2.0 * kPi / params.R;
  const double c = std::cos(th), s = std::sin(th);
  const double w = p.u + params.eps * std::sin(p.v);
  return {w * c + p.v * s, -w * s + p.v * c};
}

struct OriginAnalysis {
  std::array<cplx, 2> eigenvalues;
  double saddle_exponent = 0.0;
  double bifurcation_K = 0.0;  // in units of omega
  double trace = 0.0;
};

// Jacobian of kho_step at the origin.
inline Eigen::Matrix2d kho_origin_jacobian(double R, double eps) {
  const double th = 2.0 * kPi / R;
  const double c = std::cos(th), s = std::sin(th);
  Eigen::Matrix2d j;
  j << c, eps * c + s, -s, c - eps * s;
  return j;
}

// Smallest positive K/omega with |Tr J| = 2, i.e. K/omega = (2 cos wt ± 2)/sin wt.
inline double kho_bifurcation_K(double R) {
  const double th = 2.0 * kPi / R;
  const double c = std::cos(th), s = std::sin(th);
  if (std::abs(s) < 1e-15) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    const double k = (2.0 * c + sign * 2.0) / s;
    if (k > 0 && k < best) best = k;
  }
  return best;
}

inline OriginAnalysis kho_origin_analysis(const KHOParams& params, double K_over_omega) {
  OriginAnalysis out;
  const double eps = K_over_omega;
  if (std::abs(params.R - 4.0) < 1e-15) {
    const cplx disc = std::sqrt(cplx(eps * eps - 4.0, 0.0));
    out.eigenvalues = {(-eps + disc) / 2.0, (-eps - disc) / 2.0};
  } else {
    const Eigen::Matrix2d j = kho_origin_jacobian(params.R, eps);
    const double tr = j.trace(), det = j.determinant();
    const cplx disc = std::sqrt(cplx(tr * tr - 4.0 * det, 0.0));
    out.eigenvalues = {(tr + disc) / 2.0, (tr - disc) / 2.0};
  }
  out.trace = (out.eigenvalues[0] + out.eigenvalues[1]).real();
  out.saddle_exponent = std::max(std::log(std::abs(out.eigenvalues[0])), std::log(std::abs(out.eigenvalues[1])));
  out.bifurcation_K = kho_bifurcation_K(params.R);
  return out;
}

struct KCTState {
  Eigen::Vector3d I{0, 0, 1};
  Eigen::Vector3d J{0, 0, -1};
  double fz() const { return I.z() + J.z(); }
};

// Rotation of v by angle about the unit axis n (right-handed).
inline Eigen::Vector3d rodrigues(const Eigen::Vector3d& v, const Eigen::Vector3d& n, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return v * c + n.cross(v) * s + n * (n.dot(v)) * (1.0 - c);
}

inline KCTState kct_step(const KCTState& s, double alpha, double beta) {
  KCTState out = s;
  const Eigen::Vector3d f = s.I + s.J;
  const double nf = f.norm();
  if (nf >= 1e-12) {
    const Eigen::Vector3d axis = f / nf;
    out.I = rodrigues(s.I, axis, alpha * nf);
    out.J = rodrigues(s.J, axis, alpha * nf);
  }
  out.J = rodrigues(out.J, Eigen::Vector3d::UnitZ(), beta);
  out.I.normalize();
  out.J.normalize();
  return out;
}

inline Eigen::Vector3d unit_from_angles(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

inline RealVector to_vector(const KHOPoint& p) { return (RealVector(2) << p.u, p.v).finished(); }
inline RealVector to_vector(const KCTState& s) { return (RealVector(6) << s.I, s.J).finished(); }
inline KCTState kct_from_vector(const RealVector& x) {
  KCTState s;
  s.I = x.segment<3>(0).normalized();
  s.J = x.segment<3>(3).normalized();
  return s;
}

// A map on R^n plus a projection back onto its phase space.
struct FlatMap {
  std::function<RealVector(const RealVector&)> step;
  std::function<RealVector(const RealVector&)> project = [](const RealVector& x) { return x; };
};

inline FlatMap kho_flat_map(const KHOParams& p) {
  return {[p](const RealVector& x) { return to_vector(kho_step({x(0), x(1)}, p)); }};
}

inline FlatMap kct_flat_map(double alpha, double beta) {
  return {[alpha, beta](const RealVector& x) { return to_vector(kct_step(kct_from_vector(x), alpha, beta)); },
          [](const RealVector& x) { return to_vector(kct_from_vector(x)); }};
}

struct LyapunovResult {
  double mean = 0.0;
  double stddev = 0.0;
  std::vector<double> per_trajectory;
};

struct BenettinOptions {
  std::size_t n_steps = 10000;
  std::size_t renorm_interval = 1;
  double delta0 = 1e-8;
  double transient_fraction = 0.1;
  std::uint64_t seed = 0;
};

inline double benettin_single(const FlatMap& map, const RealVector& x0, const BenettinOptions& opt,
                              std::uint64_t stream) {
  if (opt.n_steps < 1000) throw DomainError("benettin_lyapunov: n_steps must be >= 1000");
  if (opt.renorm_interval < 1) throw DomainError("benettin_lyapunov: renorm_interval must be >= 1");
  Rng rng(opt.seed, stream);
  RealVector x = map.project(x0);
  RealVector dir(x.size());
  for (Index i = 0; i < dir.size(); ++i) dir(i) = rng.normal();
  RealVector y = map.project(x + opt.delta0 * dir.normalized());
  {
    const double d = (y - x).norm();
    y = x + (y - x) * (opt.delta0 / d);
  }
  const std::size_t transient = static_cast<std::size_t>(opt.transient_fraction * static_cast<double>(opt.n_steps));
  double sum = 0.0;
  std::size_t counted = 0;
  for (std::size_t n = 1; n <= opt.n_steps; ++n) {
    x = map.step(x);
    y = map.step(y);
    if (n % opt.renorm_interval != 0) continue;
    const double d = (y - x).norm();
    if (!std::isfinite(d) || !x.allFinite()) throw DomainError("benettin_lyapunov: trajectory left numeric range");
    if (n > transient) {
      sum += std::log(d / opt.delta0);
      counted += opt.renorm_interval;
    }
    y = x + (y - x) * (opt.delta0 / (d > 0 ? d : opt.delta0));
  }
  return counted ? sum / static_cast<double>(counted) : 0.0;
}

inline LyapunovResult benettin_lyapunov(const FlatMap& map, const std::vector<RealVector>& x0s,
                                        const BenettinOptions& opt) {
  LyapunovResult r;
  r.per_trajectory = parallel_map<double>(x0s.size(), [&](std::size_t i) { return benettin_single(map, x0s[i], opt, i); });
  const Estimate e = mean_stderr(r.per_trajectory);
  r.mean = e.mean;
  r.stddev = sample_stddev(r.per_trajectory);
  return r;
}

// Random initial conditions on the Fz = 0 surface: theta_J = pi - theta_I.
inline std::vector<RealVector> kct_fz0_initial_conditions(std::size_t n, std::uint64_t seed) {
  std::vector<RealVector> out;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double cth = 2.0 * rng.uniform() - 1.0;
    const double th = std::acos(cth);
    const double pi = 2.0 * kPi * rng.uniform(), pj = 2.0 * kPi * rng.uniform();
    KCTState s;
    s.I = unit_from_angles(th, pi);
    s.J = unit_from_angles(kPi - th, pj);
    out.push_back(to_vector(s));
  }
  return out;
}

struct SectionRow {
  std::size_t traj = 0;
  std::size_t step = 0;
  double x = 0.0;
  double y = 0.0;
};

inline double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a - kPi;
}

// (delta theta, delta phi) chart of the coupled tops.
inline std::pair<double, double> kct_chart(const KCTState& s) {
  const double ti = std::acos(std::clamp(s.I.z(), -1.0, 1.0)), tj = std::acos(std::clamp(s.J.z(), -1.0, 1.0));
  const double pi = std::atan2(s.I.y(), s.I.x()), pj = std::atan2(s.J.y(), s.J.x());
  return {ti - tj, wrap_angle(pi - pj)};
}

inline std::vector<SectionRow> kho_poincare_section(const KHOParams& p, const std::vector<KHOPoint>& x0s,
                                                    std::size_t n_steps) {
  std::vector<SectionRow> rows;
  rows.reserve(n_steps * x0s.size());
  for (std::size_t k = 0; k < x0s.size(); ++k) {
    KHOPoint x = x0s[k];
    for (std::size_t n = 0; n < n_steps; ++n) {
      x = kho_step(x, p);
      rows.push_back({k, n + 1, x.u, x.v});
    }
  }
  return rows;
}

inline std::vector<SectionRow> kct_poincare_section(double alpha, double beta, const std::vector<KCTState>& x0s,
                                                    std::size_t n_steps) {
  std::vector<SectionRow> rows;
  rows.reserve(n_steps * x0s.size());
  for (std::size_t k = 0; k < x0s.size(); ++k) {
    KCTState s = x0s[k];
    for (std::size_t n = 0; n < n_steps; ++n) {
      s = kct_step(s, alpha, beta);
      const auto [a, b] = kct_chart(s);
      rows.push_back({k, n + 1, a, b});
    }
  }
  return rows;
}

}  // namespace qchaos
