#pragma once

#include <chrono>
#include <functional>
#include <limits>
#include <numbers>

#include "../classical.hpp"
#include "../designs.hpp"
#include "../ising.hpp"
#include "../kct.hpp"
#include "../kho.hpp"
#include "../metrology.hpp"
#include "../rmt.hpp"
#include "table.hpp"

namespace qchaos::runner {

struct ParamSpec {
  std::string name;
  Value def;
  std::string help;
};

// Resolved parameters: defaults overlaid with the given values.
class Params {
 public:
  explicit Params(ParamTree t) : t_(std::move(t)) {}
  double d(const std::string& k) const { return std::get<double>(t_.at(k)); }
  std::int64_t i(const std::string& k) const { return std::get<std::int64_t>(t_.at(k)); }
  int n(const std::string& k) const { return static_cast<int>(i(k)); }
  bool b(const std::string& k) const { return std::get<bool>(t_.at(k)); }
  const std::string& s(const std::string& k) const { return std::get<std::string>(t_.at(k)); }
  const ParamTree& tree() const { return t_; }

 private:
  ParamTree t_;
};

struct Experiment {
  std::string name;
  std::string description;
  std::vector<std::string> anchors;  // "header::function" pairs in include/qchaos
  std::vector<int> criteria;
  std::vector<ParamSpec> params;
  std::function<ResultTable(const Params&, std::uint64_t)> run;
};

inline ParamTree resolve_params(const Experiment& e, const ParamTree& given) {
  ParamTree out;
  for (const auto& p : e.params) out[p.name] = p.def;
  for (const auto& [k, v] : given) {
    const auto it = out.find(k);
    if (it == out.end()) throw ConfigError("params." + k, "unknown key 'params." + k + "' for experiment " + e.name);
    if (v.index() == it->second.index()) {
      it->second = v;
    } else if (std::holds_alternative<double>(it->second) && std::holds_alternative<std::int64_t>(v)) {
      it->second = static_cast<double>(std::get<std::int64_t>(v));
    } else {
      throw ConfigError("params." + k, std::string("key 'params.") + k + "' expects " + type_name(it->second) +
                                           ", got " + type_name(v));
    }
  }
  return out;
}

// Parses "key=value" with the type taken from the experiment's parameter schema.
inline std::pair<std::string, Value> parse_override(const Experiment& e, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(assignment, "override '" + assignment + "' is not key=value");
  std::string key = trim(assignment.substr(0, eq));
  if (key.rfind("params.", 0) == 0) key = key.substr(7);
  for (const auto& p : e.params)
    if (p.name == key) return {key, parse_value("params." + key, type_name(p.def), trim(assignment.substr(eq + 1)))};
  throw ConfigError("params." + key, "unknown key 'params." + key + "' for experiment " + e.name);
}

namespace detail {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

template <class E>
E parse_enum(const std::string& key, const std::string& s, std::initializer_list<E> all) {
  std::string names;
  for (E e : all) {
    if (s == to_string(e)) return e;
    names += std::string(names.empty() ? "" : "|") + to_string(e);
  }
  throw ConfigError("params." + key, "params." + key + " must be one of " + names + ", got '" + s + "'");
}

inline const SymmetryProjector* generator(const Params& p, const std::string& key, int n,
                                          std::optional<SymmetryProjector>& store) {
  if (p.s(key) == "haar") return nullptr;
  const SymmetryKind k = parse_enum(key, p.s(key),
                                    {SymmetryKind::Translation, SymmetryKind::Z2, SymmetryKind::Reflection,
                                     SymmetryKind::U1, SymmetryKind::TranslationPlusReflection});
  store = build_projector(k, p.n("charge"), n);
  return &*store;
}

inline BasisSpec basis_spec(const Params& p, std::uint64_t seed) {
  BasisSpec b;
  b.kind = parse_enum("basis", p.s("basis"),
                      {BasisKind::Computational, BasisKind::LocalProduct, BasisKind::GlobalHaar, BasisKind::EigTB,
                       BasisKind::EigUTB, BasisKind::EigTB2, BasisKind::EigTB3, BasisKind::AlphaMix,
                       BasisKind::SigmaX});
  b.alpha = p.d("alpha");
  b.seed = seed;
  return b;
}

inline std::vector<int> one_to(int t_max) {
  if (t_max < 1) throw ConfigError("params.t_max", "params.t_max must be >= 1");
  std::vector<int> ts;
  for (int t = 1; t <= t_max; ++t) ts.push_back(t);
  return ts;
}

// ---------------------------------------------------------------- kho

inline ResultTable kho_classical(const Params& p, std::uint64_t) {
  const KHOParams kp{p.d("K_over_omega"), p.d("R")};
  const OriginAnalysis a = kho_origin_analysis(kp, kp.eps);
  ResultTable t{{"quantity", "orbit", "step", "value"}, {}};
  t.add({std::string("saddle_exponent"), std::int64_t{-1}, std::int64_t{0}, a.saddle_exponent});
  t.add({std::string("bifurcation_K_over_omega"), std::int64_t{-1}, std::int64_t{0}, a.bifurcation_K});
  t.add({std::string("eigenvalue_modulus_0"), std::int64_t{-1}, std::int64_t{0}, std::abs(a.eigenvalues[0])});
  t.add({std::string("eigenvalue_modulus_1"), std::int64_t{-1}, std::int64_t{0}, std::abs(a.eigenvalues[1])});
  const int orbits = p.n("orbits");
  std::vector<KHOPoint> x0;
  for (int k = 0; k < orbits; ++k) x0.push_back({0.0, p.d("radius") * (k + 1) / orbits});
  for (const auto& r : kho_poincare_section(kp, x0, static_cast<std::size_t>(p.n("steps")))) {
    t.add({std::string("u"), static_cast<std::int64_t>(r.traj), static_cast<std::int64_t>(r.step), r.x});
    t.add({std::string("v"), static_cast<std::int64_t>(r.traj), static_cast<std::int64_t>(r.step), r.y});
  }
  return t;
}

inline FockSpace fock(const Params& p) { return {p.i("D"), p.d("omega"), p.d("hbar")}; }

inline ResultTable kho_otoc(const Params& p, std::uint64_t) {
  const FockSpace s = fock(p);
  const KHOFloquet f = build_floquet(s, p.d("R"), p.d("K"));
  const Index M = p.i("M");
  if (M < 1) throw ConfigError("params.M", "params.M must be >= 1");
  const FockAverageSeries series = avg_fock_otoc_series(f, p.n("t_max"), M, p.n("stride"));
  const bool r2 = std::abs(p.d("R") - 2.0) < 1e-12;
  ResultTable t{{"t", "otoc", "oracle"}, {}};
  for (std::size_t k = 0; k < series.t.size(); ++k) {
    const int tt = series.t[k];
    double oracle = kNaN;
    if (r2) oracle = M == 1 ? r2_vacuum_otoc(f.K, s.omega, s.hbar, tt) : r2_fock_average_otoc(f.K, s.omega, tt);
    t.add({std::int64_t{tt}, series.avg[k], oracle});
  }
  return t;
}

inline ResultTable kho_qfi(const Params& p, std::uint64_t) {
  const FockSpace s = fock(p);
  const StateVector psi0 = coherent_state(coherent_alpha(p.d("x0"), p.d("p0"), s), s);
  const double tau = tau_for(p.d("R"), s.omega);
  const QFISeries q = qfi_series(psi0, s, tau, p.d("K"), p.n("t_max"), p.n("stride"));
  std::vector<double> analytic(q.t.size(), kNaN);
  if (std::abs(p.d("R") - 2.0) < 1e-12) {
    std::vector<double> ts(q.t.begin(), q.t.end());
    analytic = r2_qfi_series(r2_generator_parts(s, p.d("K")), psi0, ts);
  }
  ResultTable t{{"t", "qfi", "qfi_analytic", "mean_n"}, {}};
  for (std::size_t k = 0; k < q.t.size(); ++k) t.add({std::int64_t{q.t[k]}, q.qfi[k], analytic[k], q.mean_n[k]});
  return t;
}

// ---------------------------------------------------------------- kct

inline KCTParams kct_params(const Params& p) { return {p.d("J"), p.d("alpha"), p.d("beta")}; }

inline ResultTable kct_otoc(const Params& p, std::uint64_t) {
  const std::string& op = p.s("operator");
  std::vector<double> c;
  if (op == "izjz") c = izjz_otoc_series(kct_params(p), p.n("t_max"));
  else if (op == "ixjx") c = ixjx_otoc_series(kct_params(p), p.n("t_max"));
  else throw ConfigError("params.operator", "params.operator must be izjz or ixjx, got '" + op + "'");
  ResultTable t{{"t", "operator", "otoc"}, {}};
  for (std::size_t k = 0; k < c.size(); ++k) t.add({static_cast<std::int64_t>(k), op, c[k]});
  return t;
}

inline ResultTable kct_classical(const Params& p, std::uint64_t seed) {
  BenettinOptions opt;
  opt.n_steps = static_cast<std::size_t>(p.n("steps"));
  opt.seed = seed;
  const auto x0 = kct_fz0_initial_conditions(static_cast<std::size_t>(p.n("initial_conditions")), seed);
  const LyapunovResult r = benettin_lyapunov(kct_flat_map(p.d("alpha"), p.d("beta")), x0, opt);
  ResultTable t{{"trajectory", "lyapunov"}, {}};
  for (std::size_t k = 0; k < r.per_trajectory.size(); ++k)
    t.add({static_cast<std::int64_t>(k), r.per_trajectory[k]});
  return t;
}

inline ResultTable kct_rmt(const Params& p, std::uint64_t seed) {
  const Spin s = spin_from_double(p.d("J"));
  const KCTOperators o = kct_operators(s);
  const std::string& op = p.s("operator");
  const ComplexMatrix *a = nullptr, *b = nullptr;
  if (op == "ixjx") a = &o.Ix, b = &o.Jx;
  else if (op == "izjz") a = &o.Iz, b = &o.Jz;
  else throw ConfigError("params.operator", "params.operator must be ixjx or izjz, got '" + op + "'");
  const RMTSaturation r = rmt_saturation_C2(*a, *b, p.d("J"), static_cast<std::size_t>(p.n("samples")), seed);
  ResultTable t{{"quantity", "value", "stderr"}, {}};
  t.add({std::string("c2_closed_form"), r.closed_form, 0.0});
  t.add({std::string("c2_mc"), r.c2.mean, r.c2.err});
  t.add({std::string("c4_mc"), r.c4.mean, r.c4.err});
  return t;
}

// ---------------------------------------------------------------- rmt

inline ComplexMatrix fourier_matrix(Index d) {
  ComplexMatrix f(d, d);
  for (Index k = 0; k < d; ++k)
    for (Index l = 0; l < d; ++l)
      f(k, l) = std::exp(2.0 * kPi * kI * static_cast<double>(k * l) / static_cast<double>(d)) /
                std::sqrt(static_cast<double>(d));
  return f;
}

inline ResultTable rmt_check(const Params& p, std::uint64_t seed) {
  const std::string& check = p.s("check");
  const Index d = p.i("d");
  const auto n = static_cast<std::size_t>(p.n("samples"));
  if (d < 2) throw ConfigError("params.d", "params.d must be >= 2");
  const double dd = static_cast<double>(d);
  ResultTable t{{"check", "quantity", "mc", "stderr", "exact"}, {}};
  const auto moments = [&](auto sampler, auto f1, auto f2) {
    const auto vals = parallel_map<std::pair<double, double>>(n, [&](std::size_t i) {
      Rng rng(seed, i);
      const ComplexMatrix m = sampler(rng);
      return std::make_pair(f1(m), f2(m));
    });
    std::vector<double> a, b;
    for (const auto& [x, y] : vals) a.push_back(x), b.push_back(y);
    return std::make_pair(mean_stderr(a), mean_stderr(b));
  };
  if (check == "cue") {
    const auto [a, b] = moments([&](Rng& r) { return sample_cue(d, r); },
                                [](const ComplexMatrix& m) { return std::norm(m(0, 0)); },
                                [](const ComplexMatrix& m) { return std::norm(m.trace()); });
    t.add({check, std::string("abs2_u00"), a.mean, a.err, 1.0 / dd});
    t.add({check, std::string("abs2_trace"), b.mean, b.err, 1.0});
  } else if (check == "coe") {
    const auto [a, b] = moments([&](Rng& r) { return sample_coe(d, r); },
                                [](const ComplexMatrix& m) { return std::norm(m(0, 0)); },
                                [](const ComplexMatrix& m) { return std::norm(m(0, 1)); });
    t.add({check, std::string("abs2_w00"), a.mean, a.err, 2.0 / (dd + 1.0)});
    t.add({check, std::string("abs2_w01"), b.mean, b.err, 1.0 / (dd + 1.0)});
    Rng rng(seed, n + 1);
    const ComplexMatrix h = sample_gue(d, rng);
    t.add({check, std::string("conjugation_max_zscore"), coe_conjugation_zscore(h, n, seed + 1), kNaN, kNaN});
  } else if (check == "gue") {
    const auto [a, b] = moments([&](Rng& r) { return sample_gue(d, r); },
                                [](const ComplexMatrix& m) { return std::norm(m(0, 1)); },
                                [](const ComplexMatrix& m) { return m(0, 0).real() * m(0, 0).real(); });
    t.add({check, std::string("abs2_o01"), a.mean, a.err, 1.0});
    t.add({check, std::string("o00_squared"), b.mean, b.err, 1.0});
  } else if (check == "gue-otoc") {
    Rng rng(seed, n + 1);
    const ComplexMatrix u = sample_cue(d * d, rng);
    const GUEIdentity g = gue_otoc_identity(u, p.n("t"), n, seed);
    t.add({check, std::string("otoc"), g.mc.mean, g.mc.err, g.closed_form});
  } else if (check == "dgue") {
    const ComplexMatrix f = fourier_matrix(d);
    t.add({check, std::string("cgp_fourier"), dgue_cgp(f, 1), 0.0, 1.0 - 1.0 / (dd * dd)});
    Rng rng(seed, n + 1);
    const ComplexMatrix u = sample_cue(d, rng);
    const Estimate e = dgue_otoc_mc(u, p.n("t"), n, seed);
    t.add({check, std::string("otoc_mixed_normalization"), e.mean, e.err, dgue_otoc_mixed(u, p.n("t"))});
  } else {
    throw ConfigError("params.check", "params.check must be one of cue|coe|gue|gue-otoc|dgue, got '" + check + "'");
  }
  return t;
}

// ---------------------------------------------------------------- designs

inline ResultTable designs_delta(const Params& p, std::uint64_t seed) {
  const int n_a = p.n("N_A"), lo = p.n("N_B_min"), hi = p.n("N_B_max");
  if (lo < 1 || hi < lo) throw ConfigError("params.N_B_min", "need 1 <= N_B_min <= N_B_max");
  const auto ts = one_to(p.n("t_max"));
  ResultTable t{{"N_B", "sample", "t", "delta"}, {}};
  for (int nb = lo; nb <= hi; ++nb) {
    std::optional<SymmetryProjector> store;
    const SymmetryProjector* q = generator(p, "generator", n_a + nb, store);
    const MeasurementBasis basis = build_basis(basis_spec(p, seed), nb);
    for (const auto& s : delta_samples(q, basis, n_a, ts, p.n("samples"), seed + static_cast<std::uint64_t>(nb)))
      for (std::size_t k = 0; k < ts.size(); ++k)
        t.add({std::int64_t{nb}, std::int64_t{s.sample_id}, std::int64_t{ts[k]}, s.delta[k]});
  }
  return t;
}

inline ResultTable designs_violation(const Params& p, std::uint64_t seed) {
  const int n = p.n("N");
  std::optional<SymmetryProjector> store;
  const SymmetryProjector* q = generator(p, "symmetry", n, store);
  if (!q) throw ConfigError("params.symmetry", "params.symmetry must name a symmetry, not haar");
  ResultTable t{{"N_A", "violation"}, {}};
  for (int n_a = 0; n_a < n; ++n_a) t.add({std::int64_t{n_a}, violation(*q, build_basis(basis_spec(p, seed), n - n_a), n_a)});
  return t;
}

inline ResultTable designs_moment(const Params& p, std::uint64_t seed) {
  const int n = p.n("N"), tt = p.n("t");
  const auto ns = static_cast<std::size_t>(p.n("samples"));
  ResultTable t{{"quantity", "value"}, {}};
  if (p.s("mode") == "symmetric") {
    std::optional<SymmetryProjector> store;
    const SymmetryProjector* q = generator(p, "symmetry", n, store);
    if (!q) throw ConfigError("params.symmetry", "params.symmetry must name a symmetry, not haar");
    const MomentCheck m = symmetric_moment_mc_check(*q, tt, ns, seed);
    t.add({std::string("trace_distance"), m.distance});
    t.add({std::string("alpha"), m.alpha});
  } else if (p.s("mode") == "z2-projected") {
    const int n_a = p.n("N_A");
    const auto z = build_projector(SymmetryKind::Z2, 0, n);
    const ComplexMatrix mc = projected_moment_mc(&z, build_basis(basis_spec(p, seed), n - n_a), n, n_a, tt, ns, seed);
    t.add({std::string("trace_distance"), trace_norm(mc - to_sym_coords(z2_closed_form_moment(n_a, tt), 2, tt))});
  } else {
    throw ConfigError("params.mode", "params.mode must be symmetric or z2-projected, got '" + p.s("mode") + "'");
  }
  return t;
}

// ---------------------------------------------------------------- ising

inline ResultTable ising_deep(const Params& p, std::uint64_t seed) {
  IsingSpec s;
  s.N = p.n("N");
  s.bc = parse_enum("bc", p.s("bc"), {Boundary::PBC, Boundary::OBC, Boundary::WeakBond});
  s.J_1N = p.d("J_1N");
  s.disorder = parse_enum("disorder", p.s("disorder"), {DisorderKind::None, DisorderKind::Bond, DisorderKind::Field});
  s.v = p.d("v");
  s.seed = seed;
  const int n_a = p.n("N_A");
  const auto ts = one_to(p.n("t_max"));
  const DeltaSeries d = delta_timeseries(s, n_a, ts, linear_grid(0.0, p.d("tau_max"), p.d("dt")), basis_spec(p, seed));
  ResultTable t{{"quantity", "t", "tau", "value"}, {}};
  for (std::size_t k = 0; k < ts.size(); ++k)
    for (std::size_t i = 0; i < d.tau.size(); ++i) t.add({std::string("delta"), std::int64_t{ts[k]}, d.tau[i], d.delta[k][i]});
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const std::int64_t tk = ts[k];
    const auto fit = [&](double lo, double hi) {
      std::size_t m = 0;
      for (double x : d.tau) m += x >= lo && x <= hi;
      return m >= 2 ? summarize_series(d.tau, d.delta[k], lo, hi).early : LinearFit{kNaN, kNaN, kNaN};
    };
    const LinearFit early = fit(p.d("early_lo"), p.d("early_hi"));
    const std::vector<double> late(d.delta[k].end() - static_cast<std::ptrdiff_t>(d.tau.size() / 3), d.delta[k].end());
    t.add({std::string("early_exponent"), tk, kNaN, early.slope});
    t.add({std::string("early_r2"), tk, kNaN, early.r2});
    t.add({std::string("intermediate_exponent"), tk, kNaN, fit(p.d("mid_lo"), p.d("mid_hi")).slope});
    t.add({std::string("late_mean"), tk, kNaN, late.empty() ? kNaN : mean_stderr(late).mean});
    t.add({std::string("late_sigma"), tk, kNaN, late.size() < 2 ? kNaN : sample_stddev(late)});
  }
  if (p.n("baseline_samples") > 0) {
    const Baseline b = rmt_baseline(s.N, n_a, ts, p.n("baseline_samples"), seed + 1);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      t.add({std::string("baseline_mean"), std::int64_t{ts[k]}, kNaN, b.per_t[k].mean});
      t.add({std::string("baseline_sd"), std::int64_t{ts[k]}, kNaN, b.sigma[k]});
    }
  }
  return t;
}

}  // namespace detail

inline const std::vector<Experiment>& catalog() {
  using namespace std::string_literals;
  static const std::vector<Experiment> all = [] {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Experiment> v;
    v.push_back({"kho-classical",
                 "Kicked oscillator stroboscopic map: origin stability, bifurcation point, phase portrait",
                 {"classical::kho_origin_analysis", "classical::kho_poincare_section"},
                 {4},
                 {{"R", 4.0, "resonance ratio"},
                  {"K_over_omega", 2.5, "kick strength K/omega"},
                  {"orbits", std::int64_t{10}, "number of phase-portrait orbits"},
                  {"steps", std::int64_t{200}, "map iterations per orbit"},
                  {"radius", 3.0, "largest initial X"}},
                 detail::kho_classical});
    v.push_back({"kho-otoc",
                 "Kicked oscillator ladder OTOC, vacuum (M=1) or Fock average; closed-form oracle at R=2",
                 {"kho::avg_fock_otoc_series", "kho::r2_vacuum_otoc", "kho::r2_fock_average_otoc"},
                 {1, 2, 3},
                 {{"R", 2.0, "resonance ratio (golden mean for the linear law)"},
                  {"K", 0.1, "kick strength"},
                  {"omega", 1.0, "oscillator frequency"},
                  {"hbar", 1.0, "Planck constant"},
                  {"D", std::int64_t{256}, "Fock truncation"},
                  {"M", std::int64_t{1}, "number of Fock states averaged"},
                  {"t_max", std::int64_t{50}, "last kick"},
                  {"stride", std::int64_t{1}, "output stride in kicks"}},
                 detail::kho_otoc});
    v.push_back({"kho-qfi",
                 "Frequency-estimation QFI of a coherent probe under repeated kicks",
                 {"metrology::qfi_series", "metrology::r2_qfi_series"},
                 {5},
                 {{"R", 3.0 + golden, "resonance ratio"},
                  {"K", 0.1, "kick strength"},
                  {"omega", 1.0, "oscillator frequency"},
                  {"hbar", 1.0, "Planck constant"},
                  {"D", std::int64_t{256}, "Fock truncation"},
                  {"x0", 0.0, "probe center X"},
                  {"p0", 0.0, "probe center P"},
                  {"t_max", std::int64_t{100}, "last kick"},
                  {"stride", std::int64_t{1}, "output stride in kicks"}},
                 detail::kho_qfi});
    v.push_back({"kct-otoc",
                 "Kicked coupled tops OTOC series, computed sector by sector",
                 {"kct::izjz_otoc_series", "kct::ixjx_otoc_series"},
                 {6},
                 {{"J", 2.0, "spin length"},
                  {"alpha", 6.0, "coupling"},
                  {"beta", std::numbers::pi / 2.0, "kick angle"},
                  {"operator", "izjz"s, "izjz or ixjx"},
                  {"t_max", std::int64_t{20}, "last kick"}},
                 detail::kct_otoc});
    v.push_back({"kct-classical",
                 "Kicked coupled tops classical Lyapunov exponents on the Fz=0 surface",
                 {"classical::benettin_lyapunov", "classical::kct_fz0_initial_conditions"},
                 {7},
                 {{"alpha", 6.0, "coupling"},
                  {"beta", std::numbers::pi / 2.0, "kick angle"},
                  {"initial_conditions", std::int64_t{100}, "number of trajectories"},
                  {"steps", std::int64_t{2000}, "map iterations per trajectory"}},
                 detail::kct_classical});
    v.push_back({"kct-rmt",
                 "Block-COE saturation of the kicked-tops OTOC: closed form against Monte Carlo",
                 {"kct::rmt_saturation_C2"},
                 {8},
                 {{"J", 1.0, "spin length"},
                  {"operator", "ixjx"s, "ixjx or izjz"},
                  {"samples", std::int64_t{2000}, "Monte Carlo samples"}},
                 detail::kct_rmt});
    v.push_back({"rmt-check",
                 "Random-matrix ensemble checks: CUE/COE/GUE moments, GUE OTOC identity, dGUE Fourier value",
                 {"rmt::sample_cue", "rmt::sample_coe", "kct::coe_conjugation_zscore", "kct::gue_otoc_identity",
                  "kct::dgue_cgp"},
                 {8, 9},
                 {{"check", "cue"s, "cue|coe|gue|gue-otoc|dgue"},
                  {"d", std::int64_t{4}, "matrix (or local) dimension"},
                  {"t", std::int64_t{1}, "power of the unitary"},
                  {"samples", std::int64_t{2000}, "Monte Carlo samples"}},
                 detail::rmt_check});
    v.push_back({"designs-delta",
                 "Projected-ensemble distance to Haar moments against bath size",
                 {"designs::delta_samples", "designs::build_basis"},
                 {10},
                 {{"generator", "haar"s, "haar or a symmetry name"},
                  {"charge", std::int64_t{0}, "symmetry sector"},
                  {"basis", "computational"s, "measurement basis"},
                  {"alpha", 1.0, "alpha-mix parameter"},
                  {"N_A", std::int64_t{3}, "subsystem size"},
                  {"N_B_min", std::int64_t{4}, "smallest bath"},
                  {"N_B_max", std::int64_t{9}, "largest bath"},
                  {"t_max", std::int64_t{3}, "highest moment"},
                  {"samples", std::int64_t{10}, "generator states per bath size"}},
                 detail::designs_delta});
    v.push_back({"designs-violation",
                 "Symmetry violation of a measurement basis for every split",
                 {"designs::violation", "designs::build_projector"},
                 {11},
                 {{"symmetry", "z2"s, "symmetry name"},
                  {"charge", std::int64_t{0}, "symmetry sector"},
                  {"basis", "computational"s, "measurement basis"},
                  {"alpha", 1.0, "alpha-mix parameter"},
                  {"N", std::int64_t{6}, "total sites"}},
                 detail::designs_violation});
    v.push_back({"designs-moment",
                 "Moment theorem check: Monte Carlo moments of symmetric states against the closed form",
                 {"designs::symmetric_moment_mc_check", "designs::z2_closed_form_moment"},
                 {12},
                 {{"mode", "symmetric"s, "symmetric or z2-projected"},
                  {"symmetry", "translation"s, "symmetry name (symmetric mode)"},
                  {"charge", std::int64_t{0}, "symmetry sector"},
                  {"basis", "sigma-x"s, "measurement basis (z2-projected mode)"},
                  {"alpha", 1.0, "alpha-mix parameter"},
                  {"N", std::int64_t{4}, "total sites"},
                  {"N_A", std::int64_t{1}, "subsystem size (z2-projected mode)"},
                  {"t", std::int64_t{1}, "moment"},
                  {"samples", std::int64_t{2000}, "Monte Carlo samples"}},
                 detail::designs_moment});
    v.push_back({"ising-deep",
                 "Mixed-field Ising chain: projected-ensemble distance over time, exponents, late plateau",
                 {"ising::delta_timeseries", "ising::summarize_series", "ising::rmt_baseline"},
                 {13},
                 {{"N", std::int64_t{10}, "chain length"},
                  {"N_A", std::int64_t{3}, "subsystem size"},
                  {"bc", "pbc"s, "pbc|obc|weak-bond"},
                  {"J_1N", 0.5, "closing bond for weak-bond"},
                  {"disorder", "none"s, "none|bond|field"},
                  {"v", 0.0, "disorder variance"},
                  {"basis", "computational"s, "measurement basis"},
                  {"alpha", 1.0, "alpha-mix parameter"},
                  {"tau_max", 20.0, "final time"},
                  {"dt", 0.1, "time step of the output grid"},
                  {"t_max", std::int64_t{3}, "highest moment"},
                  {"early_lo", 1.0, "early fit window start"},
                  {"early_hi", 4.0, "early fit window end"},
                  {"mid_lo", 4.0, "intermediate fit window start"},
                  {"mid_hi", 10.0, "intermediate fit window end"},
                  {"baseline_samples", std::int64_t{0}, "random-state baseline samples (0: skip)"}},
                 detail::ising_deep});
    return v;
  }();
  return all;
}

inline const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return e;
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

struct RunOutput {
  std::string rendered;
  ResultTable table;
  Metadata meta;
};

// Resolves defaults into cfg.params, runs, renders. Writes cfg.output_path when set.
inline RunOutput run(ExperimentConfig& cfg, const std::string& version) {
  const Experiment& e = find_experiment(cfg.experiment);
  cfg.params = resolve_params(e, cfg.params);
  const auto start = std::chrono::steady_clock::now();
  RunOutput out;
  out.table = e.run(Params(cfg.params), cfg.seed);
  out.meta.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.meta.version = version;
  out.meta.experiment = e.name;
  out.meta.config_hash = cfg.hash_hex();
  out.meta.seed = cfg.seed;
  out.meta.workers = worker_count();
  out.meta.config = cfg.serialize();
  out.rendered = render(out.table, out.meta, cfg.format);
  if (!cfg.output_path.empty()) {
    std::ofstream f(cfg.output_path, std::ios::binary);
    if (!f) throw Error("cannot write output file '" + cfg.output_path + "'");
    f << out.rendered;
  }
  return out;
}

}  // namespace qchaos::runner
