// ppwave: the acceptance suite. Each criterion runs a fixed, seeded
// computation and reports pass/fail, its metrics and its wall-clock time.
// The same functions back the acceptance test binary and the verify_all
// scenario of the command-line tool.

#ifndef PPWAVE_ACCEPTANCE_HPP_
#define PPWAVE_ACCEPTANCE_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ppwave/common.hpp"
#include "ppwave/geodesics.hpp"
#include "ppwave/io.hpp"
#include "ppwave/reachability.hpp"
#include "ppwave/spacetimes.hpp"
#include "ppwave/timefunctions.hpp"

namespace ppwave {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  bool asserted = true;  // false: outcome recorded, not judged
  double seconds = 0.0;
  double time_limit = 0.0;
  std::string summary;
  Json metrics = Json::object();
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  unsigned threads = 1;
  bool enforce_time_limits = true;
};

namespace acceptance {

inline CriterionResult make_result(int id, std::string name, double time_limit) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  r.time_limit = time_limit;
  return r;
}

// Relative error with an absolute floor for near-zero reference values.
inline double relative_error(double approx, double exact, double floor = 1e-6) {
  return std::abs(approx - exact) / std::max(std::abs(exact), floor);
}

inline CriterionResult timelike_gradient(AcceptanceOptions const& opt) {
  auto r = make_result(1, "timelike_gradient", 5.0);
  TimeFnParams const params(0.1, 1.0, 1.0);
  GridSpec2 const grid{-50.0, 50.0, 1001, -50.0, 50.0, 1001};
  auto const rep = verify_timelike_gradient(params, grid, opt.threads);
  double const origin = grad_time_fn({0.0, 0.0, 0.0}, params).norm_sq;
  bool const origin_ok = std::abs(origin + 0.5) <= 1e-12;
  r.pass = rep.max_norm_sq < 0.0 && origin_ok;
  r.metrics = {{"max_norm_sq", rep.max_norm_sq},
               {"argmax", {rep.argmax_xi, rep.argmax_tau}},
               {"origin_norm_sq", origin},
               {"max_ode_residual", rep.max_ode_residual},
               {"max_ineq3_residual", rep.max_ineq3_residual},
               {"nodes", grid.size()}};
  r.summary = "max |grad T|^2 = " + format_double(rep.max_norm_sq) +
              ", origin = " + format_double(origin);
  return r;
}

inline CriterionResult gradient_oracle(AcceptanceOptions const& opt) {
  auto r = make_result(2, "gradient_fd_oracle", 1.0);
  TimeFnParams const params(0.1, 1.0, 1.0);
  Rng rng(stream_seed(opt.seed, 2));
  double const h = 1e-4;
  double worst = 0.0;
  for (int n = 0; n < 1000; ++n) {
    Point3 const p{rng.uniform(-1e3, 1e3), 0.0, rng.uniform(-1e3, 1e3)};
    auto const g = grad_time_fn(p, params);
    auto T = [&](double dxi, double deta, double dtau) {
      return time_fn({p.xi + dxi, p.eta + deta, p.tau + dtau}, params);
    };
    double const fd_xi = (T(h, 0, 0) - T(-h, 0, 0)) / (2.0 * h);
    double const fd_eta = (T(0, h, 0) - T(0, -h, 0)) / (2.0 * h);
    double const fd_tau = (T(0, 0, h) - T(0, 0, -h)) / (2.0 * h);
    worst = std::max({worst, relative_error(fd_xi, -g.phi_xi),
                      relative_error(fd_eta, 1.0),
                      relative_error(fd_tau, -g.phi_tau)});
  }
  r.pass = worst <= kDefaultTolerances.fd_gradient;
  r.metrics = {{"points", 1000}, {"step", h}, {"max_relative_error", worst}};
  r.summary = "max relative error " + format_double(worst);
  return r;
}

inline CriterionResult geodesic_oracle(AcceptanceOptions const&) {
  auto r = make_result(3, "geodesic_rk4_oracle", 2.0);
  auto const model = ReducedModel::quadratic(1.0, 1.0);
  // eta' = 1 turns the tau equation into tau'' = -2 tau.
  GeodesicState const init{{0.0, 0.0, 1.0}, {2.0, 1.0, 0.0}};
  auto const curve = integrate_geodesic(model, init, 10.0, 1e-3);
  double sup = 0.0, drift_norm = 0.0, drift_first = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    double const s = curve.params[i];
    sup = std::max(sup, std::abs(curve.points[i].tau - std::cos(kSqrt2 * s)));
    drift_norm = std::max(drift_norm, std::abs(curve.logs[i].norm_sq -
                                               curve.logs[0].norm_sq));
    drift_first = std::max(drift_first, std::abs(curve.logs[i].first_integral -
                                                 curve.logs[0].first_integral));
  }
  double const tol = kDefaultTolerances.ode_drift;
  r.pass = sup <= 1e-6 && drift_norm <= tol && drift_first <= tol;
  r.metrics = {{"samples", curve.size()},
               {"sup_error", sup},
               {"norm_sq_drift", drift_norm},
               {"first_integral_drift", drift_first}};
  r.summary = "sup error " + format_double(sup) + ", drifts " +
              format_double(drift_norm) + " / " + format_double(drift_first);
  return r;
}

inline CriterionResult null_escape(AcceptanceOptions const&) {
  auto r = make_result(4, "null_escape", 2.0);
  auto const quartic = null_escape_integrate(Profile::power(4.0), 1.0);
  auto const cubic = null_escape_integrate(Profile::power(3.0), 1.0);
  EscapeOptions budget;
  budget.eta_budget = 5.0;
  auto const quad = null_escape_integrate(Profile::quadratic(1.0, 1.0), 0.0, budget);
  double const expect_tau = std::sinh(kSqrt2 * 5.0);
  bool const q4 = quartic.escaped &&
                  std::abs(*quartic.eta_at_escape - 1.0 / kSqrt2) <= 1e-3;
  bool const q3 = cubic.escaped && std::abs(*cubic.eta_at_escape - kSqrt2) <= 1e-3;
  double const rel = std::abs(quad.tau_reached - expect_tau) / expect_tau;
  bool const q0 = !quad.escaped && rel <= 1e-4;
  r.pass = q4 && q3 && q0;
  r.metrics = {{"tau4", to_json(quartic)},
               {"tau3", to_json(cubic)},
               {"f0", to_json(quad)},
               {"f0_expected_tau", expect_tau},
               {"f0_relative_error", rel}};
  r.summary = "eta_inf(tau^4) = " +
              (quartic.eta_at_escape ? format_double(*quartic.eta_at_escape)
                                     : std::string("none")) +
              ", eta_inf(tau^3) = " +
              (cubic.eta_at_escape ? format_double(*cubic.eta_at_escape)
                                   : std::string("none")) +
              ", f0 tau(5) rel err " + format_double(rel);
  return r;
}

// Random slice: finite values on a random subset of nodes, sentinel
// elsewhere, profile values in [0, 50).
struct RandomSlice {
  std::vector<double> values;
  std::vector<double> f;
  double d_tau = 0.0;
  double d_eta = 0.0;
  Direction dir = Direction::upper_from_p1;
};

inline RandomSlice random_slice(std::uint64_t seed, std::size_t m) {
  Rng rng(seed);
  RandomSlice s;
  s.dir = rng.uniform() < 0.5 ? Direction::upper_from_p1
                              : Direction::lower_from_p2;
  double const density = rng.uniform(0.05, 1.0);
  double const sentinel = unreachable(s.dir);
  s.values.resize(m);
  s.f.resize(m);
  bool any = false;
  for (std::size_t j = 0; j < m; ++j) {
    bool const finite = rng.uniform() < density;
    double const v = rng.uniform(-10.0, 10.0);
    s.values[j] = finite ? v : sentinel;
    any = any || finite;
    s.f[j] = rng.uniform(0.0, 50.0);
  }
  if (!any) s.values[m / 2] = 0.0;
  s.d_tau = rng.uniform(1e-3, 0.1);
  s.d_eta = rng.uniform(1e-4, 0.1);
  return s;
}

inline CriterionResult hopf_lax_dual(AcceptanceOptions const& opt) {
  auto r = make_result(5, "hopf_lax_dual_implementation", 30.0);
  std::size_t const n = 1000, m = 2001;
  std::vector<double> worst(n, 0.0);
  std::vector<int> mismatch(n, 0);
  parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto const s = random_slice(stream_seed(opt.seed, 5000 + i), m);
      auto const fast = propagate_step(s.values, s.f, s.d_tau, s.d_eta, s.dir);
      auto const ref =
          propagate_step_reference(s.values, s.f, s.d_tau, s.d_eta, s.dir);
      for (std::size_t j = 0; j < m; ++j) {
        if (std::isinf(fast[j]) || std::isinf(ref[j])) {
          if (fast[j] != ref[j]) mismatch[i] = 1;
          continue;
        }
        worst[i] = std::max(worst[i], std::abs(fast[j] - ref[j]));
      }
    }
  });
  double max_diff = 0.0;
  int sentinel_mismatches = 0;
  for (std::size_t i = 0; i < n; ++i) {
    max_diff = std::max(max_diff, worst[i]);
    sentinel_mismatches += mismatch[i];
  }
  r.pass = max_diff <= kDefaultTolerances.oracle_equality &&
           sentinel_mismatches == 0;
  r.metrics = {{"slices", n},
               {"nodes", m},
               {"max_abs_difference", max_diff},
               {"sentinel_mismatches", sentinel_mismatches}};
  r.summary = "max |fast - brute| = " + format_double(max_diff);
  return r;
}

inline GridSpec standard_grid() { return {0.0, 0.4, 400, -6.0, 6.0, 2001, 1e6}; }
inline Point3 standard_p1() { return {0.0, 0.0, 0.0}; }
inline Point3 standard_p2() { return {0.0, 0.4, 0.0}; }

inline CriterionResult lemma2_containment(AcceptanceOptions const&) {
  auto r = make_result(6, "lemma2_certificate_containment", 60.0);
  auto const model = ReducedModel::quadratic(1.0, 1.0);
  auto const diamond =
      compute_diamond(model, standard_p1(), standard_p2(), standard_grid());
  auto const cert = make_lemma2_certificate(standard_p1(), standard_p2(), 1.0, 1.0);
  auto const rep = verify_compactness(model, diamond, cert);
  r.pass = diamond.verdict == Verdict::bounded &&
           rep.status == CompactnessReport::Status::pass;
  r.metrics = {{"diamond", to_json(diamond, false)},
               {"certificate", to_json(cert)},
               {"compactness", to_json(rep)}};
  r.summary = std::string("verdict ") + to_string(diamond.verdict) +
              ", max_abs_x " + format_double(diamond.max_abs_x) + " <= d " +
              format_double(cert.d) + ", cell change " +
              format_double(rep.cell_change) + ", " + to_string(rep.status);
  return r;
}

inline CriterionResult time_monotonicity(AcceptanceOptions const& opt) {
  auto r = make_result(7, "time_function_monotonicity", 5.0);
  auto const model = ReducedModel::quadratic(1.0, 1.0);
  TimeFnParams const params(0.1, 1.0, 1.0);
  std::size_t const n = 1000, steps = 50;
  std::vector<double> min_slope(n, kInf), min_deta(n, kInf);
  parallel_for(n, opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      Rng rng(stream_seed(opt.seed, 7000 + c));
      Point3 const start{rng.uniform(-1.0, 1.0), 0.0, rng.uniform(-5.0, 5.0)};
      auto const curve = sample_causal_curve(model, start, steps, rng.next());
      for (std::size_t i = 0; i + 1 < curve.size(); ++i) {
        double const ds = curve.params[i + 1] - curve.params[i];
        double const dT = time_fn(curve.points[i + 1], params) -
                          time_fn(curve.points[i], params);
        min_slope[c] = std::min(min_slope[c], dT / ds);
        min_deta[c] = std::min(min_deta[c],
                               curve.points[i + 1].eta - curve.points[i].eta);
      }
    }
  });
  double slope = kInf, deta = kInf;
  for (std::size_t c = 0; c < n; ++c) {
    slope = std::min(slope, min_slope[c]);
    deta = std::min(deta, min_deta[c]);
  }
  r.pass = slope > 0.0 && deta >= 0.0;
  r.metrics = {{"curves", n}, {"segments_per_curve", steps},
               {"min_slope", slope}, {"min_deta", deta}};
  r.summary = "min dT/ds = " + format_double(slope);
  return r;
}

inline CriterionResult projection_causality(AcceptanceOptions const& opt) {
  auto r = make_result(8, "projection_causality", 10.0);
  CWModel const cw(SymMatrix::diagonal({-0.5, -0.5}));
  auto const target = dominating_reduced_model(cw);
  CurveBatchOptions batch;
  batch.seed = stream_seed(opt.seed, 8);
  batch.threads = opt.threads;
  auto const rep = check_causal_image_projection(cw, target, batch);
  r.pass = rep.worst_margin >= -1e-9;
  r.metrics = to_json(rep);
  r.metrics["target_c1"] = target.c1();
  r.metrics["target_c2"] = target.c2();
  r.summary = "worst residual " + format_double(rep.worst_margin) +
              ", fraction causal " + format_double(rep.fraction_causal);
  return r;
}

// Even random profile pair f <= g <= f0 given at the grid nodes.
inline std::pair<std::vector<double>, std::vector<double>> random_profile_pair(
    std::uint64_t seed, GridSpec const& grid) {
  Rng rng(seed);
  std::size_t const m = grid.n_tau;
  std::vector<double> f(m), g(m);
  for (std::size_t j = 0; j <= (m - 1) / 2; ++j) {
    double const tau = grid.tau_at(j);
    double const f0 = tau * tau + 1.0;
    double const gv = f0 * rng.uniform();
    double const fv = gv * rng.uniform();
    g[j] = g[m - 1 - j] = gv;
    f[j] = f[m - 1 - j] = fv;
  }
  return {f, g};
}

struct SymmetryTally {
  double reflection = 0.0;   // max |U(eta, tau) + L(eta2 - eta, tau)|
  double parity = 0.0;       // max |U(tau) - U(-tau)| and same for L
  std::size_t monotone_violations = 0;
};

inline double parity_defect(std::vector<double> const& s) {
  double worst = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    double const a = s[j], b = s[s.size() - 1 - j];
    if (a == b) continue;
    worst = std::isinf(a) || std::isinf(b) ? kInf
                                           : std::max(worst, std::abs(a - b));
  }
  return worst;
}

inline void symmetry_checks(std::vector<double> const& f, GridSpec const& grid,
                            SymmetryTally& t, ValueFunction* upper_out = nullptr,
                            ValueFunction* lower_out = nullptr) {
  std::size_t const k2 = grid.n_eta, j0 = (grid.n_tau - 1) / 2;
  auto upper = propagate(f, grid, 0, j0, 0.0, k2, Direction::upper_from_p1);
  auto lower = propagate(f, grid, k2, j0, 0.0, 0, Direction::lower_from_p2);
  for (std::size_t k = 0; k <= k2; ++k) {
    auto const& u = upper.slices[k];
    auto const& l = lower.slices[k2 - k];
    for (std::size_t j = 0; j < grid.n_tau; ++j) {
      if (u[j] == -l[j]) continue;
      t.reflection = std::isinf(u[j]) || std::isinf(l[j])
                         ? kInf
                         : std::max(t.reflection, std::abs(u[j] + l[j]));
    }
    t.parity = std::max({t.parity, parity_defect(u), parity_defect(lower.slices[k])});
  }
  if (upper_out) *upper_out = std::move(upper);
  if (lower_out) *lower_out = std::move(lower);
}

inline CriterionResult reachability_symmetries(AcceptanceOptions const& opt) {
  auto r = make_result(9, "reachability_symmetry_monotonicity", 60.0);
  GridSpec const grid = standard_grid();
  auto const model = ReducedModel::quadratic(1.0, 1.0);

  SymmetryTally standard;
  symmetry_checks(profile_at_nodes(model, grid), grid, standard);

  std::size_t const pairs = 100;
  std::vector<SymmetryTally> tallies(pairs);
  parallel_for(pairs, opt.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto const [f, g] = random_profile_pair(stream_seed(opt.seed, 9000 + i), grid);
      ValueFunction uf, lf, ug, lg;
      symmetry_checks(f, grid, tallies[i], &uf, &lf);
      symmetry_checks(g, grid, tallies[i], &ug, &lg);
      for (std::size_t k = 0; k < uf.slices.size(); ++k) {
        for (std::size_t j = 0; j < grid.n_tau; ++j) {
          if (uf.slices[k][j] > ug.slices[k][j]) ++tallies[i].monotone_violations;
          if (lf.slices[k][j] < lg.slices[k][j]) ++tallies[i].monotone_violations;
        }
      }
    }
  });
  SymmetryTally random;
  for (auto const& t : tallies) {
    random.reflection = std::max(random.reflection, t.reflection);
    random.parity = std::max(random.parity, t.parity);
    random.monotone_violations += t.monotone_violations;
  }
  double const tol = kDefaultTolerances.oracle_equality;
  r.pass = standard.reflection <= tol && standard.parity == 0.0 &&
           random.reflection <= tol && random.parity == 0.0 &&
           random.monotone_violations == 0;
  r.metrics = {{"standard", {{"reflection_max", standard.reflection},
                             {"parity_max", standard.parity}}},
               {"random_pairs", pairs},
               {"random", {{"reflection_max", random.reflection},
                           {"parity_max", random.parity},
                           {"monotone_violations", random.monotone_violations}}}};
  r.summary = "reflection " + format_double(std::max(standard.reflection,
                                                     random.reflection)) +
              ", parity " + format_double(std::max(standard.parity, random.parity)) +
              ", monotone violations " +
              std::to_string(random.monotone_violations);
  return r;
}

inline CriterionResult scaling_probe(AcceptanceOptions const& opt) {
  auto r = make_result(10, "scaling_probe", 60.0);
  r.asserted = false;
  auto const model = ReducedModel::quadratic(1.0, 1.0);
  GridSpec const grid{0.0, 2.0, 400, -20.0, 20.0, 2001, 1e6};
  auto const cmp = diamond_via_scaling({0.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, model, grid);
  CurveBatchOptions batch;
  batch.seed = stream_seed(opt.seed, 10);
  batch.threads = opt.threads;
  auto const sigma = check_causal_image_sigma(2.0, model, batch);
  r.pass = true;
  r.metrics = {{"diamond_via_scaling", to_json(cmp)},
               {"sigma_C2", to_json(sigma)}};
  r.summary = "C = " + format_double(cmp.C) + ", symmetric difference " +
              std::to_string(cmp.total_symmetric_difference) +
              " cells; sigma(C=2) causal fraction " +
              format_double(sigma.fraction_causal) + " (recorded)";
  return r;
}

}  // namespace acceptance

using CriterionFn = std::function<CriterionResult(AcceptanceOptions const&)>;

inline std::vector<CriterionFn> acceptance_criteria() {
  return {acceptance::timelike_gradient,  acceptance::gradient_oracle,
          acceptance::geodesic_oracle,    acceptance::null_escape,
          acceptance::hopf_lax_dual,      acceptance::lemma2_containment,
          acceptance::time_monotonicity,  acceptance::projection_causality,
          acceptance::reachability_symmetries, acceptance::scaling_probe};
}

// Runs one criterion, timing it and catching errors as failures.
inline CriterionResult run_criterion(CriterionFn const& fn,
                                     AcceptanceOptions const& opt) {
  auto const t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = fn(opt);
  } catch (std::exception const& e) {
    r.pass = false;
    r.summary = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                  .count();
  if (opt.enforce_time_limits && r.time_limit > 0.0 && r.seconds > r.time_limit) {
    r.pass = false;
    r.summary += " [over time limit]";
  }
  return r;
}

inline std::string format_criterion_line(CriterionResult const& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-36s %7.3fs  ",
                r.pass ? (r.asserted ? "PASS" : "INFO") : "FAIL", r.id,
                r.name.c_str(), r.seconds);
  return head + r.summary;
}

}  // namespace ppwave

#endif  // PPWAVE_ACCEPTANCE_HPP_
