// ppwave: geodesics and causal curves.
//
// Geodesics of the reduced model solve the Euler-Lagrange equations of
// L = eta' xi' - f(tau) eta'^2 + tau'^2 / 2:
//
//     eta'' = 0,   tau'' = -f'(tau) eta'^2,   xi'' = 2 f'(tau) tau' eta',
//
// with first integral xi' - 2 f eta' (xi is cyclic up to the eta momentum).

#ifndef PPWAVE_GEODESICS_HPP_
#define PPWAVE_GEODESICS_HPP_

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ppwave/common.hpp"
#include "ppwave/spacetimes.hpp"

namespace ppwave {

struct GeodesicState {
  Point3 point;
  Tangent3 velocity;
};

struct GeodesicDerivative {
  Tangent3 dpoint;     // = velocity
  Tangent3 dvelocity;  // acceleration
};

struct SampleLog {
  double norm_sq = 0.0;         // g(gamma', gamma')
  double deta = 0.0;            // d eta / ds
  double first_integral = 0.0;  // xi' - 2 f eta'
};

// Discretized curve; all arrays have the same length >= 2.
struct CurveSample {
  std::vector<double> params;
  std::vector<Point3> points;
  std::vector<Tangent3> tangents;
  std::vector<SampleLog> logs;

  std::size_t size() const { return params.size(); }

  void push(double s, Point3 const& p, Tangent3 const& v, SampleLog const& l) {
    params.push_back(s);
    points.push_back(p);
    tangents.push_back(v);
    logs.push_back(l);
  }

  bool valid() const {
    std::size_t const n = params.size();
    if (n < 2 || points.size() != n || tangents.size() != n ||
        logs.size() != n) {
      return false;
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (!(params[i] > params[i - 1])) return false;
    }
    return true;
  }
};

// Integration left the finite range; carries the samples up to the last
// finite state.
class IntegrationBlowup : public std::runtime_error {
 public:
  IntegrationBlowup(std::string const& what, CurveSample last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  CurveSample const& last_good() const { return last_good_; }

 private:
  CurveSample last_good_;
};

inline GeodesicDerivative geodesic_rhs(ReducedModel const& model,
                                       GeodesicState const& s) {
  double const df = model.df(s.point.tau);
  Tangent3 const& v = s.velocity;
  return {v, {2.0 * df * v.dtau * v.deta, 0.0, -df * v.deta * v.deta}};
}

inline SampleLog geodesic_log(ReducedModel const& model,
                              GeodesicState const& s) {
  Tangent3 const& v = s.velocity;
  return {metric_inner(model, s.point, v, v), v.deta,
          v.dxi - 2.0 * model.f(s.point.tau) * v.deta};
}

// Classical fixed-step RK4 on [0, s_max]; the final step is shortened so the
// last sample sits exactly at s_max.
inline CurveSample integrate_geodesic(ReducedModel const& model,
                                      GeodesicState const& init, double s_max,
                                      double h) {
  if (!(h > 0.0) || !(s_max > 0.0) || !std::isfinite(h) ||
      !std::isfinite(s_max)) {
    throw InputError("integrate_geodesic: need h > 0 and s_max > 0");
  }
  if (!is_finite(init.point) || !is_finite(init.velocity)) {
    throw InputError("integrate_geodesic: non-finite initial state");
  }
  auto const n_steps =
      static_cast<std::size_t>(std::ceil(s_max / h * (1.0 - 1e-12)));
  CurveSample out;
  out.params.reserve(n_steps + 1);
  out.points.reserve(n_steps + 1);
  out.tangents.reserve(n_steps + 1);
  out.logs.reserve(n_steps + 1);

  auto advance = [](GeodesicState const& y, GeodesicDerivative const& k,
                    double dt) {
    return GeodesicState{y.point + dt * k.dpoint,
                         y.velocity + dt * k.dvelocity};
  };

  GeodesicState y = init;
  out.push(0.0, y.point, y.velocity, geodesic_log(model, y));
  double s = 0.0;
  for (std::size_t k = 0; k < n_steps; ++k) {
    double const s_next =
        k + 1 == n_steps ? s_max : static_cast<double>(k + 1) * h;
    double const dt = s_next - s;
    auto const k1 = geodesic_rhs(model, y);
    auto const k2 = geodesic_rhs(model, advance(y, k1, 0.5 * dt));
    auto const k3 = geodesic_rhs(model, advance(y, k2, 0.5 * dt));
    auto const k4 = geodesic_rhs(model, advance(y, k3, dt));
    GeodesicState next;
    next.point = y.point + (dt / 6.0) * (k1.dpoint + 2.0 * k2.dpoint +
                                         2.0 * k3.dpoint + k4.dpoint);
    next.velocity =
        y.velocity + (dt / 6.0) * (k1.dvelocity + 2.0 * k2.dvelocity +
                                   2.0 * k3.dvelocity + k4.dvelocity);
    if (!is_finite(next.point) || !is_finite(next.velocity)) {
      throw IntegrationBlowup(
          "integrate_geodesic: state became non-finite at s = " +
              std::to_string(s_next),
          std::move(out));
    }
    y = next;
    s = s_next;
    out.push(s, y.point, y.velocity, geodesic_log(model, y));
  }
  return out;
}

// State of a CW_n(A) geodesic.
struct CWState {
  PointN point;
  TangentN velocity;
};

namespace detail {

struct ModeValue {
  double y = 0.0;
  double dy = 0.0;
  double integral_sq = 0.0;  // int_0^t y^2
};

// y'' = kappa y with y(0) = a, y'(0) = w, evaluated at t. The three regimes
// share one set of formulas written in terms of u = sqrt|kappa| t so the
// kappa -> 0 limit is free of cancellation.
inline ModeValue solve_mode(double kappa, double a, double w, double t) {
  ModeValue m;
  if (kappa == 0.0) {
    m.y = a + w * t;
    m.dy = w;
    m.integral_sq = a * a * t + a * w * t * t + w * w * t * t * t / 3.0;
    return m;
  }
  double const root = std::sqrt(std::abs(kappa));
  double const u = root * t;
  double c, sinc, sinc2, cc, cs, ss;  // int cos^2, int cos sin/root, ...
  if (kappa < 0.0) {
    c = std::cos(u);
    sinc = u == 0.0 ? 1.0 : std::sin(u) / u;
    sinc2 = u == 0.0 ? 1.0 : std::sin(2.0 * u) / (2.0 * u);
    cc = t * (0.5 + 0.5 * sinc2);
    cs = 0.5 * t * t * sinc * sinc;
    double const r = std::abs(u) < 1e-2
                         ? 1.0 / 3.0 - u * u / 15.0 + 2.0 * u * u * u * u / 315.0
                         : (2.0 * u - std::sin(2.0 * u)) / (4.0 * u * u * u);
    ss = t * t * t * r;
    m.y = a * c + w * t * sinc;
    m.dy = -a * root * std::sin(u) + w * c;
  } else {
    c = std::cosh(u);
    sinc = u == 0.0 ? 1.0 : std::sinh(u) / u;
    sinc2 = u == 0.0 ? 1.0 : std::sinh(2.0 * u) / (2.0 * u);
    cc = t * (0.5 + 0.5 * sinc2);
    cs = 0.5 * t * t * sinc * sinc;
    double const r = std::abs(u) < 1e-2
                         ? 1.0 / 3.0 + u * u / 15.0 + 2.0 * u * u * u * u / 315.0
                         : (std::sinh(2.0 * u) - 2.0 * u) / (4.0 * u * u * u);
    ss = t * t * t * r;
    m.y = a * c + w * t * sinc;
    m.dy = a * root * std::sinh(u) + w * c;
  }
  m.integral_sq = a * a * cc + 2.0 * a * w * cs + w * w * ss;
  return m;
}

}  // namespace detail

// Closed-form CW_n(A) geodesic at parameter s. With k = eta'(0) the
// transverse part solves x'' = 2 k^2 A x mode by mode in the eigenbasis of A;
// xi follows from the first integral xi' + 2 x^T A x eta' = const.
inline CWState cw_geodesic_closed_form(SymMatrix const& A, CWState const& init,
                                       double s) {
  std::size_t const n = A.dim();
  if (init.point.x.size() != n || init.velocity.dx.size() != n) {
    throw InputError("cw_geodesic_closed_form: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A.to_eigen());
  Eigen::MatrixXd const& Q = solver.eigenvectors();
  Eigen::VectorXd const& lambda = solver.eigenvalues();
  Eigen::Map<Eigen::VectorXd const> x0(init.point.x.data(),
                                       static_cast<Eigen::Index>(n));
  Eigen::Map<Eigen::VectorXd const> v0(init.velocity.dx.data(),
                                       static_cast<Eigen::Index>(n));
  Eigen::VectorXd const y0 = Q.transpose() * x0;
  Eigen::VectorXd const w0 = Q.transpose() * v0;

  double const k = init.velocity.deta;
  Eigen::VectorXd y(n), dy(n);
  double quad_integral = 0.0;  // int_0^s x^T A x
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i) {
    auto const mode =
        detail::solve_mode(2.0 * k * k * lambda[i], y0[i], w0[i], s);
    y[i] = mode.y;
    dy[i] = mode.dy;
    quad_integral += lambda[i] * mode.integral_sq;
  }
  Eigen::VectorXd const x = Q * y;
  Eigen::VectorXd const dx = Q * dy;

  double const momentum = init.velocity.dxi + 2.0 * k * A.quadratic_form(init.point.x);
  CWState out;
  out.point.x.assign(x.data(), x.data() + n);
  out.velocity.dx.assign(dx.data(), dx.data() + n);
  out.point.eta = init.point.eta + k * s;
  out.velocity.deta = k;
  out.point.xi = init.point.xi + momentum * s - 2.0 * k * quad_integral;
  out.velocity.dxi = momentum - 2.0 * k * A.quadratic_form(out.point.x);
  return out;
}

struct CausalSamplerOptions {
  double max_deta = 1e-2;   // deta ~ uniform(0, max_deta]
  double cone_fill = 0.9;   // |dtau| <= deta sqrt(2 cone_fill f+)
};

// Piecewise-linear future-directed causal curve with n_steps segments,
// parametrized by segment index. Each step draws deta > 0, then dtau, then
// dxi uniformly in [bound - span, bound] below the cone bound
// f(tau_mid) deta - dtau^2 / (2 deta) evaluated at the segment midpoint.
inline CurveSample sample_causal_curve(ReducedModel const& model,
                                       Point3 const& start, std::size_t n_steps,
                                       std::uint64_t seed,
                                       CausalSamplerOptions const& opt = {}) {
  if (n_steps < 1) throw InputError("sample_causal_curve: n_steps >= 1");
  if (!is_finite(start)) throw InputError("sample_causal_curve: bad start");
  Rng rng(seed);
  std::vector<Point3> pts;
  pts.reserve(n_steps + 1);
  pts.push_back(start);
  for (std::size_t k = 0; k < n_steps; ++k) {
    Point3 const& p = pts.back();
    double const deta = opt.max_deta * rng.uniform_positive();
    double const f_here = model.f(p.tau);
    double const f_plus = std::max(f_here, 0.0) + 1e-12;
    double dtau = 0.0;
    double const u_tau = rng.uniform(-1.0, 1.0);
    if (f_here > 0.0) dtau = u_tau * deta * std::sqrt(2.0 * opt.cone_fill * f_plus);
    double const f_mid = model.f(p.tau + 0.5 * dtau);
    double const bound = f_mid * deta - dtau * dtau / (2.0 * deta);
    double const span = opt.max_deta * (1.0 + f_plus);
    double const dxi = bound - rng.uniform() * span;
    pts.push_back(p + Tangent3{dxi, deta, dtau});
  }
  CurveSample out;
  for (std::size_t k = 0; k <= n_steps; ++k) {
    Tangent3 const v = k < n_steps ? pts[k + 1] - pts[k] : pts[k] - pts[k - 1];
    SampleLog const log{metric_inner(model, pts[k], v, v), v.deta,
                        v.dxi - 2.0 * model.f(pts[k].tau) * v.deta};
    out.push(static_cast<double>(k), pts[k], v, log);
  }
  return out;
}

struct CWCurveSample {
  std::vector<double> params;
  std::vector<PointN> points;
};

// CW analogue of sample_causal_curve. The transverse step is drawn in a box
// scaled by the local F+ = max(-x^T A x, 0) + 1, so the curve leaves the
// origin even where F vanishes; the dxi draw keeps each chord causal at its
// midpoint.
inline CWCurveSample sample_causal_curve_cw(CWModel const& model,
                                            PointN const& start,
                                            std::size_t n_steps,
                                            std::uint64_t seed,
                                            CausalSamplerOptions const& opt = {}) {
  std::size_t const n = model.dim();
  if (n_steps < 1) throw InputError("sample_causal_curve_cw: n_steps >= 1");
  if (start.x.size() != n) {
    throw InputError("sample_causal_curve_cw: dimension mismatch");
  }
  Rng rng(seed);
  CWCurveSample out;
  out.params.push_back(0.0);
  out.points.push_back(start);
  std::vector<double> mid(n);
  for (std::size_t k = 0; k < n_steps; ++k) {
    PointN const& p = out.points.back();
    double const deta = opt.max_deta * rng.uniform_positive();
    double const f_plus = std::max(model.profile(p.x), 0.0) + 1.0;
    double const half_width =
        deta * std::sqrt(2.0 * opt.cone_fill * f_plus / static_cast<double>(n));
    PointN next = p;
    double dx_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double const dx = rng.uniform(-1.0, 1.0) * half_width;
      next.x[i] = p.x[i] + dx;
      mid[i] = p.x[i] + 0.5 * dx;
      dx_sq += dx * dx;
    }
    double const bound = model.profile(mid) * deta - dx_sq / (2.0 * deta);
    double const span = opt.max_deta * f_plus;
    next.xi = p.xi + bound - rng.uniform() * span;
    next.eta = p.eta + deta;
    out.params.push_back(static_cast<double>(k + 1));
    out.points.push_back(std::move(next));
  }
  return out;
}

struct EscapeReport {
  bool escaped = false;
  std::optional<double> eta_at_escape;
  double eta_budget = 0.0;
  double tau_reached = 0.0;
  // (cutoff, eta integral up to cutoff), cutoffs doubling away from tau0
  std::vector<std::pair<double, double>> refinement_history;
};

struct EscapeOptions {
  double eta_budget = 1e3;
  double convergence = kDefaultTolerances.escape_convergence;
  double quadrature_tol = 1e-13;
};

// Null curves of -2 deta^2 + dtau^2 / f(tau) satisfy d eta / d tau =
// 1 / sqrt(2 f). The eta increment needed to reach tau = T is integrated
// over cutoffs T_k = tau0 + 2^k max(1, |tau0|); the curve escapes when the
// integral converges below the budget.
inline EscapeReport null_escape_integrate(Profile const& f, double tau0,
                                          EscapeOptions const& opt = {}) {
  if (!std::isfinite(tau0)) throw InputError("null_escape_integrate: tau0");
  if (!(opt.eta_budget > 0.0)) {
    throw InputError("null_escape_integrate: eta_budget must be positive");
  }
  auto integrand = [&f](double tau) {
    double const v = f(tau);
    if (!(v > 0.0)) {
      throw InputError("null_escape_integrate: f(tau) <= 0 at tau = " +
                       std::to_string(tau));
    }
    return 1.0 / std::sqrt(2.0 * v);
  };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto integrate = [&](double a, double b) {
    return Quad::integrate(integrand, a, b, 15, opt.quadrature_tol);
  };

  EscapeReport r;
  r.eta_budget = opt.eta_budget;
  double const unit = std::max(1.0, std::abs(tau0));
  double lo = tau0;
  double total = 0.0;
  for (int k = 0;; ++k) {
    double const hi = tau0 + std::ldexp(unit, k);
    if (!std::isfinite(hi)) {
      r.escaped = false;
      r.tau_reached = lo;
      return r;
    }
    double const piece = integrate(lo, hi);
    if (total + piece > opt.eta_budget) {
      // Budget runs out inside [lo, hi]; bisect for the crossing.
      double a = lo, b = hi;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::abs(b); ++it) {
        double const m = 0.5 * (a + b);
        if (total + integrate(lo, m) > opt.eta_budget) {
          b = m;
        } else {
          a = m;
        }
      }
      r.escaped = false;
      r.tau_reached = 0.5 * (a + b);
      return r;
    }
    double const previous = total;
    total += piece;
    r.refinement_history.emplace_back(hi, total);
    if (k > 0 && std::abs(total - previous) < opt.convergence * total) {
      r.escaped = true;
      r.eta_at_escape = total;
      r.tau_reached = hi;
      return r;
    }
    lo = hi;
  }
}

}  // namespace ppwave

#endif  // PPWAVE_GEODESICS_HPP_
