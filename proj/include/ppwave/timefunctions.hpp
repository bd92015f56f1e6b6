// ppwave: explicit time functions of the quadratic pp-wave and the
// compactness certificate built from them.
//
// With f0(tau) = c1^2 tau^2 + c2^2 and psi = eps f0 the time function is
//
//     T(xi, eta, tau) = eta - phi_eps(xi / psi(tau)),
//     phi_eps(y)      = atan(sqrt2 eps c1 y) / (2 sqrt2 c1),
//
// where phi_eps solves phi'(y) (1 + 2 eps^2 c1^2 y^2) = eps / 2. Its gradient
// is timelike everywhere, |grad T|^2 = 2 f0 Phi_xi^2 + Phi_tau^2 - 2 Phi_xi < 0.

#ifndef PPWAVE_TIMEFUNCTIONS_HPP_
#define PPWAVE_TIMEFUNCTIONS_HPP_

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ppwave/common.hpp"
#include "ppwave/spacetimes.hpp"

namespace ppwave {

struct TimeFnParams {
  double eps;
  double c1;
  double c2;

  TimeFnParams(double eps_, double c1_, double c2_)
      : eps(eps_), c1(c1_), c2(c2_) {
    if (!(eps > 0.0) || !(c1 > 0.0) || !(c2 > 0.0) || !std::isfinite(eps) ||
        !std::isfinite(c1) || !std::isfinite(c2)) {
      throw InputError("TimeFnParams: eps, c1, c2 must be positive and finite");
    }
  }

  double f0(double tau) const { return c1 * c1 * tau * tau + c2 * c2; }
  double psi(double tau) const { return eps * f0(tau); }
  double dpsi(double tau) const { return eps * 2.0 * c1 * c1 * tau; }
};

inline double phi_eps(double x, TimeFnParams const& p) {
  return std::atan(kSqrt2 * p.eps * p.c1 * x) / (2.0 * kSqrt2 * p.c1);
}

inline double phi_eps_prime(double x, TimeFnParams const& p) {
  double const a = p.eps * p.c1 * x;
  return 0.5 * p.eps / (1.0 + 2.0 * a * a);
}

// xi / (c1^2 tau^2 + c2^2)
inline double normalized_xi(Point3 const& p, double c1, double c2) {
  return p.xi / (c1 * c1 * p.tau * p.tau + c2 * c2);
}

inline double time_fn(Point3 const& p, TimeFnParams const& params) {
  return p.eta - phi_eps(p.xi / params.psi(p.tau), params);
}

struct TimeGradient {
  Tangent3 vector;   // (1 - 2 f0 Phi_xi) d_xi - Phi_xi d_eta - Phi_tau d_tau
  double phi_xi = 0.0;
  double phi_tau = 0.0;
  double norm_sq = 0.0;
};

inline TimeGradient grad_time_fn(Point3 const& p,
                                 TimeFnParams const& params) {
  double const f0 = params.f0(p.tau);
  double const psi = params.psi(p.tau);
  double const y = p.xi / psi;
  double const dphi = phi_eps_prime(y, params);
  TimeGradient g;
  g.phi_xi = dphi / psi;
  g.phi_tau = -dphi * y * params.dpsi(p.tau) / psi;
  g.vector = {1.0 - 2.0 * f0 * g.phi_xi, -g.phi_xi, -g.phi_tau};
  g.norm_sq = 2.0 * f0 * g.phi_xi * g.phi_xi + g.phi_tau * g.phi_tau -
              2.0 * g.phi_xi;
  return g;
}

// Rectangular node grid over (xi, tau); a dimension with one node sits at
// its minimum.
struct GridSpec2 {
  double xi_min = 0.0;
  double xi_max = 0.0;
  std::size_t n_xi = 1;
  double tau_min = 0.0;
  double tau_max = 0.0;
  std::size_t n_tau = 1;

  void validate() const {
    if (n_xi == 0 || n_tau == 0) throw InputError("GridSpec2: empty grid");
    if (!std::isfinite(xi_min) || !std::isfinite(xi_max) ||
        !std::isfinite(tau_min) || !std::isfinite(tau_max)) {
      throw InputError("GridSpec2: non-finite extent");
    }
    if ((n_xi > 1 && !(xi_max > xi_min)) ||
        (n_tau > 1 && !(tau_max > tau_min))) {
      throw InputError("GridSpec2: max must exceed min");
    }
  }
  double xi_at(std::size_t i) const {
    if (n_xi == 1) return xi_min;
    return xi_min + (xi_max - xi_min) * static_cast<double>(i) /
                        static_cast<double>(n_xi - 1);
  }
  double tau_at(std::size_t j) const {
    if (n_tau == 1) return tau_min;
    return tau_min + (tau_max - tau_min) * static_cast<double>(j) /
                         static_cast<double>(n_tau - 1);
  }
  std::size_t size() const { return n_xi * n_tau; }
};

struct GradReport {
  GridSpec2 grid;
  double max_norm_sq = -kInf;
  double argmax_xi = 0.0;
  double argmax_tau = 0.0;
  std::size_t argmax_index = 0;  // linear index tau-major: j * n_xi + i
  bool pass = false;
  // max |phi'(y)(1 + 2 eps^2 c1^2 y^2) - eps/2| over the grid
  double max_ode_residual = 0.0;
  // max of phi'(y)[1 + psi'^2 y^2 / (2 f0)] - psi/f0; negative when the
  // timelike inequality holds strictly
  double max_ineq3_residual = -kInf;
};

// Evaluates |grad T|^2 on every node. Rows of the grid are split across
// workers; the argmax reduction keeps the lowest linear index on ties.
inline GradReport verify_timelike_gradient(TimeFnParams const& params,
                                           GridSpec2 const& grid,
                                           unsigned threads = 1) {
  grid.validate();
  struct Partial {
    double max_norm_sq = -kInf;
    std::size_t argmax = 0;
    double ode = 0.0;
    double ineq3 = -kInf;
  };
  std::size_t const workers =
      std::min<std::size_t>(std::max(1u, threads), grid.n_tau);
  std::vector<Partial> partials(workers);
  std::size_t const chunk = (grid.n_tau + workers - 1) / workers;

  parallel_for(workers, static_cast<unsigned>(workers),
               [&](std::size_t wb, std::size_t we) {
    for (std::size_t w = wb; w < we; ++w) {
      Partial& part = partials[w];
      std::size_t const j_end = std::min(grid.n_tau, (w + 1) * chunk);
      for (std::size_t j = w * chunk; j < j_end; ++j) {
        double const tau = grid.tau_at(j);
        double const f0 = params.f0(tau);
        double const psi = params.psi(tau);
        double const dpsi = params.dpsi(tau);
        for (std::size_t i = 0; i < grid.n_xi; ++i) {
          Point3 const p{grid.xi_at(i), 0.0, tau};
          double const ns = grad_time_fn(p, params).norm_sq;
          std::size_t const idx = j * grid.n_xi + i;
          if (ns > part.max_norm_sq) {
            part.max_norm_sq = ns;
            part.argmax = idx;
          }
          double const y = p.xi / psi;
          double const dphi = phi_eps_prime(y, params);
          double const a = params.eps * params.c1 * y;
          part.ode = std::max(
              part.ode, std::abs(dphi * (1.0 + 2.0 * a * a) - 0.5 * params.eps));
          part.ineq3 = std::max(
              part.ineq3,
              dphi * (1.0 + dpsi * dpsi * y * y / (2.0 * f0)) - psi / f0);
        }
      }
    }
  });

  GradReport r;
  r.grid = grid;
  r.max_ode_residual = 0.0;
  for (auto const& part : partials) {
    if (part.max_norm_sq > r.max_norm_sq) {
      r.max_norm_sq = part.max_norm_sq;
      r.argmax_index = part.argmax;
    }
    r.max_ode_residual = std::max(r.max_ode_residual, part.ode);
    r.max_ineq3_residual = std::max(r.max_ineq3_residual, part.ineq3);
  }
  r.argmax_xi = grid.xi_at(r.argmax_index % grid.n_xi);
  r.argmax_tau = grid.tau_at(r.argmax_index / grid.n_xi);
  r.pass = r.max_norm_sq < 0.0;
  return r;
}

namespace detail {

inline void require_lemma2_endpoints(Point3 const& p1, Point3 const& p2,
                                     double c1) {
  if (p1.eta != 0.0) {
    throw PreconditionError(
        "Lemma-2 endpoints: p1 must have eta = 0 (translate first)");
  }
  double const threshold = eta_threshold(c1);
  if (!(p2.eta > 0.0 && p2.eta < threshold)) {
    throw PreconditionError("Lemma-2 endpoints: eta2 = " +
                            std::to_string(p2.eta) + " outside (0, " +
                            std::to_string(threshold) + "); scale first");
  }
}

}  // namespace detail

// Largest eps = 2^-k with |phi_eps(x_i)| <= (pi/(4 sqrt2 c1) - eta2) / 2 for
// both endpoints, x_i = xi_i / f0(tau_i).
inline double choose_epsilon(Point3 const& p1, Point3 const& p2, double c1,
                             double c2) {
  detail::require_lemma2_endpoints(p1, p2, c1);
  double const margin = 0.5 * (eta_threshold(c1) - p2.eta);
  double const x1 = normalized_xi(p1, c1, c2);
  double const x2 = normalized_xi(p2, c1, c2);
  double eps = 1.0;
  for (int k = 0; k < 1100; ++k) {
    TimeFnParams const params(eps, c1, c2);
    if (std::abs(phi_eps(x1, params)) <= margin &&
        std::abs(phi_eps(x2, params)) <= margin) {
      return eps;
    }
    eps *= 0.5;
  }
  throw InternalError("choose_epsilon: no admissible power of two found");
}

struct Lemma2Certificate {
  double eps = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double eta2 = 0.0;
  double x1 = 0.0;
  double x2 = 0.0;
  double d = 0.0;        // |x| <= d on the diamond
  double R = 0.0;        // rate bound on (1/sqrt f0) dtau/deta
  double D = 0.0;        // total increment of asinh(c1 tau / c2) / c1
  double tau_max = 0.0;
  double xi_max = 0.0;
};

inline Lemma2Certificate lemma2_certificate(Point3 const& p1, Point3 const& p2,
                                            TimeFnParams const& params) {
  double const c1 = params.c1, c2 = params.c2, eps = params.eps;
  detail::require_lemma2_endpoints(p1, p2, c1);
  double const threshold = eta_threshold(c1);
  double const margin = 0.5 * (threshold - p2.eta);

  Lemma2Certificate c;
  c.eps = eps;
  c.c1 = c1;
  c.c2 = c2;
  c.eta2 = p2.eta;
  c.x1 = normalized_xi(p1, c1, c2);
  c.x2 = normalized_xi(p2, c1, c2);
  double const phi1 = std::abs(phi_eps(c.x1, params));
  double const phi2 = std::abs(phi_eps(c.x2, params));
  if (phi1 > margin || phi2 > margin) {
    throw InternalError("lemma2_certificate: eps violates the half margin");
  }
  double const arg = 2.0 * kSqrt2 * c1 * (p2.eta + phi1 + phi2);
  if (!(arg < 0.5 * kPi)) {
    throw InternalError("lemma2_certificate: arctan bound reaches pi/2");
  }
  c.d = std::tan(arg) / (kSqrt2 * eps * c1);
  if (!std::isfinite(c.d)) {
    throw InternalError("lemma2_certificate: d is not finite");
  }
  double const cd = c1 * c.d;
  c.R = 2.0 * cd +
        std::sqrt(4.0 * cd * cd +
                  2.0 * (1.0 + (2.0 / eps) * (1.0 + 2.0 * eps * eps * cd * cd)));
  // Negative only when T(p2) < T(p1), i.e. the diamond is empty.
  c.D = c.R * std::max(0.0, (p2.eta - p1.eta) +
                                (time_fn(p2, params) - time_fn(p1, params)));
  double const tau0 = std::max(std::abs(p1.tau), std::abs(p2.tau));
  double const s0 = std::asinh(c1 * tau0 / c2) / c1;
  c.tau_max = (c2 / c1) * std::sinh(c1 * (s0 + c.D));
  c.xi_max = c.d * (c1 * c1 * c.tau_max * c.tau_max + c2 * c2);
  return c;
}

// choose_epsilon followed by lemma2_certificate.
inline Lemma2Certificate make_lemma2_certificate(Point3 const& p1,
                                                 Point3 const& p2, double c1,
                                                 double c2) {
  double const eps = choose_epsilon(p1, p2, c1, c2);
  return lemma2_certificate(p1, p2, TimeFnParams(eps, c1, c2));
}

}  // namespace ppwave

#endif  // PPWAVE_TIMEFUNCTIONS_HPP_
