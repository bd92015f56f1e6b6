// ppwave: causal futures, pasts and diamonds of the reduced model by
// per-eta-slice propagation of reachable xi bounds.
//
// For fixed (eta, tau) the causal future of a point is a half-line in xi
// (the null generator d_xi may be followed backwards in xi freely), so the
// future is described by an upper bound U(eta, tau) and the past by a lower
// bound L(eta, tau). One eta step is the max-plus transform
//
//     U'(tau') = max_tau [ U(tau) + f(tau) d_eta - (tau' - tau)^2 / (2 d_eta) ]
//
// with the profile taken at the source node, and symmetrically for L with
// min. On a uniform tau grid this is a lower envelope of parabolas and runs
// in O(m); the O(m^2) brute force is kept as the reference.

#ifndef PPWAVE_REACHABILITY_HPP_
#define PPWAVE_REACHABILITY_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppwave/common.hpp"
#include "ppwave/geodesics.hpp"
#include "ppwave/spacetimes.hpp"
#include "ppwave/timefunctions.hpp"

namespace ppwave {

// Uniform (eta, tau) grid: eta nodes eta_min + k d_eta for k = 0..n_eta,
// tau nodes tau_min + j d_tau for j = 0..n_tau-1.
struct GridSpec {
  double eta_min = 0.0;
  double eta_max = 1.0;
  std::size_t n_eta = 1;
  double tau_min = -1.0;
  double tau_max = 1.0;
  std::size_t n_tau = 2;
  double xi_clip = 1e6;

  void validate() const {
    if (!(eta_min < eta_max) || !std::isfinite(eta_min) ||
        !std::isfinite(eta_max)) {
      throw InputError("GridSpec: need eta_min < eta_max");
    }
    if (!(tau_min < tau_max) || !std::isfinite(tau_min) ||
        !std::isfinite(tau_max)) {
      throw InputError("GridSpec: need tau_min < tau_max");
    }
    if (n_eta < 1) throw InputError("GridSpec: n_eta >= 1");
    if (n_tau < 2) throw InputError("GridSpec: n_tau >= 2");
    if (!(xi_clip > 0.0)) throw InputError("GridSpec: xi_clip > 0");
  }
  double d_eta() const {
    return (eta_max - eta_min) / static_cast<double>(n_eta);
  }
  double d_tau() const {
    return (tau_max - tau_min) / static_cast<double>(n_tau - 1);
  }
  double eta_at(std::size_t k) const {
    return eta_min +
           (eta_max - eta_min) * static_cast<double>(k) /
               static_cast<double>(n_eta);
  }
  // Offsets from the centre, so nodes mirrored about it are exact negatives
  // on a symmetric grid.
  double tau_at(std::size_t j) const {
    double const centre = 0.5 * (tau_min + tau_max);
    return centre + d_tau() * (static_cast<double>(j) -
                               0.5 * static_cast<double>(n_tau - 1));
  }
  std::size_t nearest_eta(double eta) const {
    double const k = std::round((eta - eta_min) / d_eta());
    return static_cast<std::size_t>(
        std::clamp(k, 0.0, static_cast<double>(n_eta)));
  }
  std::size_t nearest_tau(double tau) const {
    double const j = std::round((tau - tau_min) / d_tau());
    return static_cast<std::size_t>(
        std::clamp(j, 0.0, static_cast<double>(n_tau - 1)));
  }
};

enum class Direction { upper_from_p1, lower_from_p2 };

inline char const* to_string(Direction d) {
  return d == Direction::upper_from_p1 ? "upper_from_p1" : "lower_from_p2";
}

// Where the profile is sampled inside one eta step.
enum class ProfileEval { source_upwind, midpoint };

// Unreachable sentinel for each direction.
inline double unreachable(Direction d) {
  return d == Direction::upper_from_p1 ? -kInf : kInf;
}

namespace detail {

// out[j] = min_i g[i] + k (j - i)^2 over finite g[i] (+inf when none);
// Felzenszwalb-Huttenlocher lower envelope of parabolas.
inline void lower_envelope(std::span<double const> g, double k,
                           std::span<double> out) {
  std::size_t const m = g.size();
  std::vector<std::size_t> v(m);
  std::vector<double> z(m + 1);
  std::size_t count = 0;
  for (std::size_t q = 0; q < m; ++q) {
    if (g[q] == kInf) continue;
    double const dq = static_cast<double>(q);
    while (true) {
      if (count == 0) {
        v[0] = q;
        z[0] = -kInf;
        z[1] = kInf;
        count = 1;
        break;
      }
      std::size_t const p = v[count - 1];
      double const dp = static_cast<double>(p);
      double const s =
          0.5 * (dp + dq) + (g[q] - g[p]) / (2.0 * k * (dq - dp));
      if (s <= z[count - 1]) {
        --count;
        continue;
      }
      v[count] = q;
      z[count] = s;
      z[count + 1] = kInf;
      ++count;
      break;
    }
  }
  if (count == 0) {
    std::fill(out.begin(), out.end(), kInf);
    return;
  }
  std::size_t idx = 0;
  for (std::size_t j = 0; j < m; ++j) {
    double const dj = static_cast<double>(j);
    while (z[idx + 1] < dj) ++idx;
    double const d = dj - static_cast<double>(v[idx]);
    out[j] = g[v[idx]] + k * (d * d);
  }
}

// Same transform by exhaustive minimization.
inline void lower_envelope_brute(std::span<double const> g, double k,
                                 std::span<double> out, unsigned threads = 1) {
  std::size_t const m = g.size();
  parallel_for(m, threads, [&](std::size_t jb, std::size_t je) {
    for (std::size_t j = jb; j < je; ++j) {
      double best = kInf;
      double const dj = static_cast<double>(j);
      for (std::size_t i = 0; i < m; ++i) {
        if (g[i] == kInf) continue;
        double const d = dj - static_cast<double>(i);
        best = std::min(best, g[i] + k * (d * d));
      }
      out[j] = best;
    }
  });
}

inline void check_step_args(std::span<double const> slice,
                            std::span<double const> f_nodes, double d_tau,
                            double d_eta, Direction dir) {
  if (!(d_eta > 0.0)) throw InputError("propagate_step: d_eta must be > 0");
  if (!(d_tau > 0.0)) throw InputError("propagate_step: d_tau must be > 0");
  if (slice.size() != f_nodes.size() || slice.empty()) {
    throw InputError("propagate_step: slice/profile size mismatch");
  }
  double const sentinel = unreachable(dir);
  bool any = false;
  for (double u : slice) {
    if (u != sentinel) {
      if (std::isnan(u) || std::isinf(u)) {
        throw InputError("propagate_step: slice holds the wrong sentinel");
      }
      any = true;
    }
  }
  if (!any) throw PreconditionError("propagate_step: slice has no finite node");
}

// Source values shifted by the profile, negated for the upper direction so
// both directions reduce to one lower envelope.
inline std::vector<double> envelope_input(std::span<double const> slice,
                                          std::span<double const> f_nodes,
                                          double d_eta, Direction dir) {
  std::vector<double> g(slice.size());
  for (std::size_t i = 0; i < slice.size(); ++i) {
    if (dir == Direction::upper_from_p1) {
      g[i] = slice[i] == -kInf ? kInf : -(slice[i] + f_nodes[i] * d_eta);
    } else {
      g[i] = slice[i] == kInf ? kInf : slice[i] - f_nodes[i] * d_eta;
    }
  }
  return g;
}

inline void envelope_output(std::vector<double>& out, Direction dir) {
  if (dir == Direction::upper_from_p1) {
    for (double& u : out) u = u == kInf ? -kInf : -u;
  }
}

}  // namespace detail

// One eta step by the O(m) lower-envelope transform. f_nodes holds the
// profile at the tau nodes of the slice.
inline std::vector<double> propagate_step(std::span<double const> slice,
                                          std::span<double const> f_nodes,
                                          double d_tau, double d_eta,
                                          Direction dir) {
  detail::check_step_args(slice, f_nodes, d_tau, d_eta, dir);
  auto const g = detail::envelope_input(slice, f_nodes, d_eta, dir);
  std::vector<double> out(slice.size());
  detail::lower_envelope(g, d_tau * d_tau / (2.0 * d_eta), out);
  detail::envelope_output(out, dir);
  return out;
}

// Reference O(m^2) implementation of propagate_step.
inline std::vector<double> propagate_step_reference(
    std::span<double const> slice, std::span<double const> f_nodes,
    double d_tau, double d_eta, Direction dir, unsigned threads = 1) {
  detail::check_step_args(slice, f_nodes, d_tau, d_eta, dir);
  auto const g = detail::envelope_input(slice, f_nodes, d_eta, dir);
  std::vector<double> out(slice.size());
  detail::lower_envelope_brute(g, d_tau * d_tau / (2.0 * d_eta), out, threads);
  detail::envelope_output(out, dir);
  return out;
}

// Brute-force step with the profile at the midpoint of each (source,
// target) pair. Not separable, so there is no envelope fast path.
inline std::vector<double> propagate_step_midpoint(
    std::span<double const> slice, Profile const& f, double tau_min,
    double d_tau, double d_eta, Direction dir, unsigned threads = 1) {
  std::vector<double> const dummy(slice.size(), 0.0);
  detail::check_step_args(slice, dummy, d_tau, d_eta, dir);
  std::size_t const m = slice.size();
  double const k = d_tau * d_tau / (2.0 * d_eta);
  double const sentinel = unreachable(dir);
  double const sign = dir == Direction::upper_from_p1 ? 1.0 : -1.0;
  std::vector<double> out(m, sentinel);
  parallel_for(m, threads, [&](std::size_t jb, std::size_t je) {
    for (std::size_t j = jb; j < je; ++j) {
      for (std::size_t i = 0; i < m; ++i) {
        if (slice[i] == sentinel) continue;
        double const tau_mid =
            tau_min + 0.5 * d_tau * static_cast<double>(i + j);
        double const d = static_cast<double>(j) - static_cast<double>(i);
        double const cand =
            slice[i] + sign * (f(tau_mid) * d_eta - k * (d * d));
        out[j] = sign > 0 ? std::max(out[j], cand) : std::min(out[j], cand);
      }
    }
  });
  return out;
}

struct PropagationOptions {
  ProfileEval eval = ProfileEval::source_upwind;
  bool use_reference = false;  // brute force instead of the envelope
  unsigned threads = 1;        // tau-node workers of the brute-force steps
};

// Per-slice xi bounds over eta nodes [first_index, first_index + size).
struct ValueFunction {
  Direction direction = Direction::upper_from_p1;
  std::size_t first_index = 0;
  std::vector<std::vector<double>> slices;
};

inline std::vector<double> profile_at_nodes(ReducedModel const& model,
                                            GridSpec const& grid) {
  std::vector<double> f(grid.n_tau);
  for (std::size_t j = 0; j < grid.n_tau; ++j) f[j] = model.f(grid.tau_at(j));
  return f;
}

// Seeds the slice at eta node `seed_k`, tau node `seed_j` with value `seed_xi`
// and propagates towards eta node `stop_k` (forward for the upper
// direction, backward for the lower one). `f_nodes` holds the profile at the
// tau nodes; `midpoint_profile` is only read for ProfileEval::midpoint.
inline ValueFunction propagate(std::span<double const> f_nodes,
                               GridSpec const& grid, std::size_t seed_k,
                               std::size_t seed_j, double seed_xi,
                               std::size_t stop_k, Direction dir,
                               PropagationOptions const& opt = {},
                               Profile const* midpoint_profile = nullptr) {
  grid.validate();
  if (f_nodes.size() != grid.n_tau) {
    throw InputError("propagate: profile array does not match the grid");
  }
  if (seed_k > grid.n_eta || stop_k > grid.n_eta || seed_j >= grid.n_tau) {
    throw InputError("propagate: seed or stop index outside the grid");
  }
  if (opt.eval == ProfileEval::midpoint && midpoint_profile == nullptr) {
    throw InputError("propagate: midpoint evaluation needs the profile");
  }
  bool const forward = dir == Direction::upper_from_p1;
  if (forward ? stop_k < seed_k : stop_k > seed_k) {
    throw InputError("propagate: stop slice lies on the wrong side of seed");
  }
  std::size_t const n_slices =
      (forward ? stop_k - seed_k : seed_k - stop_k) + 1;
  double const d_eta = grid.d_eta(), d_tau = grid.d_tau();

  std::vector<std::vector<double>> slices(n_slices);
  slices[0].assign(grid.n_tau, unreachable(dir));
  slices[0][seed_j] = seed_xi;
  for (std::size_t s = 1; s < n_slices; ++s) {
    auto const& prev = slices[s - 1];
    if (opt.eval == ProfileEval::midpoint) {
      slices[s] = propagate_step_midpoint(prev, *midpoint_profile,
                                          grid.tau_at(0), d_tau, d_eta, dir,
                                          opt.threads);
    } else if (opt.use_reference) {
      slices[s] =
          propagate_step_reference(prev, f_nodes, d_tau, d_eta, dir, opt.threads);
    } else {
      slices[s] = propagate_step(prev, f_nodes, d_tau, d_eta, dir);
    }
  }
  ValueFunction vf;
  vf.direction = dir;
  if (forward) {
    vf.first_index = seed_k;
    vf.slices = std::move(slices);
  } else {
    vf.first_index = stop_k;
    vf.slices.assign(std::make_move_iterator(slices.rbegin()),
                     std::make_move_iterator(slices.rend()));
  }
  return vf;
}

inline ValueFunction propagate(ReducedModel const& model, GridSpec const& grid,
                               std::size_t seed_k, std::size_t seed_j,
                               double seed_xi, std::size_t stop_k,
                               Direction dir,
                               PropagationOptions const& opt = {}) {
  grid.validate();
  auto const f = profile_at_nodes(model, grid);
  return propagate(f, grid, seed_k, seed_j, seed_xi, stop_k, dir, opt,
                   &model.profile());
}

struct Interval {
  double lo = kInf;
  double hi = -kInf;
  bool empty() const { return !(lo <= hi); }
};

struct BoundingBox {
  double xi_min = kInf, xi_max = -kInf;
  double eta_min = kInf, eta_max = -kInf;
  double tau_min = kInf, tau_max = -kInf;

  void include(double xi, double eta, double tau) {
    xi_min = std::min(xi_min, xi);
    xi_max = std::max(xi_max, xi);
    eta_min = std::min(eta_min, eta);
    eta_max = std::max(eta_max, eta);
    tau_min = std::min(tau_min, tau);
    tau_max = std::max(tau_max, tau);
  }
  friend bool operator==(BoundingBox const&, BoundingBox const&) = default;
};

enum class Verdict { bounded, clipped, empty };

inline char const* to_string(Verdict v) {
  switch (v) {
    case Verdict::bounded: return "bounded";
    case Verdict::clipped: return "clipped";
    case Verdict::empty: return "empty";
  }
  return "?";
}

struct DiamondResult {
  GridSpec grid;
  Point3 p1, p2;
  double c1 = 1.0, c2 = 1.0;
  // slices[k][j]: xi interval at eta node k and tau node j
  std::vector<std::vector<Interval>> slices;
  BoundingBox bbox;
  double max_abs_x = 0.0;
  std::size_t cell_count = 0;
  Verdict verdict = Verdict::empty;
};

namespace detail {

inline void summarize(DiamondResult& r) {
  r.bbox = {};
  r.max_abs_x = 0.0;
  r.cell_count = 0;
  bool touches = false;
  for (std::size_t k = 0; k < r.slices.size(); ++k) {
    for (std::size_t j = 0; j < r.slices[k].size(); ++j) {
      Interval const& iv = r.slices[k][j];
      if (iv.empty()) continue;
      ++r.cell_count;
      double const eta = r.grid.eta_at(k), tau = r.grid.tau_at(j);
      r.bbox.include(iv.lo, eta, tau);
      r.bbox.include(iv.hi, eta, tau);
      double const f0 = r.c1 * r.c1 * tau * tau + r.c2 * r.c2;
      r.max_abs_x = std::max(
          r.max_abs_x, std::max(std::abs(iv.lo), std::abs(iv.hi)) / f0);
      if (j == 0 || j + 1 == r.slices[k].size()) touches = true;
    }
  }
  if (r.cell_count == 0) {
    r.verdict = Verdict::empty;
  } else {
    r.verdict = touches ? Verdict::clipped : Verdict::bounded;
  }
}

}  // namespace detail

// Sum of (U - L) d_tau d_eta over the cells: a midpoint-rule estimate of the
// (xi, eta, tau) volume, used as the refinement observable.
inline double diamond_volume(DiamondResult const& r) {
  double sum = 0.0;
  for (auto const& slice : r.slices) {
    for (Interval const& iv : slice) {
      if (!iv.empty()) sum += iv.hi - iv.lo;
    }
  }
  return sum * r.grid.d_tau() * r.grid.d_eta();
}

// J+(p1) intersected with J-(p2) on the grid. Endpoints snap to the nearest
// grid node; eta2 < eta1 gives the empty diamond.
inline DiamondResult compute_diamond(ReducedModel const& model,
                                     Point3 const& p1, Point3 const& p2,
                                     GridSpec const& grid,
                                     PropagationOptions const& opt = {}) {
  grid.validate();
  auto inside = [&grid](Point3 const& p) {
    return is_finite(p) && p.eta >= grid.eta_min && p.eta <= grid.eta_max &&
           p.tau >= grid.tau_min && p.tau <= grid.tau_max;
  };
  if (!inside(p1) || !inside(p2)) {
    throw InputError("compute_diamond: endpoint outside grid extents");
  }
  DiamondResult r;
  r.grid = grid;
  r.p1 = p1;
  r.p2 = p2;
  r.c1 = model.c1();
  r.c2 = model.c2();
  r.slices.assign(grid.n_eta + 1, std::vector<Interval>(grid.n_tau));
  if (p2.eta < p1.eta) {
    detail::summarize(r);
    return r;
  }
  std::size_t const k1 = grid.nearest_eta(p1.eta);
  std::size_t const k2 = grid.nearest_eta(p2.eta);
  std::size_t const j1 = grid.nearest_tau(p1.tau);
  std::size_t const j2 = grid.nearest_tau(p2.tau);
  auto const upper = propagate(model, grid, k1, j1, p1.xi, k2,
                               Direction::upper_from_p1, opt);
  auto const lower = propagate(model, grid, k2, j2, p2.xi, k1,
                               Direction::lower_from_p2, opt);
  for (std::size_t k = k1; k <= k2; ++k) {
    auto const& u = upper.slices[k - upper.first_index];
    auto const& l = lower.slices[k - lower.first_index];
    for (std::size_t j = 0; j < grid.n_tau; ++j) {
      r.slices[k][j] = {l[j], u[j]};
    }
  }
  detail::summarize(r);
  return r;
}

// Grid with both extents at least doubled about the same nodes and the same
// spacing, so the original nodes remain nodes.
inline GridSpec doubled_extents(GridSpec const& g) {
  std::size_t const pad_eta = (g.n_eta + 1) / 2;
  std::size_t const pad_tau = g.n_tau / 2;  // ceil((n_tau - 1) / 2)
  GridSpec d = g;
  d.eta_min = g.eta_min - g.d_eta() * static_cast<double>(pad_eta);
  d.eta_max = g.eta_max + g.d_eta() * static_cast<double>(pad_eta);
  d.n_eta = g.n_eta + 2 * pad_eta;
  d.tau_min = g.tau_min - g.d_tau() * static_cast<double>(pad_tau);
  d.tau_max = g.tau_max + g.d_tau() * static_cast<double>(pad_tau);
  d.n_tau = g.n_tau + 2 * pad_tau;
  return d;
}

struct CompactnessReport {
  enum class Status { pass, fail, inconclusive };
  Status status = Status::inconclusive;
  std::string reason;
  double max_abs_x = 0.0;
  double d = 0.0;
  double tau_extent = 0.0;
  double tau_max = 0.0;
  double xi_extent = 0.0;
  double xi_max = 0.0;
  std::size_t cells = 0;
  std::size_t cells_doubled = 0;
  double cell_change = 0.0;  // relative change of the cell count
  bool x_ok = false, tau_ok = false, xi_ok = false, stable = false;
};

inline char const* to_string(CompactnessReport::Status s) {
  switch (s) {
    case CompactnessReport::Status::pass: return "pass";
    case CompactnessReport::Status::fail: return "fail";
    case CompactnessReport::Status::inconclusive: return "inconclusive";
  }
  return "?";
}

// Compares an unclipped diamond against a certificate and probes grid
// stability by recomputing on doubled extents.
inline CompactnessReport verify_compactness(ReducedModel const& model,
                                            DiamondResult const& result,
                                            Lemma2Certificate const& cert,
                                            PropagationOptions const& opt = {}) {
  using Status = CompactnessReport::Status;
  CompactnessReport rep;
  rep.d = cert.d;
  rep.tau_max = cert.tau_max;
  rep.xi_max = cert.xi_max;
  rep.cells = result.cell_count;
  if (result.verdict == Verdict::clipped) {
    rep.status = Status::inconclusive;
    rep.reason = "diamond touches the tau boundary; enlarge the grid";
    return rep;
  }
  if (result.verdict == Verdict::empty) {
    rep.status = Status::pass;
    rep.reason = "empty diamond";
    rep.x_ok = rep.tau_ok = rep.xi_ok = rep.stable = true;
    return rep;
  }
  rep.max_abs_x = result.max_abs_x;
  rep.tau_extent =
      std::max(std::abs(result.bbox.tau_min), std::abs(result.bbox.tau_max));
  rep.xi_extent =
      std::max(std::abs(result.bbox.xi_min), std::abs(result.bbox.xi_max));
  rep.x_ok = rep.max_abs_x <= cert.d;
  rep.tau_ok = rep.tau_extent <= cert.tau_max;
  rep.xi_ok = rep.xi_extent <= cert.xi_max;

  auto const bigger =
      compute_diamond(model, result.p1, result.p2, doubled_extents(result.grid), opt);
  rep.cells_doubled = bigger.cell_count;
  if (bigger.verdict == Verdict::clipped) {
    rep.status = Status::inconclusive;
    rep.reason = "diamond on doubled grid touches the tau boundary";
    return rep;
  }
  double const base = std::max<double>(1.0, static_cast<double>(rep.cells));
  rep.cell_change =
      std::abs(static_cast<double>(rep.cells_doubled) -
               static_cast<double>(rep.cells)) / base;
  rep.stable = rep.cell_change < 0.01;
  bool const ok = rep.x_ok && rep.tau_ok && rep.xi_ok && rep.stable;
  rep.status = ok ? Status::pass : Status::fail;
  if (!ok) {
    rep.reason = std::string(rep.x_ok ? "" : "max|x| > d; ") +
                 (rep.tau_ok ? "" : "tau extent > tau_max; ") +
                 (rep.xi_ok ? "" : "xi extent > xi_max; ") +
                 (rep.stable ? "" : "cell count not grid-stable");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Causal images of curves under maps between models.

// Batch of random causal curves; curve i uses stream_seed(seed, i).
struct CurveBatchOptions {
  std::size_t n_curves = 1000;
  std::size_t n_steps = 50;
  std::uint64_t seed = 42;
  double start_xi = 1.0;   // start xi ~ uniform(-start_xi, start_xi)
  double start_tau = 5.0;  // start tau (or each x component) ~ +-start_tau
  CausalSamplerOptions sampler;
  unsigned threads = 1;
};

struct CausalImageReport {
  std::string map;
  std::size_t n_curves = 0;
  std::size_t n_segments = 0;
  std::size_t n_source_causal = 0;   // source segments classified causal-future
  std::size_t n_image_causal = 0;    // image segments classified causal-future
  double fraction_causal = 0.0;
  // causality margin -g(v, v) of image chords; >= 0 means causal
  double worst_margin = kInf;
  double max_violation = -kInf;      // max g(v, v) over image chords
  std::size_t worst_curve = 0;
  std::size_t worst_segment = 0;
  double worst_tau = 0.0;
  // min over segments of |dx| - |d rho|; only for the projection map
  std::optional<double> min_radial_gap;
};

namespace detail {

struct SegmentTally {
  std::size_t segments = 0, source_causal = 0, image_causal = 0;
  double worst_margin = kInf, max_violation = -kInf;
  std::size_t worst_curve = 0, worst_segment = 0;
  double worst_tau = 0.0;
  double min_gap = kInf;

  void record(std::size_t curve, std::size_t seg, double g_image,
              bool image_causal_future, double tau) {
    ++segments;
    if (image_causal_future) ++image_causal;
    double const margin = -g_image;
    if (margin < worst_margin) {
      worst_margin = margin;
      worst_curve = curve;
      worst_segment = seg;
      worst_tau = tau;
    }
    max_violation = std::max(max_violation, g_image);
  }

  void merge(SegmentTally const& o) {
    segments += o.segments;
    source_causal += o.source_causal;
    image_causal += o.image_causal;
    if (o.worst_margin < worst_margin) {
      worst_margin = o.worst_margin;
      worst_curve = o.worst_curve;
      worst_segment = o.worst_segment;
      worst_tau = o.worst_tau;
    }
    max_violation = std::max(max_violation, o.max_violation);
    min_gap = std::min(min_gap, o.min_gap);
  }
};

template <typename PerCurve>
SegmentTally tally_curves(CurveBatchOptions const& opt, PerCurve&& per_curve) {
  std::size_t const workers = std::max<std::size_t>(
      1, std::min<std::size_t>(std::max(1u, opt.threads), opt.n_curves));
  std::vector<SegmentTally> partial(workers);
  std::size_t const chunk = (opt.n_curves + workers - 1) / workers;
  parallel_for(workers, static_cast<unsigned>(workers),
               [&](std::size_t wb, std::size_t we) {
    for (std::size_t w = wb; w < we; ++w) {
      std::size_t const end = std::min(opt.n_curves, (w + 1) * chunk);
      for (std::size_t c = w * chunk; c < end; ++c) per_curve(c, partial[w]);
    }
  });
  SegmentTally total;
  for (auto const& p : partial) total.merge(p);
  return total;
}

inline CausalImageReport to_report(std::string map, std::size_t n_curves,
                                   SegmentTally const& t, bool with_gap) {
  CausalImageReport r;
  r.map = std::move(map);
  r.n_curves = n_curves;
  r.n_segments = t.segments;
  r.n_source_causal = t.source_causal;
  r.n_image_causal = t.image_causal;
  r.fraction_causal = t.segments == 0 ? 1.0
                                      : static_cast<double>(t.image_causal) /
                                            static_cast<double>(t.segments);
  r.worst_margin = t.worst_margin;
  r.max_violation = t.max_violation;
  r.worst_curve = t.worst_curve;
  r.worst_segment = t.worst_segment;
  r.worst_tau = t.worst_tau;
  if (with_gap) r.min_radial_gap = t.min_gap;
  return r;
}

}  // namespace detail

// Projection (xi, eta, x) -> (xi, eta, |x|) of random CW causal curves,
// classified in the reduced target model. Each image chord is evaluated at
// its own midpoint.
inline CausalImageReport check_causal_image_projection(
    CWModel const& source, ReducedModel const& target,
    CurveBatchOptions const& opt = {}) {
  std::size_t const n = source.dim();
  auto tally = detail::tally_curves(opt, [&](std::size_t c,
                                             detail::SegmentTally& t) {
    Rng rng(stream_seed(opt.seed, c));
    PointN start;
    start.xi = rng.uniform(-opt.start_xi, opt.start_xi);
    start.eta = 0.0;
    start.x.resize(n);
    for (auto& xi : start.x) xi = rng.uniform(-opt.start_tau, opt.start_tau);
    auto const curve = sample_causal_curve_cw(source, start, opt.n_steps,
                                              rng.next(), opt.sampler);
    for (std::size_t s = 0; s + 1 < curve.points.size(); ++s) {
      PointN const& a = curve.points[s];
      PointN const& b = curve.points[s + 1];
      PointN mid{0.5 * (a.xi + b.xi), 0.5 * (a.eta + b.eta), a.x};
      TangentN chord{b.xi - a.xi, b.eta - a.eta, a.x};
      for (std::size_t i = 0; i < n; ++i) {
        mid.x[i] = 0.5 * (a.x[i] + b.x[i]);
        chord.dx[i] = b.x[i] - a.x[i];
      }
      if (causal_class(source, mid, chord).future_causal()) ++t.source_causal;
      Point3 const pa = projection_pi(a), pb = projection_pi(b);
      Point3 const pm{0.5 * (pa.xi + pb.xi), 0.5 * (pa.eta + pb.eta),
                      0.5 * (pa.tau + pb.tau)};
      Tangent3 const image = pb - pa;
      double const g = metric_inner(target, pm, image, image);
      bool const ok = causal_class(target, pm, image).future_causal();
      t.record(c, s, g, ok, pm.tau);
      t.min_gap = std::min(t.min_gap,
                           std::sqrt(chord.euclidean_norm_sq() -
                                     chord.dxi * chord.dxi -
                                     chord.deta * chord.deta) -
                               std::abs(image.dtau));
    }
  });
  return detail::to_report("projection_pi", opt.n_curves, tally, true);
}

// Map of the reduced model into itself or into another reduced model.
using PointMap = std::function<Point3(Point3 const&)>;

// Random causal curves of `source`, mapped point-wise by `map` and classified
// in `target`.
inline CausalImageReport check_causal_image(std::string const& name,
                                            PointMap const& map,
                                            ReducedModel const& source,
                                            ReducedModel const& target,
                                            CurveBatchOptions const& opt = {}) {
  auto tally = detail::tally_curves(opt, [&](std::size_t c,
                                             detail::SegmentTally& t) {
    Rng rng(stream_seed(opt.seed, c));
    Point3 const start{rng.uniform(-opt.start_xi, opt.start_xi), 0.0,
                       rng.uniform(-opt.start_tau, opt.start_tau)};
    auto const curve = sample_causal_curve(source, start, opt.n_steps,
                                           rng.next(), opt.sampler);
    for (std::size_t s = 0; s + 1 < curve.size(); ++s) {
      Point3 const& a = curve.points[s];
      Point3 const& b = curve.points[s + 1];
      Point3 const mid{0.5 * (a.xi + b.xi), 0.5 * (a.eta + b.eta),
                       0.5 * (a.tau + b.tau)};
      if (causal_class(source, mid, b - a).future_causal()) ++t.source_causal;
      Point3 const ma = map(a), mb = map(b);
      Point3 const mm{0.5 * (ma.xi + mb.xi), 0.5 * (ma.eta + mb.eta),
                      0.5 * (ma.tau + mb.tau)};
      Tangent3 const image = mb - ma;
      double const g = metric_inner(target, mm, image, image);
      bool const ok = causal_class(target, mm, image).future_causal();
      t.record(c, s, g, ok, mm.tau);
    }
  });
  return detail::to_report(name, opt.n_curves, tally, false);
}

inline CausalImageReport check_causal_image_sigma(
    double C, ReducedModel const& source, CurveBatchOptions const& opt = {}) {
  auto const b = scaled_constants(source.c1(), source.c2(), C);
  ReducedModel const target = ReducedModel::quadratic(b.c1, b.c2);
  return check_causal_image(
      "sigma_scaling", [C](Point3 const& p) { return conformal_scale(p, C); },
      source, target, opt);
}

// Affine map p -> M p + offset acting on (xi, eta, tau).
struct AffineMap {
  std::array<double, 9> M{1, 0, 0, 0, 1, 0, 0, 0, 1};
  Point3 offset{};

  Point3 operator()(Point3 const& p) const {
    return {M[0] * p.xi + M[1] * p.eta + M[2] * p.tau + offset.xi,
            M[3] * p.xi + M[4] * p.eta + M[5] * p.tau + offset.eta,
            M[6] * p.xi + M[7] * p.eta + M[8] * p.tau + offset.tau};
  }
};

// ---------------------------------------------------------------------------
// Diamond computed directly versus through the sigma scaling.

struct ScalingComparison {
  double C = 1.0;
  DiamondResult direct;
  DiamondResult scaled;
  std::vector<std::size_t> slice_symmetric_difference;
  std::size_t total_symmetric_difference = 0;
  double max_interval_discrepancy = 0.0;  // over cells present in both
  BoundingBox mapped_bbox;     // bbox of sigma(direct diamond)
  BoundingBox sigma_of_bbox;   // sigma applied to the direct bbox corners
};

inline ScalingComparison diamond_via_scaling(Point3 const& p1,
                                             Point3 const& p2,
                                             ReducedModel const& model,
                                             GridSpec const& grid,
                                             double margin = 0.5) {
  if (!model.is_quadratic()) {
    throw InputError("diamond_via_scaling: needs the quadratic profile");
  }
  if (p2.eta < p1.eta) {
    throw PreconditionError("diamond_via_scaling: needs eta2 >= eta1");
  }
  ScalingComparison out;
  double const span = p2.eta - p1.eta;
  out.C = span > 0.0 ? choose_scale_C(span, model.c1(), margin) : 1.0;
  double const C = out.C;
  out.direct = compute_diamond(model, p1, p2, grid);

  auto const b = scaled_constants(model.c1(), model.c2(), C);
  ReducedModel const scaled_model = ReducedModel::quadratic(b.c1, b.c2);
  GridSpec g2 = grid;
  g2.tau_min = grid.tau_min / C;
  g2.tau_max = grid.tau_max / C;
  g2.xi_clip = grid.xi_clip / (C * C);
  out.scaled = compute_diamond(scaled_model, conformal_scale(p1, C),
                               conformal_scale(p2, C), g2);

  double const C2 = C * C;
  out.slice_symmetric_difference.assign(grid.n_eta + 1, 0);
  for (std::size_t k = 0; k <= grid.n_eta; ++k) {
    for (std::size_t j = 0; j < grid.n_tau; ++j) {
      Interval const& a = out.direct.slices[k][j];
      Interval const& s = out.scaled.slices[k][j];
      if (!a.empty()) {
        Point3 const lo = conformal_scale({a.lo, grid.eta_at(k), grid.tau_at(j)}, C);
        Point3 const hi = conformal_scale({a.hi, grid.eta_at(k), grid.tau_at(j)}, C);
        out.mapped_bbox.include(lo.xi, lo.eta, lo.tau);
        out.mapped_bbox.include(hi.xi, hi.eta, hi.tau);
      }
      if (a.empty() != s.empty()) {
        ++out.slice_symmetric_difference[k];
      } else if (!a.empty()) {
        out.max_interval_discrepancy =
            std::max({out.max_interval_discrepancy,
                      std::abs(s.lo - a.lo / C2), std::abs(s.hi - a.hi / C2)});
      }
    }
    out.total_symmetric_difference += out.slice_symmetric_difference[k];
  }
  if (out.direct.cell_count > 0) {
    BoundingBox const& bb = out.direct.bbox;
    Point3 const lo = conformal_scale({bb.xi_min, bb.eta_min, bb.tau_min}, C);
    Point3 const hi = conformal_scale({bb.xi_max, bb.eta_max, bb.tau_max}, C);
    out.sigma_of_bbox.include(lo.xi, lo.eta, lo.tau);
    out.sigma_of_bbox.include(hi.xi, hi.eta, hi.tau);
  }
  return out;
}

}  // namespace ppwave

#endif  // PPWAVE_REACHABILITY_HPP_
