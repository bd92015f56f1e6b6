#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "ppwave/reachability.hpp"

namespace {

using ppwave::CompactnessReport;
using ppwave::Direction;
using ppwave::DiamondResult;
using ppwave::GridSpec;
using ppwave::Point3;
using ppwave::ReducedModel;
using ppwave::Rng;
using ppwave::Verdict;

constexpr double kInf = std::numeric_limits<double>::infinity();

GridSpec standard_grid(std::size_t n_eta = 400) {
  return {0.0, 0.4, n_eta, -6.0, 6.0, 2001, 1e6};
}

// Independent one-step oracle written directly from the max-plus formula.
std::vector<double> step_oracle(std::vector<double> const& u,
                                std::vector<double> const& f, double h,
                                double d_eta, Direction dir) {
  bool const up = dir == Direction::upper_from_p1;
  std::vector<double> out(u.size(), up ? -kInf : kInf);
  for (std::size_t j = 0; j < u.size(); ++j) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (std::isinf(u[i])) continue;
      double const dt = (static_cast<double>(j) - static_cast<double>(i)) * h;
      double const pen = dt * dt / (2 * d_eta);
      if (up) {
        out[j] = std::max(out[j], u[i] + f[i] * d_eta - pen);
      } else {
        out[j] = std::min(out[j], u[i] - f[i] * d_eta + pen);
      }
    }
  }
  return out;
}

std::vector<double> random_slice(Rng& rng, std::size_t m, Direction dir) {
  std::vector<double> s(m);
  bool any = false;
  for (auto& v : s) {
    if (rng.uniform() < 0.3) {
      v = ppwave::unreachable(dir);
    } else {
      v = rng.uniform(-5, 5);
      any = true;
    }
  }
  if (!any) s[m / 2] = 0.0;
  return s;
}

TEST(PropagateStep, HandExample) {
  std::vector<double> slice(21, -kInf);
  slice[10] = 0.0;  // tau nodes -1.0 .. 1.0, step 0.1
  std::vector<double> f(21);
  for (std::size_t j = 0; j < 21; ++j) {
    double const tau = -1.0 + 0.1 * static_cast<double>(j);
    f[j] = tau * tau + 1.0;
  }
  auto const out = ppwave::propagate_step(slice, f, 0.1, 0.1, Direction::upper_from_p1);
  EXPECT_NEAR(out[10], 0.1, 1e-15);
  EXPECT_NEAR(out[11], 0.05, 1e-15);
  EXPECT_NEAR(out[9], 0.05, 1e-15);
}

TEST(PropagateStep, FlatProfileGivesParabola) {
  std::size_t const m = 101;
  double const h = 0.05, d_eta = 0.2, xi0 = 1.5;
  std::vector<double> slice(m, -kInf), f(m, 0.0);
  slice[30] = xi0;
  auto const out = ppwave::propagate_step(slice, f, h, d_eta, Direction::upper_from_p1);
  for (std::size_t j = 0; j < m; ++j) {
    double const dt = (static_cast<double>(j) - 30.0) * h;
    EXPECT_NEAR(out[j], xi0 - dt * dt / (2 * d_eta), 1e-12);
  }
}

TEST(PropagateStep, FastPathEqualsBruteForceAndOracle) {
  Rng rng(10);
  double worst_ref = 0.0, worst_oracle = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t const m = 2 + static_cast<std::size_t>(rng.uniform(0, 120));
    auto const dir = trial % 2 ? Direction::upper_from_p1 : Direction::lower_from_p2;
    auto const slice = random_slice(rng, m, dir);
    std::vector<double> f(m);
    for (auto& v : f) v = rng.uniform(-3, 3);
    double const h = rng.uniform(0.001, 0.5), d_eta = rng.uniform(0.001, 0.5);
    auto const fast = ppwave::propagate_step(slice, f, h, d_eta, dir);
    auto const ref = ppwave::propagate_step_reference(slice, f, h, d_eta, dir);
    auto const oracle = step_oracle(slice, f, h, d_eta, dir);
    for (std::size_t j = 0; j < m; ++j) {
      ASSERT_EQ(std::isinf(fast[j]), std::isinf(ref[j]));
      if (!std::isinf(fast[j])) {
        worst_ref = std::max(worst_ref, std::abs(fast[j] - ref[j]));
        worst_oracle = std::max(worst_oracle, std::abs(fast[j] - oracle[j]) /
                                                  (1 + std::abs(oracle[j])));
      }
    }
  }
  EXPECT_LE(worst_ref, 1e-12);
  EXPECT_LE(worst_oracle, 1e-12);
}

TEST(PropagateStep, Errors) {
  std::vector<double> slice{-kInf, 0.0, -kInf}, f{1, 1, 1};
  EXPECT_THROW(ppwave::propagate_step(slice, f, 0.1, 0.0, Direction::upper_from_p1),
               ppwave::InputError);
  EXPECT_THROW(ppwave::propagate_step(slice, f, 0.1, -1.0, Direction::upper_from_p1),
               ppwave::InputError);
  std::vector<double> const short_f{1.0, 1.0};
  EXPECT_THROW(ppwave::propagate_step(slice, short_f, 0.1, 0.1,
                                      Direction::upper_from_p1),
               ppwave::InputError);
  std::vector<double> const dead(3, -kInf);
  EXPECT_THROW(ppwave::propagate_step(dead, f, 0.1, 0.1, Direction::upper_from_p1),
               ppwave::PreconditionError);
  // +inf is not the sentinel of the upper direction.
  std::vector<double> const wrong{kInf, 0.0, 0.0};
  EXPECT_THROW(ppwave::propagate_step(wrong, f, 0.1, 0.1, Direction::upper_from_p1),
               ppwave::InputError);
}

// Each finite value is attained from a finite source node through the
// one-step bound; sentinel nodes never contribute.
TEST(PropagateStep, AbsorptionLaw) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t const m = 40;
    auto const slice = random_slice(rng, m, Direction::upper_from_p1);
    std::vector<double> f(m);
    for (auto& v : f) v = rng.uniform(-2, 2);
    double const h = 0.05, d_eta = 0.02;
    auto const out = ppwave::propagate_step(slice, f, h, d_eta, Direction::upper_from_p1);
    double const min_f = *std::min_element(f.begin(), f.end());
    double const span = h * static_cast<double>(m - 1);
    double max_src = -kInf;
    for (double u : slice) max_src = std::max(max_src, u);
    for (std::size_t j = 0; j < m; ++j) {
      ASSERT_TRUE(std::isfinite(out[j]));
      bool witnessed = false;
      for (std::size_t i = 0; i < m && !witnessed; ++i) {
        if (slice[i] == -kInf) continue;
        witnessed = out[j] >= slice[i] + min_f * d_eta - span * span / (2 * d_eta) - 1e-12;
      }
      EXPECT_TRUE(witnessed);
      // Upper bound from the best finite source.
      EXPECT_LE(out[j], max_src + 2.0 * d_eta + 1e-12);
    }
    // Replacing sentinels by a hugely negative finite value changes nothing.
    auto patched = slice;
    for (auto& u : patched) if (u == -kInf) u = -1e300;
    EXPECT_EQ(ppwave::propagate_step(patched, f, h, d_eta, Direction::upper_from_p1), out);
  }
}

TEST(PropagateStep, MidpointFlagMatchesUpwindOnConstantProfile) {
  GridSpec const g{0, 0.2, 20, -1, 1, 81, 1e6};
  ReducedModel const flat(ppwave::Profile::table({-1, 1}, {0.5, 0.5}), 1, 1);
  ppwave::PropagationOptions mid;
  mid.eval = ppwave::ProfileEval::midpoint;
  auto const a = ppwave::propagate(flat, g, 0, 40, 0.0, 20, Direction::upper_from_p1);
  auto const b = ppwave::propagate(flat, g, 0, 40, 0.0, 20, Direction::upper_from_p1, mid);
  ASSERT_EQ(a.slices.size(), b.slices.size());
  for (std::size_t k = 0; k < a.slices.size(); ++k)
    for (std::size_t j = 0; j < 81; ++j) {
      if (std::isinf(a.slices[k][j])) {
        EXPECT_EQ(a.slices[k][j], b.slices[k][j]);
      } else {
        EXPECT_NEAR(a.slices[k][j], b.slices[k][j], 1e-12);
      }
    }
}

TEST(PropagateStep, MidpointDiffersFromUpwindByFirstOrderTerm) {
  GridSpec const g{0, 0.2, 20, -1, 1, 81, 1e6};
  auto const m = ReducedModel::quadratic(1, 1);
  ppwave::PropagationOptions mid;
  mid.eval = ppwave::ProfileEval::midpoint;
  auto const a = ppwave::propagate(m, g, 0, 40, 0.0, 20, Direction::upper_from_p1);
  auto const b = ppwave::propagate(m, g, 0, 40, 0.0, 20, Direction::upper_from_p1, mid);
  double diff = 0.0;
  for (std::size_t j = 30; j <= 50; ++j)
    diff = std::max(diff, std::abs(a.slices.back()[j] - b.slices.back()[j]));
  EXPECT_GT(diff, 0.0);
  EXPECT_LT(diff, 0.05);
}

TEST(PropagateStep, ThreadCountIsBitIdentical) {
  GridSpec const g{0, 0.3, 30, -2, 2, 201, 1e6};
  auto const m = ReducedModel::quadratic(0.8, 1.1);
  for (auto eval : {ppwave::ProfileEval::source_upwind, ppwave::ProfileEval::midpoint}) {
    ppwave::PropagationOptions one, four;
    one.eval = four.eval = eval;
    one.use_reference = four.use_reference = true;
    four.threads = 4;
    auto const a = ppwave::propagate(m, g, 0, 100, 0.0, 30, Direction::upper_from_p1, one);
    auto const b = ppwave::propagate(m, g, 0, 100, 0.0, 30, Direction::upper_from_p1, four);
    EXPECT_EQ(a.slices, b.slices);
  }
}

TEST(Propagate, SeedSliceHasOneFiniteNode) {
  GridSpec const g{0, 1, 10, -1, 1, 21, 1e6};
  auto const m = ReducedModel::quadratic(1, 1);
  auto const up = ppwave::propagate(m, g, 2, 7, 0.5, 9, Direction::upper_from_p1);
  EXPECT_EQ(up.first_index, 2u);
  EXPECT_EQ(up.slices.size(), 8u);
  auto const finite = std::count_if(up.slices[0].begin(), up.slices[0].end(),
                                    [](double v) { return std::isfinite(v); });
  EXPECT_EQ(finite, 1);
  EXPECT_EQ(up.slices[0][7], 0.5);

  auto const down = ppwave::propagate(m, g, 9, 7, 0.5, 2, Direction::lower_from_p2);
  EXPECT_EQ(down.first_index, 2u);
  EXPECT_EQ(down.slices.back()[7], 0.5);
  EXPECT_THROW(ppwave::propagate(m, g, 9, 7, 0.5, 2, Direction::upper_from_p1),
               ppwave::InputError);
  EXPECT_THROW(ppwave::propagate(m, g, 0, 21, 0.5, 2, Direction::upper_from_p1),
               ppwave::InputError);
}

TEST(Propagate, ConeWideningMonotonicity) {
  Rng rng(12);
  GridSpec const g{0, 0.3, 15, -2, 2, 61, 1e6};
  std::vector<double> f0(g.n_tau);
  for (std::size_t j = 0; j < g.n_tau; ++j) f0[j] = g.tau_at(j) * g.tau_at(j) + 1;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> lo(g.n_tau), hi(g.n_tau);
    for (std::size_t j = 0; j < g.n_tau; ++j) {
      hi[j] = rng.uniform(-1, 1) * f0[j];
      lo[j] = std::max(-f0[j], hi[j] - rng.uniform(0, 1));
    }
    std::size_t const j0 = static_cast<std::size_t>(rng.uniform(20, 40));
    auto const ul = ppwave::propagate(lo, g, 0, j0, 0, 15, Direction::upper_from_p1);
    auto const uh = ppwave::propagate(hi, g, 0, j0, 0, 15, Direction::upper_from_p1);
    auto const ll = ppwave::propagate(lo, g, 15, j0, 0, 0, Direction::lower_from_p2);
    auto const lh = ppwave::propagate(hi, g, 15, j0, 0, 0, Direction::lower_from_p2);
    for (std::size_t k = 0; k < ul.slices.size(); ++k) {
      for (std::size_t j = 0; j < g.n_tau; ++j) {
        ASSERT_LE(ul.slices[k][j], uh.slices[k][j]);
        ASSERT_GE(ll.slices[k][j], lh.slices[k][j]);
      }
    }
  }
}

TEST(Propagate, TimeReflectionSymmetry) {
  GridSpec const g{0, 0.4, 100, -3, 3, 601, 1e6};
  auto const m = ReducedModel::quadratic(1, 1);
  std::size_t const jc = 300;
  auto const up = ppwave::propagate(m, g, 0, jc, 0, 100, Direction::upper_from_p1);
  auto const lo = ppwave::propagate(m, g, 100, jc, 0, 0, Direction::lower_from_p2);
  double worst = 0.0;
  for (std::size_t k = 0; k <= 100; ++k) {
    for (std::size_t j = 0; j < g.n_tau; ++j) {
      double const u = up.slices[k][j], l = lo.slices[100 - k][j];
      if (std::isinf(u)) {
        ASSERT_EQ(l, kInf);
      } else {
        worst = std::max(worst, std::abs(u + l));
      }
    }
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(ComputeDiamond, TauParityIsExact) {
  GridSpec const g{0, 0.4, 100, -3, 3, 601, 1e6};
  auto const r = ppwave::compute_diamond(ReducedModel::quadratic(1, 1), {0, 0, 0},
                                         {0, 0.4, 0}, g);
  for (auto const& slice : r.slices) {
    for (std::size_t j = 0; j < slice.size(); ++j) {
      auto const& a = slice[j];
      auto const& b = slice[slice.size() - 1 - j];
      EXPECT_EQ(a.lo, b.lo);
      EXPECT_EQ(a.hi, b.hi);
    }
  }
}

TEST(ComputeDiamond, CoincidentEndpointsGiveSingleCell) {
  auto const r = ppwave::compute_diamond(ReducedModel::quadratic(1, 1), {0, 0, 0},
                                         {0, 0, 0}, standard_grid());
  EXPECT_EQ(r.cell_count, 1u);
  EXPECT_EQ(r.verdict, Verdict::bounded);
  EXPECT_EQ(r.max_abs_x, 0.0);
  EXPECT_EQ(ppwave::diamond_volume(r), 0.0);
}

TEST(ComputeDiamond, ReversedEndpointsGiveEmpty) {
  GridSpec const g{0, 1, 50, -2, 2, 101, 1e6};
  auto const r = ppwave::compute_diamond(ReducedModel::quadratic(1, 1), {0, 0.5, 0},
                                         {0, 0.2, 0}, g);
  EXPECT_EQ(r.verdict, Verdict::empty);
  EXPECT_EQ(r.cell_count, 0u);
}

// xi2 far below what p1 can reach: the cones do not meet.
TEST(ComputeDiamond, UnreachableEndpointGivesEmpty) {
  GridSpec const g{0, 1, 50, -2, 2, 101, 1e6};
  auto const r = ppwave::compute_diamond(ReducedModel::quadratic(1, 1), {0, 0, 0},
                                         {-5, 0.5, 0}, g);
  EXPECT_GT(r.cell_count, 0u);
  auto const far = ppwave::compute_diamond(ReducedModel::quadratic(1, 1), {0, 0, 0},
                                           {5, 0.5, 0}, g);
  EXPECT_EQ(far.verdict, Verdict::empty);
}

TEST(ComputeDiamond, StandardInstanceRespectsCertificate) {
  auto const m = ReducedModel::quadratic(1, 1);
  Point3 const p1{0, 0, 0}, p2{0, 0.4, 0};
  auto const r = ppwave::compute_diamond(m, p1, p2, standard_grid());
  auto const cert = ppwave::make_lemma2_certificate(p1, p2, 1, 1);
  EXPECT_EQ(r.verdict, Verdict::bounded);
  EXPECT_LE(r.max_abs_x, cert.d);
  EXPECT_LE(std::max(-r.bbox.tau_min, r.bbox.tau_max), cert.tau_max);
  // The upper bound at (eta2, tau = 0) collects f(0) d_eta on every step.
  EXPECT_NEAR(r.max_abs_x, 0.4, 1e-12);
  EXPECT_EQ(r.bbox.eta_min, 0.0);
  EXPECT_EQ(r.bbox.eta_max, 0.4);
}

TEST(ComputeDiamond, OutsideGridIsInputError) {
  auto const m = ReducedModel::quadratic(1, 1);
  EXPECT_THROW(ppwave::compute_diamond(m, {0, 0, 0}, {0, 0.5, 0}, standard_grid()),
               ppwave::InputError);
  EXPECT_THROW(ppwave::compute_diamond(m, {0, 0, 7}, {0, 0.4, 0}, standard_grid()),
               ppwave::InputError);
}

TEST(ComputeDiamond, NarrowGridIsClipped) {
  GridSpec const g{0, 0.4, 100, -0.02, 0.02, 5, 1e6};
  auto const r = ppwave::compute_diamond(ReducedModel::quadratic(1, 1), {0, 0, 0},
                                         {0, 0.4, 0}, g);
  EXPECT_EQ(r.verdict, Verdict::clipped);
}

TEST(VerifyCompactness, StandardInstancePasses) {
  auto const m = ReducedModel::quadratic(1, 1);
  Point3 const p1{0, 0, 0}, p2{0, 0.4, 0};
  auto const r = ppwave::compute_diamond(m, p1, p2, standard_grid());
  auto const rep = ppwave::verify_compactness(
      m, r, ppwave::make_lemma2_certificate(p1, p2, 1, 1));
  EXPECT_EQ(rep.status, CompactnessReport::Status::pass) << rep.reason;
  EXPECT_LT(rep.cell_change, 0.01);
}

TEST(VerifyCompactness, EmptyPassesAndClippedIsInconclusive) {
  auto const m = ReducedModel::quadratic(1, 1);
  auto const cert = ppwave::make_lemma2_certificate({0, 0, 0}, {0, 0.4, 0}, 1, 1);
  GridSpec const g{0, 0.4, 100, -2, 2, 101, 1e6};
  auto const empty = ppwave::compute_diamond(m, {0, 0.3, 0}, {0, 0.1, 0}, g);
  EXPECT_EQ(ppwave::verify_compactness(m, empty, cert).status,
            CompactnessReport::Status::pass);

  GridSpec const tiny{0, 0.4, 100, -0.02, 0.02, 5, 1e6};
  auto const clipped = ppwave::compute_diamond(m, {0, 0, 0}, {0, 0.4, 0}, tiny);
  EXPECT_EQ(ppwave::verify_compactness(m, clipped, cert).status,
            CompactnessReport::Status::inconclusive);
}

TEST(DoubledExtents, KeepsNodesAndSpacing) {
  GridSpec const g{0, 0.4, 400, -6, 6, 2001, 1e6};
  auto const d = ppwave::doubled_extents(g);
  EXPECT_NEAR(d.d_eta(), g.d_eta(), 1e-15);
  EXPECT_NEAR(d.d_tau(), g.d_tau(), 1e-15);
  EXPECT_GE(d.eta_max - d.eta_min, 2 * (g.eta_max - g.eta_min) - 1e-12);
  EXPECT_GE(d.tau_max - d.tau_min, 2 * (g.tau_max - g.tau_min) - 1e-12);
  EXPECT_NEAR(d.tau_at(d.nearest_tau(0.0)), 0.0, 1e-12);
}

// On the standard instance the maximum of |x| sits at (eta2, tau = 0) and is
// eta2 * f(0) / f(0) for every step size, so it is insensitive to d_eta.
TEST(StepRefinement, MaxAbsXIsStepInvariantOnStandardInstance) {
  auto const m = ReducedModel::quadratic(1, 1);
  for (std::size_t n : {100u, 200u, 400u, 800u}) {
    auto const r = ppwave::compute_diamond(m, {0, 0, 0}, {0, 0.4, 0}, standard_grid(n));
    EXPECT_NEAR(r.max_abs_x, 0.4, 1e-12) << n;
  }
}

// Joint refinement with d_eta = 4 d_tau: successive differences of the
// diamond volume shrink at a first-order rate.
TEST(StepRefinement, VolumeConvergesAtFirstOrder) {
  auto const m = ReducedModel::quadratic(1, 1);
  std::vector<double> vol;
  for (std::size_t n_eta : {40u, 80u, 160u, 320u}) {
    double const d_eta = 0.4 / static_cast<double>(n_eta);
    double const h = d_eta / 4.0;
    auto const n_tau = static_cast<std::size_t>(std::llround(2.0 / h)) + 1;
    GridSpec const g{0, 0.4, n_eta, -1, 1, n_tau, 1e6};
    auto const r = ppwave::compute_diamond(m, {0, 0, 0}, {0, 0.4, 0}, g);
    ASSERT_EQ(r.verdict, Verdict::bounded);
    vol.push_back(ppwave::diamond_volume(r));
  }
  for (std::size_t i = 0; i + 2 < vol.size(); ++i) {
    double const ratio = (vol[i + 1] - vol[i]) / (vol[i + 2] - vol[i + 1]);
    EXPECT_GE(ratio, 1.5) << i;
    EXPECT_LE(ratio, 4.0) << i;
  }
}

TEST(CausalImage, ProjectionIsCausal) {
  ppwave::CWModel const cw(ppwave::SymMatrix::diagonal({-0.5, -0.5}));
  ppwave::CurveBatchOptions opt;
  opt.n_curves = 300;
  auto const rep = ppwave::check_causal_image_projection(
      cw, ppwave::dominating_reduced_model(cw), opt);
  EXPECT_EQ(rep.fraction_causal, 1.0);
  EXPECT_GE(rep.worst_margin, -1e-9);
  ASSERT_TRUE(rep.min_radial_gap.has_value());
  EXPECT_GE(*rep.min_radial_gap, -1e-12);
  EXPECT_EQ(rep.n_segments, 300u * 50u);
  EXPECT_EQ(rep.n_source_causal, rep.n_segments);
}

TEST(CausalImage, IdentityIsExactlyCausal) {
  auto const m = ReducedModel::quadratic(1, 1);
  ppwave::CurveBatchOptions opt;
  opt.n_curves = 200;
  auto const rep = ppwave::check_causal_image(
      "identity", ppwave::AffineMap{}, m, m, opt);
  EXPECT_EQ(rep.fraction_causal, 1.0);
  EXPECT_EQ(rep.n_image_causal, rep.n_segments);
}

TEST(CausalImage, TranslationIsExactlyCausal) {
  auto const m = ReducedModel::quadratic(0.7, 1.3);
  ppwave::AffineMap shift;
  shift.offset = {3.0, -2.0, 0.0};
  ppwave::CurveBatchOptions opt;
  opt.n_curves = 100;
  EXPECT_EQ(ppwave::check_causal_image("translate", shift, m, m, opt).fraction_causal,
            1.0);
}

// Recorded rather than asserted as a property of the paper: at C = 2 some
// images fail. The hand example is the null vector (5, 1, 0) at tau = 2.
TEST(CausalImage, SigmaScalingIsNotCausalEverywhere) {
  auto const m = ReducedModel::quadratic(1, 1);
  Point3 const p{0, 0, 2};
  ppwave::Tangent3 const v{5, 1, 0};
  EXPECT_EQ(ppwave::metric_inner(m, p, v, v), 0.0);
  auto const target = ReducedModel::quadratic(0.5, 0.5);
  Point3 const q = ppwave::conformal_scale(p, 2);
  ppwave::Tangent3 const w{v.dxi / 4, v.deta, v.dtau / 2};
  EXPECT_DOUBLE_EQ(ppwave::metric_inner(target, q, w, w), 1.5);

  ppwave::CurveBatchOptions opt;
  opt.n_curves = 200;
  auto const rep = ppwave::check_causal_image_sigma(2.0, m, opt);
  EXPECT_LT(rep.fraction_causal, 1.0);
  EXPECT_GT(rep.max_violation, 0.0);
}

TEST(CausalImage, ThreadCountDoesNotChangeReport) {
  auto const m = ReducedModel::quadratic(1, 1);
  ppwave::CurveBatchOptions a, b;
  a.n_curves = b.n_curves = 64;
  b.threads = 4;
  auto const ra = ppwave::check_causal_image_sigma(2.0, m, a);
  auto const rb = ppwave::check_causal_image_sigma(2.0, m, b);
  EXPECT_EQ(ra.n_image_causal, rb.n_image_causal);
  EXPECT_EQ(ra.worst_margin, rb.worst_margin);
  EXPECT_EQ(ra.worst_curve, rb.worst_curve);
  EXPECT_EQ(ra.worst_segment, rb.worst_segment);
}

TEST(DiamondViaScaling, UnitScaleHasNoDifference) {
  GridSpec const g{0, 0.2, 50, -2, 2, 201, 1e6};
  auto const s = ppwave::diamond_via_scaling({0, 0, 0}, {0, 0.1, 0},
                                             ReducedModel::quadratic(1, 1), g);
  EXPECT_EQ(s.C, 1.0);
  EXPECT_EQ(s.total_symmetric_difference, 0u);
  EXPECT_EQ(s.max_interval_discrepancy, 0.0);
  EXPECT_EQ(s.mapped_bbox, s.direct.bbox);
}

TEST(DiamondViaScaling, LargeEtaReportAndBboxCommutes) {
  GridSpec const g{0, 2, 200, -10, 10, 1001, 1e6};
  auto const s = ppwave::diamond_via_scaling({0, 0, 0}, {0, 2, 0},
                                             ReducedModel::quadratic(1, 1), g);
  EXPECT_NEAR(s.C, 16 * std::sqrt(2.0) / std::acos(-1.0), 1e-12);
  EXPECT_EQ(s.slice_symmetric_difference.size(), 201u);
  ASSERT_GT(s.direct.cell_count, 0u);
  EXPECT_EQ(s.mapped_bbox, s.sigma_of_bbox);
}

TEST(DiamondViaScaling, Errors) {
  GridSpec const g{0, 1, 10, -1, 1, 21, 1e6};
  ReducedModel const table(ppwave::Profile::table({-1, 1}, {1, 1}), 1, 1);
  EXPECT_THROW(ppwave::diamond_via_scaling({0, 0, 0}, {0, 0.5, 0}, table, g),
               ppwave::InputError);
  EXPECT_THROW(ppwave::diamond_via_scaling({0, 0.5, 0}, {0, 0.1, 0},
                                           ReducedModel::quadratic(1, 1), g),
               ppwave::PreconditionError);
}

TEST(GridSpec, Validation) {
  EXPECT_THROW((GridSpec{1, 0, 10, -1, 1, 21, 1}.validate()), ppwave::InputError);
  EXPECT_THROW((GridSpec{0, 1, 10, 1, 1, 21, 1}.validate()), ppwave::InputError);
  EXPECT_THROW((GridSpec{0, 1, 0, -1, 1, 21, 1}.validate()), ppwave::InputError);
  EXPECT_THROW((GridSpec{0, 1, 10, -1, 1, 1, 1}.validate()), ppwave::InputError);
  EXPECT_THROW((GridSpec{0, 1, 10, -1, 1, 21, 0}.validate()), ppwave::InputError);
  GridSpec const g{0, 1, 10, -1, 1, 21, 1};
  EXPECT_EQ(g.tau_at(0), -1.0);
  EXPECT_EQ(g.tau_at(20), 1.0);
  EXPECT_EQ(g.tau_at(10), 0.0);
  EXPECT_EQ(g.tau_at(3), -g.tau_at(17));
}

}  // namespace
