// ppwave: metric families, causal classification and coordinate maps.
//
// Three families are modelled:
//   * the reduced pp-wave  g = 2 deta (dxi - f(tau) deta) + dtau^2 on R^3,
//   * the Cahen-Wallach space CW_n(A)
//         g = 2 deta (dxi + x^T A x deta) + |dx|^2 on R^2 x R^n,
//   * the two dimensional comparison metric  -2 deta^2 + dtau^2 / f(tau).
//
// Sign bookkeeping between the CW and reduced forms lives in this header and
// nowhere else: the CW potential enters the reduced form as
// F(x) = -x^T A x, so a reduced profile f corresponds to A with x^T A x = -f.

#ifndef PPWAVE_SPACETIMES_HPP_
#define PPWAVE_SPACETIMES_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppwave/common.hpp"

namespace ppwave {

// Constants of a bound |F(x)| <= c1^2 + c2^2 |x|^2.
struct Bounds {
  double c1 = 0.0;
  double c2 = 0.0;
};

// Dense symmetric matrix; symmetry is checked exactly on construction.
class SymMatrix {
 public:
  SymMatrix(std::size_t n, std::vector<double> row_major)
      : n_(n), entries_(std::move(row_major)) {
    if (n_ == 0) throw InputError("SymMatrix: dimension must be positive");
    if (entries_.size() != n_ * n_) {
      throw InputError("SymMatrix: expected " + std::to_string(n_ * n_) +
                       " entries, got " + std::to_string(entries_.size()));
    }
    for (double v : entries_) {
      if (!std::isfinite(v)) throw InputError("SymMatrix: non-finite entry");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        if ((*this)(i, j) != (*this)(j, i)) {
          throw InputError("SymMatrix: entry (" + std::to_string(i) + "," +
                           std::to_string(j) + ") differs from its transpose");
        }
      }
    }
  }

  static SymMatrix from_rows(std::vector<std::vector<double>> const& rows) {
    std::size_t const n = rows.size();
    std::vector<double> flat;
    flat.reserve(n * n);
    for (auto const& r : rows) {
      if (r.size() != n) throw InputError("SymMatrix: matrix is not square");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    return SymMatrix(n, std::move(flat));
  }

  static SymMatrix diagonal(std::vector<double> const& d) {
    std::size_t const n = d.size();
    std::vector<double> flat(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) flat[i * n + i] = d[i];
    return SymMatrix(n, std::move(flat));
  }

  static SymMatrix zero(std::size_t n) {
    return SymMatrix(n, std::vector<double>(n * n, 0.0));
  }

  std::size_t dim() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * n_ + j];
  }
  std::vector<double> const& row_major() const { return entries_; }

  // x^T A x
  double quadratic_form(std::span<double const> x) const {
    if (x.size() != n_) throw InputError("SymMatrix: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n_; ++j) row += (*this)(i, j) * x[j];
      s += x[i] * row;
    }
    return s;
  }

  Eigen::MatrixXd to_eigen() const {
    Eigen::MatrixXd m(n_, n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  // Largest |eigenvalue|.
  double spectral_norm() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        to_eigen(), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
  }

 private:
  std::size_t n_;
  std::vector<double> entries_;
};

// Scalar profile f(tau) of the reduced model.
class Profile {
 public:
  enum class Kind { quadratic_f0, power, table };

  // f(tau) = c1^2 tau^2 + c2^2
  static Profile quadratic(double c1, double c2) {
    Profile p(Kind::quadratic_f0);
    p.c1_ = c1;
    p.c2_ = c2;
    return p;
  }

  // f(tau) = |tau|^exponent, the even extension of tau^exponent.
  static Profile power(double exponent) {
    if (!(exponent > 0.0) || !std::isfinite(exponent)) {
      throw InputError("Profile::power: exponent must be positive");
    }
    Profile p(Kind::power);
    p.exponent_ = exponent;
    return p;
  }

  // Monotone cubic (Fritsch-Carlson) interpolant through (tau_i, f_i),
  // extended linearly with the end slopes so it stays C^1 on all of R.
  static Profile table(std::vector<double> nodes, std::vector<double> values) {
    if (nodes.size() < 2 || nodes.size() != values.size()) {
      throw InputError(
          "Profile::table: need at least two nodes and one value per node");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!std::isfinite(nodes[i]) || !std::isfinite(values[i])) {
        throw InputError("Profile::table: non-finite node or value");
      }
      if (i > 0 && !(nodes[i] > nodes[i - 1])) {
        throw InputError("Profile::table: nodes must be strictly increasing");
      }
    }
    Profile p(Kind::table);
    p.nodes_ = std::move(nodes);
    p.values_ = std::move(values);
    p.slopes_ = pchip_slopes(p.nodes_, p.values_);
    return p;
  }

  Kind kind() const { return kind_; }
  double exponent() const { return exponent_; }
  Bounds quadratic_constants() const { return {c1_, c2_}; }
  std::vector<double> const& nodes() const { return nodes_; }
  std::vector<double> const& values() const { return values_; }

  double operator()(double tau) const {
    switch (kind_) {
      case Kind::quadratic_f0:
        return c1_ * c1_ * tau * tau + c2_ * c2_;
      case Kind::power:
        return std::pow(std::abs(tau), exponent_);
      case Kind::table:
        return eval_table(tau).first;
    }
    return 0.0;
  }

  // f'(tau); throws InputError where f is not differentiable.
  double derivative(double tau) const {
    switch (kind_) {
      case Kind::quadratic_f0:
        return 2.0 * c1_ * c1_ * tau;
      case Kind::power: {
        if (tau == 0.0) {
          if (exponent_ <= 1.0) {
            throw InputError(
                "Profile::power: |tau|^p is not differentiable at tau = 0 "
                "for p <= 1");
          }
          return 0.0;
        }
        double const s = tau > 0.0 ? 1.0 : -1.0;
        return s * exponent_ * std::pow(std::abs(tau), exponent_ - 1.0);
      }
      case Kind::table:
        return eval_table(tau).second;
    }
    return 0.0;
  }

 private:
  explicit Profile(Kind k) : kind_(k) {}

  static std::vector<double> pchip_slopes(std::vector<double> const& x,
                                          std::vector<double> const& y) {
    std::size_t const n = x.size();
    std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x[k + 1] - x[k];
      delta[k] = (y[k + 1] - y[k]) / h[k];
    }
    if (n == 2) {
      d[0] = d[1] = delta[0];
      return d;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] <= 0.0) {
        d[k] = 0.0;
      } else {
        double const w1 = 2.0 * h[k] + h[k - 1];
        double const w2 = h[k] + 2.0 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
      }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0.0) {
        s = 0.0;
      } else if (d0 * d1 <= 0.0 && std::abs(s) > 3.0 * std::abs(d0)) {
        s = 3.0 * d0;
      }
      return s;
    };
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return d;
  }

  std::pair<double, double> eval_table(double t) const {
    std::size_t const n = nodes_.size();
    if (t <= nodes_.front()) {
      return {values_.front() + slopes_.front() * (t - nodes_.front()),
              slopes_.front()};
    }
    if (t >= nodes_.back()) {
      return {values_.back() + slopes_.back() * (t - nodes_.back()),
              slopes_.back()};
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    std::size_t const k = std::min<std::size_t>(
        static_cast<std::size_t>(it - nodes_.begin()) - 1, n - 2);
    double const h = nodes_[k + 1] - nodes_[k];
    double const s = (t - nodes_[k]) / h;
    double const s2 = s * s, s3 = s2 * s;
    double const h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    double const h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    double const value = h00 * values_[k] + h10 * h * slopes_[k] +
                         h01 * values_[k + 1] + h11 * h * slopes_[k + 1];
    double const dh00 = 6 * s2 - 6 * s, dh10 = 3 * s2 - 4 * s + 1;
    double const dh01 = -6 * s2 + 6 * s, dh11 = 3 * s2 - 2 * s;
    double const deriv = (dh00 * values_[k] + dh01 * values_[k + 1]) / h +
                         dh10 * slopes_[k] + dh11 * slopes_[k + 1];
    return {value, deriv};
  }

  Kind kind_;
  double c1_ = 0.0, c2_ = 0.0;
  double exponent_ = 0.0;
  std::vector<double> nodes_, values_, slopes_;
};

// Reduced three dimensional model 2 deta (dxi - f deta) + dtau^2 together
// with the constants of the dominating quadratic f0 = c1^2 tau^2 + c2^2.
class ReducedModel {
 public:
  ReducedModel(Profile profile, double c1, double c2)
      : profile_(std::move(profile)), c1_(c1), c2_(c2) {
    if (!(c1_ > 0.0) || !(c2_ > 0.0) || !std::isfinite(c1_) ||
        !std::isfinite(c2_)) {
      throw InputError("ReducedModel: c1 and c2 must be positive and finite");
    }
    if (profile_.kind() == Profile::Kind::quadratic_f0) {
      auto const b = profile_.quadratic_constants();
      if (b.c1 != c1_ || b.c2 != c2_) {
        throw InputError("ReducedModel: quadratic profile constants differ "
                         "from the model constants");
      }
    }
    if (profile_.kind() == Profile::Kind::table) {
      auto const& t = profile_.nodes();
      auto const& v = profile_.values();
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::abs(v[i]) > f0(t[i])) {
          throw InputError("ReducedModel: tabulated |f| exceeds c1^2 tau^2 + "
                           "c2^2 at node tau = " + std::to_string(t[i]));
        }
      }
    }
  }

  // The quadratic profile f = f0 itself.
  static ReducedModel quadratic(double c1, double c2) {
    return ReducedModel(Profile::quadratic(c1, c2), c1, c2);
  }

  Profile const& profile() const { return profile_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  bool is_quadratic() const {
    return profile_.kind() == Profile::Kind::quadratic_f0;
  }

  double f(double tau) const { return profile_(tau); }
  double df(double tau) const { return profile_.derivative(tau); }
  double f0(double tau) const { return c1_ * c1_ * tau * tau + c2_ * c2_; }

 private:
  Profile profile_;
  double c1_, c2_;
};

// c2 = max(sqrt(|A|_2), floor), c1 = floor.
inline Bounds derive_bounds_from_A(SymMatrix const& A, double floor = 1e-3) {
  if (!(floor > 0.0) || !std::isfinite(floor)) {
    throw InputError("derive_bounds_from_A: floor must be positive");
  }
  return {floor, std::max(std::sqrt(A.spectral_norm()), floor)};
}

// Overload for raw input; a non-symmetric matrix raises InputError.
inline Bounds derive_bounds_from_A(
    std::vector<std::vector<double>> const& rows, double floor = 1e-3) {
  return derive_bounds_from_A(SymMatrix::from_rows(rows), floor);
}

// Cahen-Wallach space CW_n(A) over flat R^n with base point the origin.
class CWModel {
 public:
  explicit CWModel(SymMatrix A, double floor = 1e-3)
      : A_(std::move(A)), bounds_(derive_bounds_from_A(A_, floor)) {}

  SymMatrix const& A() const { return A_; }
  std::size_t dim() const { return A_.dim(); }
  double c1() const { return bounds_.c1; }
  double c2() const { return bounds_.c2; }

  // Coefficient of deta^2 is 2 x^T A x.
  double potential(std::span<double const> x) const {
    return A_.quadratic_form(x);
  }
  // F(x) = -x^T A x in the 2 deta (dxi - F deta) form.
  double profile(std::span<double const> x) const { return -potential(x); }

 private:
  SymMatrix A_;
  Bounds bounds_;
};

// -2 deta^2 + dtau^2 / f(tau) on the (eta, tau) plane.
class CounterexampleModel {
 public:
  explicit CounterexampleModel(Profile f) : f_(std::move(f)) {}
  Profile const& profile() const { return f_; }

 private:
  Profile f_;
};

struct Tangent2 {
  double deta = 0.0;
  double dtau = 0.0;
};

namespace detail {

inline void require_finite(Point3 const& p, Tangent3 const& v) {
  if (!is_finite(p) || !is_finite(v)) {
    throw InputError("non-finite point or tangent component");
  }
}

inline void require_dims(CWModel const& m, PointN const& p,
                         TangentN const& v) {
  if (p.x.size() != m.dim() || v.dx.size() != m.dim()) {
    throw InputError("CW model of dimension " + std::to_string(m.dim()) +
                     " got point/tangent of dimension " +
                     std::to_string(p.x.size()) + "/" +
                     std::to_string(v.dx.size()));
  }
}

}  // namespace detail

inline double metric_inner(ReducedModel const& model, Point3 const& p,
                           Tangent3 const& v, Tangent3 const& w) {
  detail::require_finite(p, v);
  detail::require_finite(p, w);
  double const f = model.f(p.tau);
  return v.deta * w.dxi + v.dxi * w.deta - 2.0 * f * v.deta * w.deta +
         v.dtau * w.dtau;
}

inline double metric_inner(CWModel const& model, PointN const& p,
                           TangentN const& v, TangentN const& w) {
  detail::require_dims(model, p, v);
  detail::require_dims(model, p, w);
  double s = v.deta * w.dxi + v.dxi * w.deta +
             2.0 * model.potential(p.x) * v.deta * w.deta;
  for (std::size_t i = 0; i < v.dx.size(); ++i) s += v.dx[i] * w.dx[i];
  return s;
}

inline double metric_inner(CounterexampleModel const& model, double tau,
                           Tangent2 const& v, Tangent2 const& w) {
  double const f = model.profile()(tau);
  if (!(f > 0.0)) {
    throw InputError("counterexample metric needs f(tau) > 0");
  }
  return -2.0 * v.deta * w.deta + v.dtau * w.dtau / f;
}

struct CausalClass {
  enum class Type { timelike, null, spacelike };
  enum class Orientation { future, past, none };

  Type type = Type::spacelike;
  Orientation orientation = Orientation::none;

  bool causal() const { return type != Type::spacelike; }
  bool future_causal() const {
    return causal() && orientation == Orientation::future;
  }
  friend bool operator==(CausalClass const&, CausalClass const&) = default;
};

inline char const* to_string(CausalClass::Type t) {
  switch (t) {
    case CausalClass::Type::timelike: return "timelike";
    case CausalClass::Type::null: return "null";
    case CausalClass::Type::spacelike: return "spacelike";
  }
  return "?";
}

inline char const* to_string(CausalClass::Orientation o) {
  switch (o) {
    case CausalClass::Orientation::future: return "future";
    case CausalClass::Orientation::past: return "past";
    case CausalClass::Orientation::none: return "none";
  }
  return "?";
}

namespace detail {

// Classification from g(v,v), shared by all families. Orientation rule:
// future iff deta > 0, or deta == 0 and dxi < 0. This agrees with
// g(v, d_eta) < 0 when f > 0 and stays defined where f <= 0.
inline CausalClass classify(double norm_sq, double dxi, double deta,
                            double euclid_sq, double null_band) {
  if (euclid_sq == 0.0) throw InputError("causal_class: zero vector");
  double const band = null_band * (1.0 + euclid_sq);
  CausalClass c;
  if (norm_sq > band) {
    c.type = CausalClass::Type::spacelike;
    c.orientation = CausalClass::Orientation::none;
    return c;
  }
  c.type = norm_sq < -band ? CausalClass::Type::timelike
                           : CausalClass::Type::null;
  bool const future = deta > 0.0 || (deta == 0.0 && dxi < 0.0);
  c.orientation = future ? CausalClass::Orientation::future
                         : CausalClass::Orientation::past;
  return c;
}

}  // namespace detail

inline CausalClass causal_class(ReducedModel const& model, Point3 const& p,
                                Tangent3 const& v,
                                double null_band = kDefaultTolerances.null_band) {
  return detail::classify(metric_inner(model, p, v, v), v.dxi, v.deta,
                          v.euclidean_norm_sq(), null_band);
}

inline CausalClass causal_class(CWModel const& model, PointN const& p,
                                TangentN const& v,
                                double null_band = kDefaultTolerances.null_band) {
  return detail::classify(metric_inner(model, p, v, v), v.dxi, v.deta,
                          v.euclidean_norm_sq(), null_band);
}

// sigma(xi, eta, tau) = (xi / C^2, eta, tau / C), C >= 1.
inline Point3 conformal_scale(Point3 const& p, double C) {
  if (!(C >= 1.0) || !std::isfinite(C)) {
    throw InputError("conformal_scale: C must be >= 1");
  }
  return {p.xi / (C * C), p.eta, p.tau / C};
}

// Constants of f0'(tau') = (c1/C)^2 tau'^2 + (c2/C)^2.
inline Bounds scaled_constants(double c1, double c2, double C) {
  if (!(C >= 1.0) || !std::isfinite(C)) {
    throw InputError("scaled_constants: C must be >= 1");
  }
  return {c1 / C, c2 / C};
}

// Bound pi / (4 sqrt2 c1) on eta2 below which the diamond estimate applies.
inline double eta_threshold(double c1) { return kPi / (4.0 * kSqrt2 * c1); }

// Smallest useful C >= 1 with eta2 < eta_threshold(c1 / C), with relative
// margin: eta2 <= (1 - margin) * eta_threshold(c1 / C).
inline double choose_scale_C(double eta2, double c1, double margin = 0.5) {
  if (!(eta2 > 0.0) || !(c1 > 0.0)) {
    throw PreconditionError("choose_scale_C: need eta2 > 0 and c1 > 0");
  }
  if (!(margin > 0.0 && margin < 1.0)) {
    throw PreconditionError("choose_scale_C: margin must lie in (0, 1)");
  }
  double const needed = (4.0 * kSqrt2 * c1 * eta2 / kPi) / (1.0 - margin);
  return std::max(1.0, needed);
}

// (xi, eta, x) -> (xi, eta, |x|); rho is the distance to the origin of R^n.
inline Point3 projection_pi(PointN const& q) {
  return {q.xi, q.eta, euclidean_norm(q.x)};
}

// The isometry (xi, eta, tau) -> (xi + xi0, eta + eta0, tau).
inline Point3 translate(Point3 const& p, double xi0, double eta0) {
  return {p.xi + xi0, p.eta + eta0, p.tau};
}

// The reduced model dominating CW_n(A) under projection_pi. The CW bound is
// |F| <= c1^2 + c2^2 rho^2, i.e. the reduced quadratic with the roles of the
// two constants exchanged: f0(rho) = c2^2 rho^2 + c1^2.
inline ReducedModel dominating_reduced_model(CWModel const& cw) {
  return ReducedModel::quadratic(cw.c2(), cw.c1());
}

// The quadratic reduced model (c1, c2) is CW_1([[-c1^2]]) after the shear
// xi_cw = xi - c2^2 eta, with x = tau.
inline SymMatrix quadratic_profile_as_cw_matrix(double c1) {
  return SymMatrix(1, {-c1 * c1});
}

inline PointN reduced_to_cw(Point3 const& p, double c2) {
  return {p.xi - c2 * c2 * p.eta, p.eta, {p.tau}};
}

inline TangentN reduced_to_cw(Tangent3 const& v, double c2) {
  return {v.dxi - c2 * c2 * v.deta, v.deta, {v.dtau}};
}

inline Point3 cw_to_reduced(PointN const& p, double c2) {
  if (p.x.size() != 1) throw InputError("cw_to_reduced: needs n = 1");
  return {p.xi + c2 * c2 * p.eta, p.eta, p.x[0]};
}

inline Tangent3 cw_to_reduced(TangentN const& v, double c2) {
  if (v.dx.size() != 1) throw InputError("cw_to_reduced: needs n = 1");
  return {v.dxi + c2 * c2 * v.deta, v.deta, v.dx[0]};
}

}  // namespace ppwave

#endif  // PPWAVE_SPACETIMES_HPP_
