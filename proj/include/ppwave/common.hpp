// ppwave: numerical causal structure of pp-wave and Cahen-Wallach spacetimes.
//
// Shared value types, error classes, tolerances, seeded random streams and a
// small deterministic parallel-for used by the other headers.

#ifndef PPWAVE_COMMON_HPP_
#define PPWAVE_COMMON_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace ppwave {

//! Bad argument supplied by the caller (dimension mismatch, zero vector, ...).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

//! A documented precondition of an operation does not hold.
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

//! An internal consistency check failed; indicates a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

//! Default tolerances, kept in one place.
struct Tolerances {
  double null_band = 1e-12;           // relative band for g(v,v) ~ 0
  double ode_drift = 1e-8;            // conserved quantity drift of RK4
  double fd_gradient = 1e-6;          // closed-form vs finite differences
  double escape_convergence = 1e-6;   // relative change between doublings
  double oracle_equality = 1e-12;     // dual-implementation agreement
};

inline constexpr Tolerances kDefaultTolerances{};

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kSqrt2 = std::numbers::sqrt2;
inline constexpr double kPi = std::numbers::pi;

// Event coordinates (xi, eta, tau) of the reduced three dimensional model.
struct Point3 {
  double xi = 0.0;
  double eta = 0.0;
  double tau = 0.0;

  friend bool operator==(Point3 const&, Point3 const&) = default;
};

// Differentials (dxi, deta, dtau).
struct Tangent3 {
  double dxi = 0.0;
  double deta = 0.0;
  double dtau = 0.0;

  friend bool operator==(Tangent3 const&, Tangent3 const&) = default;

  Tangent3& operator+=(Tangent3 const& o) {
    dxi += o.dxi;
    deta += o.deta;
    dtau += o.dtau;
    return *this;
  }
  friend Tangent3 operator+(Tangent3 a, Tangent3 const& b) { return a += b; }
  friend Tangent3 operator-(Tangent3 const& a, Tangent3 const& b) {
    return {a.dxi - b.dxi, a.deta - b.deta, a.dtau - b.dtau};
  }
  friend Tangent3 operator*(double s, Tangent3 const& v) {
    return {s * v.dxi, s * v.deta, s * v.dtau};
  }

  double euclidean_norm_sq() const {
    return dxi * dxi + deta * deta + dtau * dtau;
  }
};

inline Point3 operator+(Point3 const& p, Tangent3 const& v) {
  return {p.xi + v.dxi, p.eta + v.deta, p.tau + v.dtau};
}

inline Tangent3 operator-(Point3 const& a, Point3 const& b) {
  return {a.xi - b.xi, a.eta - b.eta, a.tau - b.tau};
}

// Point of the full Cahen-Wallach space R^2 x R^n.
struct PointN {
  double xi = 0.0;
  double eta = 0.0;
  std::vector<double> x;

  friend bool operator==(PointN const&, PointN const&) = default;
};

struct TangentN {
  double dxi = 0.0;
  double deta = 0.0;
  std::vector<double> dx;

  friend bool operator==(TangentN const&, TangentN const&) = default;

  double euclidean_norm_sq() const {
    double s = dxi * dxi + deta * deta;
    for (double c : dx) s += c * c;
    return s;
  }
};

inline bool is_finite(Point3 const& p) {
  return std::isfinite(p.xi) && std::isfinite(p.eta) && std::isfinite(p.tau);
}

inline bool is_finite(Tangent3 const& v) {
  return std::isfinite(v.dxi) && std::isfinite(v.deta) &&
         std::isfinite(v.dtau);
}

inline double euclidean_norm(std::vector<double> const& x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return std::sqrt(s);
}

// Seeded random streams. The raw 64-bit output of mt19937_64 is specified by
// the standard, and the conversion to doubles below is done by hand, so a
// fixed seed yields the same numbers on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on (0, 1].
  double uniform_positive() { return 1.0 - uniform(); }

  // Raw 64-bit draw, used to seed nested streams.
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Seed of the independent stream for item `index` of a batch.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  // splitmix64 finalizer over the combined word.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Runs fn(begin, end) over contiguous chunks of [0, n) on up to `threads`
// workers. Chunk boundaries depend only on n and threads.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (n == 0) return;
  threads = std::max(1u, threads);
  std::size_t const workers = std::min<std::size_t>(threads, n);
  if (workers == 1) {
    fn(std::size_t{0}, n);
    return;
  }
  std::size_t const chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t const begin = w * chunk;
    std::size_t const end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace ppwave

#endif  // PPWAVE_COMMON_HPP_
