#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kflow/circle.hpp"

namespace kflow {

using Rational = boost::multiprecision::cpp_rational;

/// A real number known to lie in [lo, hi]. Exact rationals have lo == hi.
struct RealInterval {
  Rational lo;
  Rational hi;

  bool exact() const { return lo == hi; }
  static RealInterval point(Rational v) { return {v, v}; }
};

/// 1/x built from the swapped numerator and denominator. Mixed int/rational
/// division in boost's rational adaptor reads past a stack temporary.
inline Rational reciprocal(const Rational& x) {
  return Rational(boost::multiprecision::denominator(x), boost::multiprecision::numerator(x));
}

/// Parses an alpha specification.
///
/// Accepted forms: "golden" ((sqrt 5 - 1)/2), "sqrt2m1" (sqrt 2 - 1), "sqrtK"
/// (fractional part of sqrt K, K not a square), a fraction "p/q", or a decimal
/// literal. Decimals and fractions are exact rationals. Square roots are
/// enclosed in an interval of width 2^-256.
RealInterval parse_alpha(std::string_view spec);

/// Largest |n| accepted by orbit arithmetic.
inline constexpr std::int64_t kMaxOrbitIndex = std::int64_t{1} << 48;

/// An irrational rotation x -> x + alpha mod 1 with its continued fraction
/// alpha = [0; a_1, a_2, ...] and convergents p_n/q_n, n = 0..depth.
class Rotation {
 public:
  /// Builds the rotation directly from partial quotients a_1..a_d. The rotation
  /// number is the last convergent p_d/q_d; meant for diagnostics on
  /// hand-built denominator sequences.
  static Rotation from_terms(std::vector<std::uint64_t> terms);

  double alpha() const noexcept { return alpha_double_; }
  /// alpha on the 2^-128 grid.
  CirclePoint step() const noexcept { return step_; }
  /// Bound on |step - alpha|.
  double alpha_error() const noexcept { return alpha_error_; }

  int depth() const noexcept { return static_cast<int>(terms_.size()); }
  /// a_1..a_depth.
  const std::vector<std::uint64_t>& cf_terms() const noexcept { return terms_; }
  /// Partial quotient a_n, 1 <= n <= depth.
  std::uint64_t a(int n) const;
  std::uint64_t p(int n) const;
  /// Denominator q_n, 0 <= n <= depth (q_0 = 1).
  std::uint64_t q(int n) const;

  /// |q_n alpha - p_n| evaluated from the stored enclosure (upper bound).
  double approximation_error(int n) const;

 private:
  friend Rotation cf_expand(const RealInterval& alpha, int depth);
  Rotation() = default;
  void finish_convergents();

  RealInterval alpha_;
  double alpha_double_ = 0.0;
  CirclePoint step_;
  double alpha_error_ = 0.0;
  std::vector<std::uint64_t> terms_;
  std::vector<std::uint64_t> p_;
  std::vector<std::uint64_t> q_;
};

/// Expands alpha in (0,1) to `depth` partial quotients.
/// Throws RationalInputError when the expansion terminates within depth, and
/// PrecisionError when the enclosure of alpha no longer determines a term.
Rotation cf_expand(const RealInterval& alpha, int depth);
Rotation cf_expand(std::string_view alpha_spec, int depth);

/// One row of the Diophantine check q_{n+1} < C q_n log q_n (log n)^2.
struct DiophantineRow {
  int n = 0;
  std::uint64_t q_n = 0;
  std::uint64_t q_next = 0;
  double bound = 0.0;       ///< C q_n log q_n (log n)^2
  bool pass = false;
  double required_c = 0.0;  ///< q_{n+1} / (q_n log q_n (log n)^2); +inf when the factor vanishes
};

/// Range-limited diagnostic for the growth condition on denominators. Never a
/// membership verdict: only indices n_min..n_max were inspected.
struct DiophantineReport {
  double c = 0.0;
  int n_min = 0;
  int n_max = 0;
  std::vector<DiophantineRow> rows;
  bool all_pass = false;
  /// Infimum of C for which every checked row passes (the inequality is strict,
  /// so C must exceed this value).
  double minimal_c = 0.0;
  std::string note;
};

DiophantineReport in_class_D(const Rotation& rot, double c, int n_min, int n_max);

/// x + n alpha with a bound on its distance from the exact value.
struct OrbitPoint {
  CirclePoint point;
  double error_bound = 0.0;
};

/// {x + n alpha}; the translation is one exact modular multiplication of the
/// 128-bit rotation step, so the only error is |n| * alpha_error().
OrbitPoint orbit_point(const Rotation& rot, CirclePoint x, std::int64_t n);

struct OrbitMinimum {
  CircleDistance value;
  std::int64_t argmin = 0;
};

/// min_{0 <= j < M} ||z + j alpha|| and its first minimiser.
OrbitMinimum min_orbit_distance(const Rotation& rot, CirclePoint z, std::int64_t m);

}  // namespace kflow
