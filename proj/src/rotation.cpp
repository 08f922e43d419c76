#include "kflow/rotation.hpp"

#include <cctype>
#include <cmath>
#include <limits>

#include "kflow/error.hpp"

namespace kflow {

namespace mp = boost::multiprecision;
using BigInt = mp::cpp_int;

namespace {

constexpr unsigned kRootBits = 256;

BigInt pow2(unsigned bits) { return BigInt(1) << bits; }

u128 to_u128(const BigInt& v) {
  const BigInt mask = (BigInt(1) << 64) - 1;
  auto lo = static_cast<std::uint64_t>(v & mask);
  auto hi = static_cast<std::uint64_t>((v >> 64) & mask);
  return (static_cast<u128>(hi) << 64) | lo;
}

BigInt floor_div(const Rational& r) {
  BigInt num = mp::numerator(r);
  BigInt den = mp::denominator(r);
  BigInt q = num / den;
  if (num < 0 && q * den != num) q -= 1;
  return q;
}

// Enclosure of frac(sqrt(k)) of width 2^-256.
RealInterval sqrt_fraction(std::uint64_t k) {
  BigInt root = mp::sqrt(BigInt(k));
  if (root * root == k) throw PreconditionError("sqrt" + std::to_string(k) + " is rational");
  BigInt scaled = mp::sqrt(BigInt(k) << (2 * kRootBits));  // floor(sqrt(k) * 2^256)
  BigInt offset = root << kRootBits;
  Rational lo(scaled - offset, pow2(kRootBits));
  Rational hi(scaled + 1 - offset, pow2(kRootBits));
  return {lo, hi};
}

Rational parse_decimal(std::string_view s) {
  BigInt num = 0;
  BigInt den = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  for (char c : s) {
    if (c == '.') {
      if (seen_dot) throw PreconditionError("malformed decimal: " + std::string(s));
      seen_dot = true;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      num = num * 10 + (c - '0');
      if (seen_dot) den *= 10;
      seen_digit = true;
    } else {
      throw PreconditionError("malformed alpha: " + std::string(s));
    }
  }
  if (!seen_digit) throw PreconditionError("malformed alpha: " + std::string(s));
  return Rational(num, den);
}

}  // namespace

RealInterval parse_alpha(std::string_view spec) {
  if (spec == "golden") {
    // (sqrt 5 - 1) / 2
    BigInt scaled = mp::sqrt(BigInt(5) << (2 * kRootBits));
    Rational lo(scaled - pow2(kRootBits), pow2(kRootBits + 1));
    Rational hi(scaled + 1 - pow2(kRootBits), pow2(kRootBits + 1));
    return {lo, hi};
  }
  if (spec == "sqrt2m1") return sqrt_fraction(2);
  if (spec.starts_with("sqrt")) {
    std::string digits(spec.substr(4));
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw PreconditionError("malformed alpha: " + std::string(spec));
    return sqrt_fraction(std::stoull(digits));
  }
  if (auto slash = spec.find('/'); slash != std::string_view::npos) {
    Rational num = parse_decimal(spec.substr(0, slash));
    Rational den = parse_decimal(spec.substr(slash + 1));
    if (den == 0) throw PreconditionError("zero denominator in alpha: " + std::string(spec));
    return RealInterval::point(num / den);
  }
  return RealInterval::point(parse_decimal(spec));
}

std::uint64_t Rotation::a(int n) const {
  if (n < 1 || n > depth()) throw PreconditionError("partial quotient index out of range");
  return terms_[static_cast<std::size_t>(n - 1)];
}

std::uint64_t Rotation::p(int n) const {
  if (n < 0 || n > depth()) throw PreconditionError("convergent index out of range");
  return p_[static_cast<std::size_t>(n)];
}

std::uint64_t Rotation::q(int n) const {
  if (n < 0 || n > depth()) throw PreconditionError("convergent index out of range");
  return q_[static_cast<std::size_t>(n)];
}

double Rotation::approximation_error(int n) const {
  Rational q_n(BigInt(q(n)));
  Rational p_n(BigInt(p(n)));
  Rational e1 = mp::abs(q_n * alpha_.lo - p_n);
  Rational e2 = mp::abs(q_n * alpha_.hi - p_n);
  return static_cast<double>(e1 > e2 ? e1 : e2);
}

void Rotation::finish_convergents() {
  constexpr std::uint64_t kLimit = std::uint64_t{1} << 63;
  p_.assign(1, 0);
  q_.assign(1, 1);
  // p_{-1} = 1, q_{-1} = 0
  u128 p_prev = 1, q_prev = 0;
  for (std::size_t n = 0; n < terms_.size(); ++n) {
    u128 pn = static_cast<u128>(terms_[n]) * p_.back() + p_prev;
    u128 qn = static_cast<u128>(terms_[n]) * q_.back() + q_prev;
    if (qn > kLimit || pn > kLimit)
      throw PrecisionError("denominator q_" + std::to_string(n + 1) + " exceeds 2^63");
    p_prev = p_.back();
    q_prev = q_.back();
    p_.push_back(static_cast<std::uint64_t>(pn));
    q_.push_back(static_cast<std::uint64_t>(qn));
  }

  Rational mid = (alpha_.lo + alpha_.hi) / 2;
  BigInt num = mp::numerator(mid);
  BigInt den = mp::denominator(mid);
  BigInt raw = ((num << 128) + den / 2) / den;
  step_ = CirclePoint::from_raw(to_u128(raw));
  alpha_double_ = step_.value();
  double half_width = static_cast<double>(Rational((alpha_.hi - alpha_.lo) / 2));
  alpha_error_ = half_width + std::ldexp(1.0, -129);
}

Rotation Rotation::from_terms(std::vector<std::uint64_t> terms) {
  if (terms.empty()) throw PreconditionError("at least one partial quotient is required");
  for (auto t : terms)
    if (t == 0) throw PreconditionError("partial quotients must be positive");
  Rotation rot;
  rot.terms_ = std::move(terms);
  rot.finish_convergents();
  rot.alpha_ = RealInterval::point(Rational(BigInt(rot.p_.back()), BigInt(rot.q_.back())));
  rot.finish_convergents();
  return rot;
}

Rotation cf_expand(const RealInterval& alpha, int depth) {
  if (depth < 1) throw PreconditionError("depth must be >= 1");
  if (alpha.lo > alpha.hi) throw PreconditionError("empty enclosure for alpha");
  if (alpha.lo <= 0 || alpha.hi >= 1) throw PreconditionError("alpha must lie in (0,1)");

  Rotation rot;
  rot.alpha_ = alpha;
  Rational lo = alpha.lo;
  Rational hi = alpha.hi;
  for (int n = 1; n <= depth; ++n) {
    Rational inv_lo = reciprocal(hi);
    Rational inv_hi = reciprocal(lo);
    BigInt a = floor_div(inv_lo);
    if (floor_div(inv_hi) != a)
      throw PrecisionError("enclosure of alpha does not determine a_" + std::to_string(n));
    if (a > std::numeric_limits<std::uint64_t>::max())
      throw PrecisionError("partial quotient a_" + std::to_string(n) + " exceeds 64 bits");
    rot.terms_.push_back(static_cast<std::uint64_t>(a));
    lo = inv_lo - Rational(a);
    hi = inv_hi - Rational(a);
    if (hi == 0) throw RationalInputError(n);
    if (lo == 0)
      throw PrecisionError("enclosure of alpha does not determine a_" + std::to_string(n + 1));
  }
  rot.finish_convergents();
  return rot;
}

Rotation cf_expand(std::string_view alpha_spec, int depth) {
  return cf_expand(parse_alpha(alpha_spec), depth);
}

DiophantineReport in_class_D(const Rotation& rot, double c, int n_min, int n_max) {
  if (!(c > 0)) throw PreconditionError("C must be positive");
  if (n_min < 1 || n_min > n_max) throw PreconditionError("invalid index range");
  if (n_max + 1 > rot.depth())
    throw PreconditionError("index range needs q_" + std::to_string(n_max + 1) + " but only " +
                            std::to_string(rot.depth()) + " convergents are stored");
  DiophantineReport rep;
  rep.c = c;
  rep.n_min = n_min;
  rep.n_max = n_max;
  rep.all_pass = true;
  rep.minimal_c = 0.0;
  for (int n = n_min; n <= n_max; ++n) {
    DiophantineRow row;
    row.n = n;
    row.q_n = rot.q(n);
    row.q_next = rot.q(n + 1);
    double qn = static_cast<double>(row.q_n);
    double log_n = std::log(static_cast<double>(n));
    double factor = qn * std::log(qn) * log_n * log_n;
    row.bound = c * factor;
    row.pass = static_cast<double>(row.q_next) < row.bound;
    row.required_c = factor > 0 ? static_cast<double>(row.q_next) / factor
                                : std::numeric_limits<double>::infinity();
    rep.all_pass = rep.all_pass && row.pass;
    rep.minimal_c = std::max(rep.minimal_c, row.required_c);
    rep.rows.push_back(row);
  }
  rep.note = "checked n in [" + std::to_string(n_min) + ", " + std::to_string(n_max) +
             "] only; membership is an asymptotic condition";
  return rep;
}

OrbitPoint orbit_point(const Rotation& rot, CirclePoint x, std::int64_t n) {
  if (n > kMaxOrbitIndex || n < -kMaxOrbitIndex)
    throw PrecisionError("orbit index " + std::to_string(n) + " exceeds the precision budget");
  double mag = static_cast<double>(n < 0 ? -n : n);
  return {x + rot.step().times(n), mag * rot.alpha_error()};
}

OrbitMinimum min_orbit_distance(const Rotation& rot, CirclePoint z, std::int64_t m) {
  if (m < 1) throw PreconditionError("M must be >= 1");
  if (m > kMaxOrbitIndex) throw PrecisionError("M exceeds the precision budget");
  CirclePoint pt = z;
  u128 best = circle_dist_raw(pt, CirclePoint());
  std::int64_t arg = 0;
  for (std::int64_t j = 1; j < m; ++j) {
    pt += rot.step();
    u128 d = circle_dist_raw(pt, CirclePoint());
    if (d < best) {
      best = d;
      arg = j;
    }
  }
  return {CircleDistance{fixed_to_double(best)}, arg};
}

}  // namespace kflow
