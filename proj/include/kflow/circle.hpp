#pragma once

#include <compare>
#include <cstdint>

namespace kflow {

using u128 = unsigned __int128;

/// A point of the circle R/Z held as a 128-bit binary fraction (value = raw * 2^-128).
///
/// Addition wraps modulo 2^128, so translations by a rotation number are exact
/// modular arithmetic on the stored representation and isometries of the
/// circle are preserved bit for bit.
class CirclePoint {
 public:
  constexpr CirclePoint() = default;

  static constexpr CirclePoint from_raw(u128 raw) noexcept { return CirclePoint(raw); }
  /// Reduces x modulo 1; every finite double is represented exactly.
  static CirclePoint from_double(double x);

  constexpr u128 raw() const noexcept { return raw_; }

  /// The representative in [0, 1).
  double value() const noexcept;
  /// 1 - value(), computed exactly before the final rounding (so it keeps full
  /// relative precision next to 1).
  double complement() const noexcept;
  /// ||x||, the distance to 0 on the circle, in [0, 1/2].
  double norm() const noexcept;

  constexpr bool is_zero() const noexcept { return raw_ == 0; }

  constexpr CirclePoint operator+(CirclePoint o) const noexcept { return CirclePoint(raw_ + o.raw_); }
  constexpr CirclePoint operator-(CirclePoint o) const noexcept { return CirclePoint(raw_ - o.raw_); }
  constexpr CirclePoint operator-() const noexcept { return CirclePoint(-raw_); }
  CirclePoint& operator+=(CirclePoint o) noexcept {
    raw_ += o.raw_;
    return *this;
  }
  CirclePoint& operator-=(CirclePoint o) noexcept {
    raw_ -= o.raw_;
    return *this;
  }
  /// n-fold translation, exact modulo 2^128 (two's complement handles n < 0).
  constexpr CirclePoint times(std::int64_t n) const noexcept {
    return CirclePoint(raw_ * static_cast<u128>(static_cast<__int128>(n)));
  }

  constexpr bool operator==(const CirclePoint&) const = default;
  constexpr auto operator<=>(const CirclePoint&) const = default;

 private:
  constexpr explicit CirclePoint(u128 raw) : raw_(raw) {}
  u128 raw_ = 0;
};

/// ||x - y||: distance to the nearest integer, in [0, 1/2].
struct CircleDistance {
  double value = 0.0;
  constexpr auto operator<=>(const CircleDistance&) const = default;
};

CircleDistance circle_dist(CirclePoint x, CirclePoint y) noexcept;
CircleDistance circle_dist(double x, double y);

/// Exact 2^-128 scaled conversion of an unsigned 128-bit integer.
double fixed_to_double(u128 raw) noexcept;

}  // namespace kflow

namespace kflow {
/// ||x - y|| as an exact multiple of 2^-128; symmetric and subadditive without rounding.
u128 circle_dist_raw(CirclePoint x, CirclePoint y) noexcept;
}  // namespace kflow
