#include "kflow/circle.hpp"

#include <cmath>
#include <stdexcept>

namespace kflow {

double fixed_to_double(u128 raw) noexcept {
  return std::ldexp(static_cast<double>(raw), -128);
}

CirclePoint CirclePoint::from_double(double x) {
  if (!std::isfinite(x)) throw std::invalid_argument("circle coordinate must be finite");
  double frac = x - std::floor(x);
  if (frac >= 1.0) frac = 0.0;
  // frac has at most 53 significant bits, all at positions >= 2^-1074, but
  // only those at >= 2^-128 survive; smaller values are below the grid.
  int exp = 0;
  double mant = std::frexp(frac, &exp);  // frac = mant * 2^exp, mant in [0.5, 1)
  if (mant == 0.0) return CirclePoint();
  auto m53 = static_cast<std::uint64_t>(std::ldexp(mant, 53));
  int shift = 128 - 53 + exp;  // raw = m53 * 2^shift
  if (shift < 0) {
    if (shift <= -64) return CirclePoint();
    return CirclePoint(static_cast<u128>(m53 >> (-shift)));
  }
  return CirclePoint(static_cast<u128>(m53) << shift);
}

double CirclePoint::value() const noexcept { return fixed_to_double(raw_); }

double CirclePoint::complement() const noexcept {
  if (raw_ == 0) return 1.0;
  return fixed_to_double(-raw_);
}

double CirclePoint::norm() const noexcept {
  u128 neg = -raw_;
  return fixed_to_double(raw_ < neg ? raw_ : neg);
}

CircleDistance circle_dist(CirclePoint x, CirclePoint y) noexcept {
  return CircleDistance{(x - y).norm()};
}

CircleDistance circle_dist(double x, double y) {
  return circle_dist(CirclePoint::from_double(x), CirclePoint::from_double(y));
}

}  // namespace kflow

namespace kflow {
u128 circle_dist_raw(CirclePoint x, CirclePoint y) noexcept {
  u128 d = (x - y).raw();
  u128 nd = -d;
  return d < nd ? d : nd;
}
}  // namespace kflow
