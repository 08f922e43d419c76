#include "kflow/roof.hpp"

#include <cmath>

#include "kflow/error.hpp"

namespace kflow {

RoofFunction::RoofFunction(double gamma, double scale)
    : gamma_(gamma), scale_(scale), mean_(2.0 * scale / (1.0 + gamma)) {}

RoofFunction RoofFunction::make(double gamma, bool normalize) {
  if (!(gamma > -1.0 && gamma < 0.0)) throw PreconditionError("gamma must lie in (-1, 0)");
  // int_0^1 x^gamma dx = 1/(1+gamma)
  return RoofFunction(gamma, normalize ? (1.0 + gamma) / 2.0 : 1.0);
}

double RoofFunction::minimum() const noexcept { return 2.0 * scale_ * std::pow(0.5, gamma_); }

double RoofFunction::eval_split(double x, double y, Order order) const {
  switch (order) {
    case Order::value:
      return scale_ * (std::pow(x, gamma_) + std::pow(y, gamma_));
    case Order::first:
      return scale_ * gamma_ * (std::pow(x, gamma_ - 1.0) - std::pow(y, gamma_ - 1.0));
    case Order::second:
      return scale_ * gamma_ * (gamma_ - 1.0) * (std::pow(x, gamma_ - 2.0) + std::pow(y, gamma_ - 2.0));
  }
  return 0.0;
}

double RoofFunction::eval(double x, Order order) const {
  if (!(x > 0.0 && x < 1.0)) throw PreconditionError("roof is evaluated on (0,1) only");
  return eval_split(x, 1.0 - x, order);
}

double RoofFunction::value(double x) const { return eval(x, Order::value); }
double RoofFunction::derivative(double x) const { return eval(x, Order::first); }
double RoofFunction::second_derivative(double x) const { return eval(x, Order::second); }

double RoofFunction::eval(CirclePoint x, Order order) const {
  if (x.is_zero()) throw SingularityError(0);
  return eval_split(x.value(), x.complement(), order);
}

double RoofFunction::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double e = 1.0 + gamma_;
  // int_0^x f / mean = (x^e + 1 - (1-x)^e) / 2
  return 0.5 * (std::pow(x, e) + 1.0 - std::pow(1.0 - x, e));
}

double RoofFunction::inverse_cdf(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (cdf(mid) < u ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

BirkhoffSum birkhoff_sum(const RoofFunction& f, const Rotation& rot, CirclePoint x, std::int64_t n,
                         Order order) {
  if (n > kMaxOrbitIndex || n < -kMaxOrbitIndex)
    throw PrecisionError("Birkhoff length " + std::to_string(n) + " exceeds the precision budget");
  BirkhoffSum out;
  out.n = n;
  if (n == 0) return out;

  std::int64_t first = n > 0 ? 0 : n;
  std::int64_t last = n > 0 ? n : 0;  // exclusive
  CirclePoint pt = x + rot.step().times(first);
  CompensatedSum acc;
  u128 best = ~u128{0};
  for (std::int64_t j = first; j < last; ++j, pt += rot.step()) {
    if (pt.is_zero()) throw SingularityError(j);
    u128 d = circle_dist_raw(pt, CirclePoint());
    if (d < best) {
      best = d;
      out.argmin = j;
    }
    acc.add(f.eval(pt, order));
  }
  out.min_distance = CircleDistance{fixed_to_double(best)};
  out.value = n > 0 ? acc.value() : -acc.value();
  return out;
}

}  // namespace kflow
