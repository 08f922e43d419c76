#include "kflow/special_flow.hpp"

#include <cmath>

#include "kflow/error.hpp"

namespace kflow {

namespace {

// Roof value at x + j alpha, naming j on singular contact.
double roof_at(const RoofFunction& f, CirclePoint pt, std::int64_t j) {
  if (pt.is_zero()) throw SingularityError(j);
  return f.eval(pt, Order::value);
}

}  // namespace

bool is_valid(const RoofFunction& f, const FlowPoint& p) {
  if (p.h.is_zero() || !(p.v >= 0.0)) return false;
  return p.v < f.value(p.h);
}

FlowPoint make_flow_point(const RoofFunction& f, CirclePoint h, double v) {
  FlowPoint p{h, v};
  if (!is_valid(f, p)) throw PreconditionError("point violates 0 <= x_v < f(x_h)");
  return p;
}

FlowResult flow(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, double t) {
  if (!std::isfinite(t) || std::abs(t) > kMaxFlowTime)
    throw PrecisionError("flow time exceeds the precision budget");
  const CirclePoint step = rot.step();
  const double target = p.v + t;

  // Seed: S = f^(n)(x_h) at n = round(t / mean).
  std::int64_t n = std::llround(t / f.mean());
  CompensatedSum sum;
  if (n > 0) {
    CirclePoint pt = p.h;
    for (std::int64_t j = 0; j < n; ++j, pt += step) sum.add(roof_at(f, pt, j));
  } else if (n < 0) {
    CirclePoint pt = p.h + step.times(n);
    for (std::int64_t j = n; j < 0; ++j, pt += step) sum.subtract(roof_at(f, pt, j));
  }
  CirclePoint at = p.h + step.times(n);  // base point after n returns

  // S(n+1) = S(n) + f(x_h + n alpha) for every integer n.
  while (sum.value() > target) {
    --n;
    at -= step;
    sum.subtract(roof_at(f, at, n));
  }
  for (;;) {
    double fn = roof_at(f, at, n);
    if (sum.value() + fn > target) break;
    sum.add(fn);
    ++n;
    at += step;
  }

  double v = target - sum.value();
  double top = roof_at(f, at, n);
  while (v >= top) {
    v -= top;
    ++n;
    at += step;
    top = roof_at(f, at, n);
  }
  while (v < 0.0) {
    --n;
    at -= step;
    top = roof_at(f, at, n);
    v += top;
  }
  if (v >= top) v = std::nextafter(top, 0.0);

  FlowResult out;
  out.point = FlowPoint{at, v};
  out.n = n;
  out.boundary_margin = std::min(v, top - v);
  out.near_boundary = out.boundary_margin < kBoundaryTolerance;
  return out;
}

ProductFlowResult flow(const ProductSystem& sys, const ProductPoint& pp, double t) {
  FlowResult a = flow(sys.f1, sys.rot1, pp.first, t);
  FlowResult b = flow(sys.f2, sys.rot2, pp.second, t);
  return {ProductPoint{a.point, b.point}, a.n, b.n};
}

ProductPoint time_one_product(const RoofFunction& f1, const RoofFunction& f2, const Rotation& rot1,
                              const Rotation& rot2, const ProductPoint& pp) {
  return ProductPoint{flow(f1, rot1, pp.first, 1.0).point, flow(f2, rot2, pp.second, 1.0).point};
}

ProductPoint time_one_product(const ProductSystem& sys, const ProductPoint& pp) {
  return time_one_product(sys.f1, sys.f2, sys.rot1, sys.rot2, pp);
}

double flow_distance(const FlowPoint& p, const FlowPoint& q) noexcept {
  return circle_dist(p.h, q.h).value + std::abs(p.v - q.v);
}

double flow_distance(const RoofFunction&, const FlowPoint& p, const FlowPoint& q) noexcept {
  return flow_distance(p, q);
}

PairGeometry pair_geometry(const ProductPoint& a, const ProductPoint& b) noexcept {
  double h1 = circle_dist(a.first.h, b.first.h).value;
  double h2 = circle_dist(a.second.h, b.second.h).value;
  return {std::max(h1, h2), std::max(flow_distance(a.first, b.first), flow_distance(a.second, b.second))};
}

PairGeometry pair_geometry(const RoofFunction&, const RoofFunction&, const ProductPoint& a,
                           const ProductPoint& b) noexcept {
  return pair_geometry(a, b);
}

double unit_uniform(std::mt19937_64& rng) { return std::ldexp(static_cast<double>(rng() >> 11), -53); }

FlowPoint sample_invariant(const RoofFunction& f, std::mt19937_64& rng) {
  for (;;) {
    CirclePoint h = CirclePoint::from_double(f.inverse_cdf(unit_uniform(rng)));
    double u = unit_uniform(rng);
    if (h.is_zero()) continue;
    double top = f.value(h);
    double v = u * top;
    if (v < top) return FlowPoint{h, v};
  }
}

ProductPoint sample_invariant(const ProductSystem& sys, std::mt19937_64& rng) {
  FlowPoint a = sample_invariant(sys.f1, rng);
  FlowPoint b = sample_invariant(sys.f2, rng);
  return {a, b};
}

}  // namespace kflow
