#pragma once

#include <cstdint>
#include <random>

#include "kflow/circle.hpp"
#include "kflow/roof.hpp"
#include "kflow/rotation.hpp"

namespace kflow {

/// A point (x_h, x_v) of the space under the roof: 0 <= x_v < f(x_h).
struct FlowPoint {
  CirclePoint h;
  double v = 0.0;
  bool operator==(const FlowPoint&) const = default;
};

struct ProductPoint {
  FlowPoint first;
  FlowPoint second;
  bool operator==(const ProductPoint&) const = default;
};

/// Horizontal and full distances between two product points (max over the
/// two factors).
struct PairGeometry {
  double horizontal = 0.0;  ///< L_H
  double full = 0.0;        ///< L
};

/// Largest |t| accepted by flow().
inline constexpr double kMaxFlowTime = 1e9;
/// Distance to a fibre boundary below which a flow result is flagged.
inline constexpr double kBoundaryTolerance = 1e-12;

struct FlowResult {
  FlowPoint point;
  /// N(p, t): the unique integer with f^(N)(x_h) <= x_v + t < f^(N+1)(x_h).
  std::int64_t n = 0;
  /// min(x_v', f(x_h') - x_v') of the returned point.
  double boundary_margin = 0.0;
  bool near_boundary = false;
};

/// Checks the vertical invariant; throws PreconditionError otherwise.
FlowPoint make_flow_point(const RoofFunction& f, CirclePoint h, double v);
bool is_valid(const RoofFunction& f, const FlowPoint& p);

/// The special flow T_t(x_h, x_v) = (x_h + N alpha, x_v + t - f^(N)(x_h)).
///
/// N is found by a walk seeded at round(t / mean). The vertical coordinate is
/// re-normalised against f at the returned base point, so the result always
/// satisfies 0 <= x_v < f(x_h).
FlowResult flow(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, double t);

/// Two roofs over two rotations; the product of two special flows.
struct ProductSystem {
  RoofFunction f1;
  RoofFunction f2;
  Rotation rot1;
  Rotation rot2;
};

struct ProductFlowResult {
  ProductPoint point;
  std::int64_t n_first = 0;
  std::int64_t n_second = 0;
};

ProductFlowResult flow(const ProductSystem& sys, const ProductPoint& pp, double t);
ProductPoint time_one_product(const RoofFunction& f1, const RoofFunction& f2, const Rotation& rot1,
                              const Rotation& rot2, const ProductPoint& pp);
ProductPoint time_one_product(const ProductSystem& sys, const ProductPoint& pp);

/// d^f(p, q) = ||p_h - q_h|| + |p_v - q_v|.
double flow_distance(const FlowPoint& p, const FlowPoint& q) noexcept;
double flow_distance(const RoofFunction& f, const FlowPoint& p, const FlowPoint& q) noexcept;

PairGeometry pair_geometry(const ProductPoint& a, const ProductPoint& b) noexcept;
PairGeometry pair_geometry(const RoofFunction& f1, const RoofFunction& f2, const ProductPoint& a,
                           const ProductPoint& b) noexcept;

/// Uniform double in [0,1) from 53 random bits; identical on every platform.
double unit_uniform(std::mt19937_64& rng);

/// Draws a point from the normalised invariant measure: base coordinate with
/// density f / mean (inverse distribution function), vertical uniform in [0, f).
FlowPoint sample_invariant(const RoofFunction& f, std::mt19937_64& rng);
ProductPoint sample_invariant(const ProductSystem& sys, std::mt19937_64& rng);

}  // namespace kflow
