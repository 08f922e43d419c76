#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kflow/roof.hpp"
#include "kflow/rotation.hpp"
#include "kflow/special_flow.hpp"

namespace kflow {

/// One side of an inequality lhs <= rhs; margin = rhs - lhs.
struct InequalityRow {
  std::string side;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  double margin = 0.0;
};

InequalityRow make_row(std::string side, double lhs, double rhs);

/// Denjoy-Koksma bounds for the Birkhoff sums of f, f', f'' along
/// z, z + alpha, ..., z + (M-1) alpha with q_s <= |M| <= q_{s+1}:
///
///   DK1  f(z_min) + q_s/3 <= f^(M)(z) <= f(z_min) + 3 q_{s+1}
///   DK2  |f'(z_min)| - 8|g| q_s^{1+|g|} <= |f'^(M)(z)| <= |f'(z_min)| + 8|g| q_{s+1}^{1+|g|}
///   DK3  f''(z_min) <= f''^(M)(z) <= f''(z_min) + 8|g(g-1)| q_{s+1}^{2+|g|}
///
/// f(z_min) is f at the orbit point closest to 0. `slack` divides the lower
/// constant 1/3 and multiplies 3, 8|g| and 8|g(g-1)|. Negative M is checked on
/// the magnitude of the sum, i.e. on f^(|M|)(z + M alpha).
struct DkReport {
  CirclePoint z;
  std::int64_t m = 0;
  int s = 0;
  std::uint64_t q_s = 0;
  std::uint64_t q_next = 0;
  double slack = 1.0;
  CircleDistance z_min;
  std::int64_t argmin = 0;
  /// q_s == 1: the lower DK1 bound cannot hold for a single term.
  bool degenerate = false;
  std::array<InequalityRow, 6> rows;

  bool all_pass() const;
};

DkReport dk_bounds_check(const RoofFunction& f, const Rotation& rot, CirclePoint z, std::int64_t m,
                         double slack = 1.0);

/// Largest s >= 1 with q_s <= |m| <= q_{s+1}; throws when |m| > q_depth.
int denominator_bracket(const Rotation& rot, std::int64_t m);

/// Membership in S_n: the orbit of p over t in [-q_n log q_n, q_n log q_n]
/// leaves the strip ||x_h|| <= 1/(q_n log^3 q_n). The base coordinate only
/// changes at returns, so the base points x_h + k alpha, N(p,-T) <= k <= N(p,T),
/// are checked exactly.
bool s_set_membership(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, int n);

/// Exponent P = 100 / |gamma| of the logarithmic slack in W_t.
double w_exponent(const RoofFunction& f);

/// Membership in W_t: |f'^(N)(p_h)| >= |N|^{1+|g|} / log^P |N| with N = N(p,t).
/// For |N| = 1 the threshold is undefined and membership means f'(p_h) != 0.
/// Throws PreconditionError when N(p,t) = 0.
bool w_t_membership(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, double t);

struct GoodSetOptions {
  double horizon = 1000.0;  ///< T
  int samples = 200;
  std::uint64_t seed = 1;
  /// Grid spacing in units of the roof mean; ignored when grid_points > 0.
  double step_in_means = 0.25;
  /// Explicit number of grid points on [-T, T] (1 means t = 0 only).
  int grid_points = 0;
};

struct GoodSetEstimate {
  std::vector<double> fractions;  ///< per sample, fraction of grid t with z in W_t
  double mean = 0.0;
  double min = 0.0;
  double median = 0.0;
  double bound = 0.0;  ///< 1 - log^-3 T
  int samples_above_bound = 0;
  std::int64_t grid_size = 0;
  std::int64_t zero_crossing_count = 0;  ///< grid t with N = 0, counted as non-members
  std::int64_t singular_count = 0;       ///< grid t lost to singular contact
};

/// Monte-Carlo estimate of lambda{t in [-T,T] : z in W_t} / 2T over points z
/// drawn from the invariant measure.
GoodSetEstimate estimate_good_set_measure(const RoofFunction& f, const Rotation& rot,
                                          const GoodSetOptions& opts);

struct NLowerBoundReport {
  double t = 0.0;
  std::int64_t n = 0;    ///< N(p, t)
  double bound = 0.0;    ///< t / log^5 t
  int relevant_index = 0;
  bool precondition_met = false;
  /// Only meaningful when precondition_met.
  bool pass = false;
  double margin = 0.0;
};

/// N(p,t) >= t / log^5 t for points of S_n, n the least index with
/// q_n log q_n >= t. Unmet preconditions are reported, not asserted.
NLowerBoundReport n_lower_bound_check(const RoofFunction& f, const Rotation& rot, const FlowPoint& p,
                                      double t);

struct SandwichSide {
  std::int64_t n = 0;
  double lower = 0.0;  ///< t^{1+|g|-eps2}
  double value = 0.0;  ///< |f'^(N)(theta_h)|
  double upper = 0.0;  ///< t^{1+|g|+eps2}
  bool pass = false;
};

struct SandwichReport {
  double t = 0.0;
  bool out_of_range = false;  ///< t < 1
  SandwichSide first;
  SandwichSide second;
  bool pass() const { return !out_of_range && first.pass && second.pass; }
};

/// Both derivative chains t^{1+|g_i|-eps2} <= |f_i'^(N_i)(.)| <= t^{1+|g_i|+eps2}
/// at theta_h = x_h + perturbation and xi_h = y_h + perturbation, with N_1 =
/// N(x,t), N_2 = M(y,t). Requires t <= horizon and |perturbation| <=
/// (horizon log^{2P} horizon)^-1.
SandwichReport derivative_sandwich_check(const ProductSystem& sys, const FlowPoint& x, const FlowPoint& y,
                                         double t, double horizon, double eps2, double perturbation = 0.0);

struct SandwichSweep {
  std::int64_t grid_size = 0;
  std::int64_t passes = 0;
  double pass_fraction = 0.0;
  double allowance = 0.0;  ///< 1 - 4 log^-3 T
};

/// Pass fraction of derivative_sandwich_check over a uniform grid of
/// `grid_size` times in [0, T] (perturbation 0).
SandwichSweep sandwich_sweep(const ProductSystem& sys, const FlowPoint& x, const FlowPoint& y, double horizon,
                             double eps2, std::int64_t grid_size);

/// Cumulative Birkhoff sums of f and f' along x_h + n alpha for n in [lo, hi].
class OrbitLedger {
 public:
  OrbitLedger(const RoofFunction& f, const Rotation& rot, CirclePoint base, std::int64_t lo, std::int64_t hi);
  /// Ledger covering every N(p, t) for t in [t_lo, t_hi].
  static OrbitLedger covering(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, double t_lo,
                              double t_hi);

  std::int64_t lo() const noexcept { return lo_; }
  std::int64_t hi() const noexcept { return hi_; }
  /// f^(n)(base)
  double sum(std::int64_t n) const;
  /// f'^(n)(base)
  double derivative_sum(std::int64_t n) const;
  /// Largest n in [lo, hi] with sum(n) <= level.
  std::int64_t crossings(double level) const;

 private:
  std::int64_t lo_ = 0;
  std::int64_t hi_ = 0;
  std::vector<double> sums_;
  std::vector<double> derivs_;
};

}  // namespace kflow
