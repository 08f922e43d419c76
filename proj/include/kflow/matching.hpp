#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kflow/fbar.hpp"
#include "kflow/special_flow.hpp"

namespace kflow {

/// Geometry of the matched points at one matched index r:
/// (x_r, y_r) is the time-i_r image of (x, y), (x'_r, y'_r) the time-j_r image
/// of (x', y').
struct MatchedPoint {
  ProductPoint left;
  ProductPoint right;
  double dh1 = 0.0;  ///< d_H(x_r, x'_r)
  double dh2 = 0.0;  ///< d_H(y_r, y'_r)
  double lh = 0.0;   ///< L_H(r)
  double l = 0.0;    ///< L(r)
};

/// Follows both product orbits by time-one steps and records the geometry at
/// every matched pair.
std::vector<MatchedPoint> matched_geometry(const ProductSystem& sys, const Matching& match, const ProductPoint& start,
                                           const ProductPoint& start_prime);

struct StratificationRow {
  int j = 0;
  std::vector<std::size_t> members;
};

struct Stratification {
  std::vector<StratificationRow> rows;      ///< ascending j, nonempty rows only
  std::vector<std::size_t> unassigned;      ///< L(r) >= 2/m
  std::vector<std::size_t> zero_horizontal; ///< L(r) < 2/m but L_H(r) = 0
};

/// The dyadic index j with 2^(-j-1) < v <= 2^(-j); v > 0.
int dyadic_level(double v);

Stratification stratify(const std::vector<MatchedPoint>& trace, int m);

/// Tolerance for "the horizontal distance is unchanged".
inline constexpr double kIsometryTolerance = 1e-12;

/// Both horizontal distances at r equal those at w.
bool isometric(const MatchedPoint& r, const MatchedPoint& w) noexcept;

struct DichotomyViolation {
  double t = 0.0;
  std::int64_t m_t = 0;
  std::int64_t n_t = 0;
  double d0 = 0.0;
  double dt = 0.0;
  FlowPoint z_t;
  FlowPoint zp_t;
};

struct DichotomyReport {
  double w = 0.0;  ///< W = 1 / d_H(z, z')
  double t_max = 0.0;
  std::size_t grid_points = 0;
  std::size_t isometric = 0;
  std::size_t separated = 0;
  double min_ratio = 0.0;  ///< smallest d_H(t) / d_H(0) over separated points (inf if none)
  std::vector<DichotomyViolation> violations;
  bool pass() const noexcept { return violations.empty(); }
};

/// Largest admissible horizon W / log^4 W.
double dichotomy_horizon(double w);

/// Checks on [0, t_max] that either the base iterate counts agree (exact
/// isometry) or the horizontal distance grew by more than 100. The grid is
/// `uniform_points` equispaced times plus every roof crossing of either point
/// and the midpoints between consecutive crossings.
DichotomyReport dichotomy_check(const RoofFunction& f, const Rotation& rot, const FlowPoint& z, const FlowPoint& zp,
                                double t_max, std::size_t uniform_points = 64, double max_distance = 1e-2);

/// #{r : (i_r, j_r) in B((i_w, j_w), window), isometric at r, L(r) < closeness}.
std::size_t count_isometric_close(const Matching& match, const std::vector<MatchedPoint>& trace, std::size_t w,
                                  double window, double closeness);

/// good(T, offset): whether offset lies in the good set G_T.
using GoodSetTest = std::function<bool(double, std::int64_t)>;

struct ClaimWitness {
  double r_w = 0.0;       ///< 1 / L_H(w)
  double short_window = 0.0;  ///< R_w^(1/(1+|g2|) + eps0)
  double long_window = 0.0;   ///< R_w^(1 - eps0)
  bool found_r0 = false;
  bool found_r1 = false;
  std::size_t r0 = 0;
  std::size_t r1 = 0;
  std::size_t candidates_r0 = 0;  ///< annulus members before the good-set test
  std::size_t candidates_r1 = 0;
  std::string reason;
  bool found() const noexcept { return found_r0 && found_r1; }
};

/// r in B(c, outer) but not in B(c, inner).
bool in_annulus(const MatchPair& p, const MatchPair& c, double outer, double inner) noexcept;

/// Searches r1 > r0 > w with (i_r0, j_r0) in the short annulus, i_r0 - i_w in
/// G_short, (i_r1, j_r1) in the long annulus and i_r1 - i_w in G_long.
ClaimWitness claim_witness_search(const Matching& match, const std::vector<MatchedPoint>& trace, std::size_t w,
                                  double eps0, double abs_gamma2, const GoodSetTest& good);

/// Lebesgue measure of the union of arcs [i alpha - rho, i alpha + rho],
/// |i| <= floor(2 C1 R), rho = R^(-1/(1-eps0)), computed on the 2^-128 grid.
double shadow_set_measure(const Rotation& rot, std::int64_t r, double eps0, double c1);

/// 4 C1 R rho + 2 rho.
double shadow_set_bound(std::int64_t r, double eps0, double c1);

}  // namespace kflow
