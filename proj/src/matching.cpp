#include "kflow/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kflow/error.hpp"

namespace kflow {

std::vector<MatchedPoint> matched_geometry(const ProductSystem& sys, const Matching& match, const ProductPoint& start,
                                           const ProductPoint& start_prime) {
  std::vector<MatchedPoint> out;
  out.reserve(match.cardinality());
  ProductPoint a = start, b = start_prime;
  std::int64_t ta = 0, tb = 0;
  for (const auto& p : match.pairs) {
    if (p.i < ta || p.j < tb) throw PreconditionError("matching is not monotone");
    for (; ta < p.i; ++ta) a = time_one_product(sys, a);
    for (; tb < p.j; ++tb) b = time_one_product(sys, b);
    MatchedPoint mp;
    mp.left = a;
    mp.right = b;
    mp.dh1 = circle_dist(a.first.h, b.first.h).value;
    mp.dh2 = circle_dist(a.second.h, b.second.h).value;
    PairGeometry g = pair_geometry(a, b);
    mp.lh = g.horizontal;
    mp.l = g.full;
    out.push_back(mp);
  }
  return out;
}

int dyadic_level(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError("dyadic level needs a positive finite value");
  int e = 0;
  double mant = std::frexp(v, &e);  // v = mant 2^e, mant in [1/2, 1)
  return mant == 0.5 ? 1 - e : -e;
}

Stratification stratify(const std::vector<MatchedPoint>& trace, int m) {
  if (m < 1) throw PreconditionError("m must be positive");
  Stratification s;
  const double cut = 2.0 / m;
  std::vector<std::pair<int, std::size_t>> tagged;
  for (std::size_t r = 0; r < trace.size(); ++r) {
    if (!(trace[r].l < cut)) {
      s.unassigned.push_back(r);
    } else if (trace[r].lh == 0.0) {
      s.zero_horizontal.push_back(r);
    } else {
      tagged.emplace_back(dyadic_level(trace[r].lh), r);
    }
  }
  std::stable_sort(tagged.begin(), tagged.end(), [](auto& x, auto& y) { return x.first < y.first; });
  for (auto& [j, r] : tagged) {
    if (s.rows.empty() || s.rows.back().j != j) s.rows.push_back({j, {}});
    s.rows.back().members.push_back(r);
  }
  return s;
}

bool isometric(const MatchedPoint& r, const MatchedPoint& w) noexcept {
  return std::abs(r.dh1 - w.dh1) <= kIsometryTolerance && std::abs(r.dh2 - w.dh2) <= kIsometryTolerance;
}

double dichotomy_horizon(double w) {
  double lw = std::log(w);
  return w / (lw * lw * lw * lw);
}

namespace {

// Flow times in (0, t_max] at which p reaches the roof.
std::vector<double> crossing_times(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, double t_max) {
  std::vector<double> out;
  CompensatedSum acc;
  acc.add(-p.v);
  CirclePoint x = p.h;
  for (std::int64_t k = 0; k < kMaxOrbitIndex; ++k) {
    if (x.is_zero()) throw SingularityError(k);
    acc.add(f.value(x));
    double tau = acc.value();
    if (tau > t_max) break;
    if (tau > 0.0) out.push_back(tau);
    x += rot.step();
  }
  return out;
}

}  // namespace

DichotomyReport dichotomy_check(const RoofFunction& f, const Rotation& rot, const FlowPoint& z, const FlowPoint& zp,
                                double t_max, std::size_t uniform_points, double max_distance) {
  DichotomyReport rep;
  rep.t_max = t_max;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  if (!(t_max >= 0.0)) throw PreconditionError("t_max must be nonnegative");
  const u128 d0_raw = circle_dist_raw(z.h, zp.h);
  const double d0 = circle_dist(z.h, zp.h).value;
  rep.w = d0 > 0.0 ? 1.0 / d0 : std::numeric_limits<double>::infinity();
  if (d0 > max_distance) throw PreconditionError("points too far apart for the dichotomy");
  if (d0 > 0.0 && t_max > dichotomy_horizon(rep.w) * (1.0 + 1e-12))
    throw PreconditionError("t_max exceeds W / log^4 W");

  std::vector<double> times;
  for (std::size_t k = 0; k < uniform_points; ++k)
    times.push_back(uniform_points == 1 ? 0.0
                                        : t_max * static_cast<double>(k) / static_cast<double>(uniform_points - 1));
  std::vector<double> cuts{0.0, t_max};
  for (double tau : crossing_times(f, rot, z, t_max)) cuts.push_back(tau);
  for (double tau : crossing_times(f, rot, zp, t_max)) cuts.push_back(tau);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    times.push_back(cuts[k]);
    if (k + 1 < cuts.size()) times.push_back(0.5 * (cuts[k] + cuts[k + 1]));
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  for (double t : times) {
    FlowResult a = flow(f, rot, z, t);
    FlowResult b = flow(f, rot, zp, t);
    ++rep.grid_points;
    if (a.n == b.n && circle_dist_raw(a.point.h, b.point.h) == d0_raw) {
      ++rep.isometric;
      continue;
    }
    double dt = circle_dist(a.point.h, b.point.h).value;
    if (dt > 100.0 * d0) {
      ++rep.separated;
      rep.min_ratio = std::min(rep.min_ratio, dt / d0);
      continue;
    }
    rep.violations.push_back({t, a.n, b.n, d0, dt, a.point, b.point});
  }
  return rep;
}

std::size_t count_isometric_close(const Matching& match, const std::vector<MatchedPoint>& trace, std::size_t w,
                                  double window, double closeness) {
  if (trace.size() != match.cardinality()) throw PreconditionError("trace does not follow the matching");
  std::size_t count = 0;
  for (std::size_t r : matching_ball(match, w, window))
    if (isometric(trace[r], trace[w]) && trace[r].l < closeness) ++count;
  return count;
}

bool in_annulus(const MatchPair& p, const MatchPair& c, double outer, double inner) noexcept {
  double di = std::abs(static_cast<double>(p.i - c.i)), dj = std::abs(static_cast<double>(p.j - c.j));
  bool in_outer = di <= outer && dj <= outer;
  bool in_inner = di <= inner && dj <= inner;
  return in_outer && !in_inner;
}

ClaimWitness claim_witness_search(const Matching& match, const std::vector<MatchedPoint>& trace, std::size_t w,
                                  double eps0, double abs_gamma2, const GoodSetTest& good) {
  if (trace.size() != match.cardinality()) throw PreconditionError("trace does not follow the matching");
  if (w >= match.cardinality()) throw PreconditionError("w outside the matching");
  ClaimWitness cw;
  double lh = trace[w].lh;
  if (!(lh > 0.0)) {
    cw.reason = "L_H(w) = 0";
    return cw;
  }
  cw.r_w = 1.0 / lh;
  double lr = std::log(cw.r_w);
  cw.short_window = std::pow(cw.r_w, 1.0 / (1.0 + abs_gamma2) + eps0);
  cw.long_window = std::pow(cw.r_w, 1.0 - eps0);
  const double short_inner = 0.5 * cw.short_window / (lr * lr);
  const double long_inner = 0.5 * cw.long_window / (lr * lr);
  if (w + 1 >= match.cardinality()) {
    cw.reason = "no matched pairs after w";
    return cw;
  }
  if (cw.short_window < 1.0 || cw.long_window < 1.0) {
    cw.reason = "window below 1, annulus empty";
    return cw;
  }
  const MatchPair c = match.pairs[w];
  auto search = [&](std::size_t from, double outer, double inner, std::size_t& cand, std::size_t& hit) {
    for (std::size_t r = from; r < match.cardinality(); ++r) {
      const auto& p = match.pairs[r];
      if (static_cast<double>(p.i - c.i) > outer) break;
      if (!in_annulus(p, c, outer, inner)) continue;
      ++cand;
      if (good(outer, p.i - c.i)) {
        hit = r;
        return true;
      }
    }
    return false;
  };
  cw.found_r0 = search(w + 1, cw.short_window, short_inner, cw.candidates_r0, cw.r0);
  if (!cw.found_r0) {
    cw.reason = cw.candidates_r0 == 0 ? "short annulus holds no matched pair" : "no short-annulus pair in G";
    return cw;
  }
  cw.found_r1 = search(cw.r0 + 1, cw.long_window, long_inner, cw.candidates_r1, cw.r1);
  if (!cw.found_r1)
    cw.reason = cw.candidates_r1 == 0 ? "long annulus holds no matched pair after r0" : "no long-annulus pair in G";
  return cw;
}

namespace {

u128 to_fixed(double x) {  // x in [0, 1/2)
  double hi = std::ldexp(x, 64);
  auto h = static_cast<std::uint64_t>(hi);
  auto l = static_cast<std::uint64_t>(std::ldexp(hi - static_cast<double>(h), 64));
  return (static_cast<u128>(h) << 64) | l;
}

}  // namespace

double shadow_set_measure(const Rotation& rot, std::int64_t r, double eps0, double c1) {
  if (r < 2) throw PreconditionError("R must be >= 2");
  if (!(eps0 >= 0.0 && eps0 < 1.0) || !(c1 > 0.0)) throw PreconditionError("bad eps0 or C1");
  const double rho = std::pow(static_cast<double>(r), -1.0 / (1.0 - eps0));
  if (rho >= 0.5) return 1.0;
  const auto k = static_cast<std::int64_t>(std::floor(2.0 * c1 * static_cast<double>(r)));
  if (k > (std::int64_t{1} << 26)) throw PreconditionError("too many arcs");
  std::vector<u128> centres;
  centres.reserve(static_cast<std::size_t>(2 * k + 1));
  for (std::int64_t i = -k; i <= k; ++i) centres.push_back(rot.step().times(i).raw());
  std::sort(centres.begin(), centres.end());
  const u128 len = to_fixed(rho) * 2;
  if (centres.size() == 1) return fixed_to_double(len);
  // union of equal arcs = sum over neighbouring centres of min(gap, arc length)
  u128 total = 0;
  bool covered = true;
  for (std::size_t s = 0; s < centres.size(); ++s) {
    u128 gap = centres[(s + 1) % centres.size()] - centres[s];  // wraps for the last gap
    if (gap > len) covered = false;
    total += std::min(gap, len);
  }
  return covered ? 1.0 : fixed_to_double(total);
}

double shadow_set_bound(std::int64_t r, double eps0, double c1) {
  const double rho = std::pow(static_cast<double>(r), -1.0 / (1.0 - eps0));
  return (4.0 * c1 * static_cast<double>(r) + 2.0) * rho;
}

}  // namespace kflow
