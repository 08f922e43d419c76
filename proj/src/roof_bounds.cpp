#include "kflow/roof_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kflow/error.hpp"

namespace kflow {

InequalityRow make_row(std::string side, double lhs, double rhs) {
  return InequalityRow{std::move(side), lhs, rhs, lhs <= rhs, rhs - lhs};
}

bool DkReport::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const InequalityRow& r) { return r.pass; });
}

int denominator_bracket(const Rotation& rot, std::int64_t m) {
  if (m == 0) throw PreconditionError("M must be nonzero");
  auto mag = static_cast<std::uint64_t>(m < 0 ? -m : m);
  if (mag > rot.q(rot.depth()))
    throw PreconditionError("|M| = " + std::to_string(mag) + " exceeds the largest stored denominator");
  int s = 1;
  for (int k = 1; k < rot.depth(); ++k)
    if (rot.q(k) <= mag) s = k;
  return s;
}

DkReport dk_bounds_check(const RoofFunction& f, const Rotation& rot, CirclePoint z, std::int64_t m,
                         double slack) {
  if (!(slack >= 1.0)) throw PreconditionError("slack must be >= 1");
  DkReport rep;
  rep.z = z;
  rep.m = m;
  rep.slack = slack;
  rep.s = denominator_bracket(rot, m);
  rep.q_s = rot.q(rep.s);
  rep.q_next = rot.q(rep.s + 1);
  rep.degenerate = rep.q_s == 1;

  // For M < 0 the summed points are z + M alpha, ..., z - alpha.
  std::int64_t len = m < 0 ? -m : m;
  CirclePoint start = m < 0 ? orbit_point(rot, z, m).point : z;
  BirkhoffSum s0 = birkhoff_sum(f, rot, start, len, Order::value);
  BirkhoffSum s1 = birkhoff_sum(f, rot, start, len, Order::first);
  BirkhoffSum s2 = birkhoff_sum(f, rot, start, len, Order::second);
  rep.z_min = s0.min_distance;
  rep.argmin = m < 0 ? s0.argmin + m : s0.argmin;

  CirclePoint closest = orbit_point(rot, start, s0.argmin).point;
  double f0 = f.eval(closest, Order::value);
  double f1 = std::abs(f.eval(closest, Order::first));
  double f2 = f.eval(closest, Order::second);

  const double g = f.abs_gamma();
  const double qs = static_cast<double>(rep.q_s);
  const double qn = static_cast<double>(rep.q_next);
  const double c2 = 8.0 * g * slack;
  const double c3 = 8.0 * std::abs(f.gamma() * (f.gamma() - 1.0)) * slack;

  rep.rows[0] = make_row("DK1.lower", f0 + qs / (3.0 * slack), s0.value);
  rep.rows[1] = make_row("DK1.upper", s0.value, f0 + 3.0 * slack * qn);
  rep.rows[2] = make_row("DK2.lower", f1 - c2 * std::pow(qs, 1.0 + g), std::abs(s1.value));
  rep.rows[3] = make_row("DK2.upper", std::abs(s1.value), f1 + c2 * std::pow(qn, 1.0 + g));
  rep.rows[4] = make_row("DK3.lower", f2, s2.value);
  rep.rows[5] = make_row("DK3.upper", s2.value, f2 + c3 * std::pow(qn, 2.0 + g));
  return rep;
}

bool s_set_membership(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, int n) {
  const double q = static_cast<double>(rot.q(n));
  const double lq = std::log(q);
  const double strip_factor = q * lq * lq * lq;
  if (!(strip_factor > 2.0))
    throw PreconditionError("q_n log^3 q_n must exceed 2 (strip narrower than the circle)");
  const double half_width = 1.0 / strip_factor;
  const double window = q * lq;

  if (p.h.norm() > half_width) return true;
  std::int64_t lo = flow(f, rot, p, -window).n;
  std::int64_t hi = flow(f, rot, p, window).n;
  CirclePoint pt = orbit_point(rot, p.h, lo).point;
  for (std::int64_t k = lo; k <= hi; ++k, pt += rot.step())
    if (pt.norm() > half_width) return true;
  return false;
}

double w_exponent(const RoofFunction& f) { return 100.0 / f.abs_gamma(); }

namespace {

bool w_criterion(const RoofFunction& f, std::int64_t n, double derivative_sum) {
  if (n == 0) throw PreconditionError("W_t membership needs N(p,t) != 0");
  double mag = std::abs(derivative_sum);
  if (n == 1 || n == -1) return mag > 0.0;
  // Compare in logs: log|D| >= (1+|g|) log|N| - P log log|N|.
  double ln = std::log(static_cast<double>(n < 0 ? -n : n));
  if (mag == 0.0) return false;
  double rhs = (1.0 + f.abs_gamma()) * ln - w_exponent(f) * std::log(ln);
  return std::log(mag) >= rhs;
}

}  // namespace

bool w_t_membership(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, double t) {
  std::int64_t n = flow(f, rot, p, t).n;
  if (n == 0) throw PreconditionError("W_t membership needs N(p,t) != 0");
  return w_criterion(f, n, birkhoff_sum(f, rot, p.h, n, Order::first).value);
}

OrbitLedger::OrbitLedger(const RoofFunction& f, const Rotation& rot, CirclePoint base, std::int64_t lo,
                         std::int64_t hi)
    : lo_(lo), hi_(hi) {
  if (lo > 0 || hi < 0) throw PreconditionError("ledger range must contain 0");
  auto size = static_cast<std::size_t>(hi - lo + 1);
  sums_.assign(size, 0.0);
  derivs_.assign(size, 0.0);
  const auto zero = static_cast<std::size_t>(-lo);
  CompensatedSum s, d;
  CirclePoint pt = base;
  for (std::int64_t n = 0; n < hi; ++n, pt += rot.step()) {
    if (pt.is_zero()) throw SingularityError(n);
    s.add(f.eval(pt, Order::value));
    d.add(f.eval(pt, Order::first));
    sums_[zero + static_cast<std::size_t>(n + 1)] = s.value();
    derivs_[zero + static_cast<std::size_t>(n + 1)] = d.value();
  }
  CompensatedSum sb, db;
  pt = base;
  for (std::int64_t n = 0; n > lo; --n) {
    pt -= rot.step();
    if (pt.is_zero()) throw SingularityError(n - 1);
    sb.subtract(f.eval(pt, Order::value));
    db.subtract(f.eval(pt, Order::first));
    sums_[zero - static_cast<std::size_t>(1 - n)] = sb.value();
    derivs_[zero - static_cast<std::size_t>(1 - n)] = db.value();
  }
}

OrbitLedger OrbitLedger::covering(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, double t_lo,
                                  double t_hi) {
  std::int64_t lo = std::min<std::int64_t>(0, flow(f, rot, p, t_lo).n - 1);
  std::int64_t hi = std::max<std::int64_t>(0, flow(f, rot, p, t_hi).n + 1);
  return OrbitLedger(f, rot, p.h, lo, hi);
}

double OrbitLedger::sum(std::int64_t n) const {
  if (n < lo_ || n > hi_) throw PreconditionError("ledger index out of range");
  return sums_[static_cast<std::size_t>(n - lo_)];
}

double OrbitLedger::derivative_sum(std::int64_t n) const {
  if (n < lo_ || n > hi_) throw PreconditionError("ledger index out of range");
  return derivs_[static_cast<std::size_t>(n - lo_)];
}

std::int64_t OrbitLedger::crossings(double level) const {
  auto it = std::upper_bound(sums_.begin(), sums_.end(), level);
  if (it == sums_.begin() || it == sums_.end())
    throw PreconditionError("level outside the ledger range");
  return lo_ + static_cast<std::int64_t>(it - sums_.begin()) - 1;
}

GoodSetEstimate estimate_good_set_measure(const RoofFunction& f, const Rotation& rot, const GoodSetOptions& opts) {
  if (!(opts.horizon >= 3.0)) throw PreconditionError("T must be >= 3");
  if (opts.samples < 1) throw PreconditionError("samples must be >= 1");
  const double horizon = opts.horizon;
  std::vector<double> grid;
  if (opts.grid_points == 1) {
    grid.push_back(0.0);
  } else if (opts.grid_points > 1) {
    for (int k = 0; k < opts.grid_points; ++k)
      grid.push_back(-horizon + 2.0 * horizon * k / (opts.grid_points - 1));
  } else {
    if (!(opts.step_in_means > 0)) throw PreconditionError("grid step must be positive");
    const double step = opts.step_in_means * f.mean();
    auto count = static_cast<std::int64_t>(std::floor(2.0 * horizon / step)) + 1;
    for (std::int64_t k = 0; k < count; ++k) grid.push_back(-horizon + step * static_cast<double>(k));
  }

  GoodSetEstimate est;
  est.grid_size = static_cast<std::int64_t>(grid.size());
  est.bound = 1.0 - std::pow(std::log(horizon), -3.0);
  std::mt19937_64 rng(opts.seed);
  for (int s = 0; s < opts.samples; ++s) {
    FlowPoint z = sample_invariant(f, rng);
    std::int64_t members = 0;
    try {
      OrbitLedger ledger = OrbitLedger::covering(f, rot, z, -horizon, horizon);
      for (double t : grid) {
        std::int64_t n = ledger.crossings(z.v + t);
        if (n == 0) {
          ++est.zero_crossing_count;
          continue;
        }
        if (w_criterion(f, n, ledger.derivative_sum(n))) ++members;
      }
    } catch (const SingularityError&) {
      est.singular_count += est.grid_size;
    }
    est.fractions.push_back(static_cast<double>(members) / static_cast<double>(est.grid_size));
  }
  std::vector<double> sorted = est.fractions;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double v : sorted) total += v;
  est.mean = total / static_cast<double>(sorted.size());
  est.min = sorted.front();
  est.median = sorted[sorted.size() / 2];
  est.samples_above_bound =
      static_cast<int>(std::count_if(sorted.begin(), sorted.end(), [&](double v) { return v >= est.bound; }));
  return est;
}

NLowerBoundReport n_lower_bound_check(const RoofFunction& f, const Rotation& rot, const FlowPoint& p, double t) {
  if (!(t > std::exp(1.0))) throw PreconditionError("t must exceed e");
  NLowerBoundReport rep;
  rep.t = t;
  for (int n = 1; n <= rot.depth(); ++n) {
    double q = static_cast<double>(rot.q(n));
    double lq = std::log(q);
    if (q * lq >= t && q * lq * lq * lq > 2.0) {
      rep.relevant_index = n;
      break;
    }
  }
  if (rep.relevant_index == 0)
    throw PreconditionError("rotation has no denominator with q log q >= t; expand deeper");
  rep.precondition_met = s_set_membership(f, rot, p, rep.relevant_index);
  rep.n = flow(f, rot, p, t).n;
  double lt = std::log(t);
  rep.bound = t / std::pow(lt, 5.0);
  rep.margin = static_cast<double>(rep.n) - rep.bound;
  rep.pass = rep.margin >= 0.0;
  return rep;
}

namespace {

void check_perturbation(const RoofFunction& f, double horizon, double perturbation) {
  if (perturbation == 0.0) return;
  if (!(horizon > std::exp(1.0))) throw PreconditionError("perturbation bound needs T > e");
  double limit_log = -(std::log(horizon) + 2.0 * w_exponent(f) * std::log(std::log(horizon)));
  if (std::log(std::abs(perturbation)) > limit_log)
    throw PreconditionError("perturbation exceeds (T log^{2P} T)^-1");
}

SandwichSide evaluate_side(const RoofFunction& f, double t, double eps2, std::int64_t n, double derivative) {
  SandwichSide side;
  side.n = n;
  side.value = std::abs(derivative);
  side.lower = std::pow(t, 1.0 + f.abs_gamma() - eps2);
  side.upper = std::pow(t, 1.0 + f.abs_gamma() + eps2);
  side.pass = side.lower <= side.value && side.value <= side.upper;
  return side;
}

}  // namespace

SandwichReport derivative_sandwich_check(const ProductSystem& sys, const FlowPoint& x, const FlowPoint& y,
                                         double t, double horizon, double eps2, double perturbation) {
  if (!(t <= horizon)) throw PreconditionError("t must not exceed T");
  if (!(eps2 >= 0.0)) throw PreconditionError("eps2 must be nonnegative");
  check_perturbation(sys.f1, horizon, perturbation);
  check_perturbation(sys.f2, horizon, perturbation);
  SandwichReport rep;
  rep.t = t;
  if (t < 1.0) {
    rep.out_of_range = true;
    return rep;
  }
  const CirclePoint shift = CirclePoint::from_double(perturbation);
  std::int64_t n1 = flow(sys.f1, sys.rot1, x, t).n;
  std::int64_t n2 = flow(sys.f2, sys.rot2, y, t).n;
  double d1 = birkhoff_sum(sys.f1, sys.rot1, x.h + shift, n1, Order::first).value;
  double d2 = birkhoff_sum(sys.f2, sys.rot2, y.h + shift, n2, Order::first).value;
  rep.first = evaluate_side(sys.f1, t, eps2, n1, d1);
  rep.second = evaluate_side(sys.f2, t, eps2, n2, d2);
  return rep;
}

SandwichSweep sandwich_sweep(const ProductSystem& sys, const FlowPoint& x, const FlowPoint& y, double horizon,
                             double eps2, std::int64_t grid_size) {
  if (grid_size < 1) throw PreconditionError("grid size must be >= 1");
  OrbitLedger lx = OrbitLedger::covering(sys.f1, sys.rot1, x, 0.0, horizon);
  OrbitLedger ly = OrbitLedger::covering(sys.f2, sys.rot2, y, 0.0, horizon);
  SandwichSweep out;
  out.grid_size = grid_size;
  out.allowance = 1.0 - 4.0 * std::pow(std::log(horizon), -3.0);
  for (std::int64_t k = 0; k < grid_size; ++k) {
    double t = horizon * (static_cast<double>(k) + 0.5) / static_cast<double>(grid_size);
    if (t < 1.0) continue;
    std::int64_t n1 = lx.crossings(x.v + t);
    std::int64_t n2 = ly.crossings(y.v + t);
    SandwichSide a = evaluate_side(sys.f1, t, eps2, n1, lx.derivative_sum(n1));
    SandwichSide b = evaluate_side(sys.f2, t, eps2, n2, ly.derivative_sum(n2));
    if (a.pass && b.pass) ++out.passes;
  }
  out.pass_fraction = static_cast<double>(out.passes) / static_cast<double>(grid_size);
  return out;
}

}  // namespace kflow
