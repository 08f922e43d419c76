#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "kflow/coding.hpp"
#include "kflow/error.hpp"
#include "kflow/matching.hpp"

using namespace kflow;

namespace {

ProductSystem make_sys() {
  return ProductSystem{RoofFunction::make(-0.7, true), RoofFunction::make(-0.3, true), cf_expand("golden", 40),
                       cf_expand("sqrt2m1", 40)};
}

MatchedPoint synthetic(double lh, double l, double dh1 = 0.0, double dh2 = 0.0) {
  MatchedPoint p;
  p.lh = lh;
  p.l = l;
  p.dh1 = dh1;
  p.dh2 = dh2;
  return p;
}

// Union length of arcs [c - rho, c + rho] on the circle by sorting and merging.
double union_oracle(const std::vector<double>& centres, double rho) {
  std::vector<std::pair<double, double>> iv;
  for (double c : centres) {
    double a = c - rho, b = c + rho;
    if (a < 0) {
      iv.push_back({a + 1.0, 1.0});
      iv.push_back({0.0, b});
    } else if (b > 1) {
      iv.push_back({a, 1.0});
      iv.push_back({0.0, b - 1.0});
    } else {
      iv.push_back({a, b});
    }
  }
  std::sort(iv.begin(), iv.end());
  double total = 0.0, cur_a = iv[0].first, cur_b = iv[0].second;
  for (std::size_t k = 1; k < iv.size(); ++k) {
    if (iv[k].first > cur_b) {
      total += cur_b - cur_a;
      cur_a = iv[k].first;
      cur_b = iv[k].second;
    } else {
      cur_b = std::max(cur_b, iv[k].second);
    }
  }
  return total + (cur_b - cur_a);
}

}  // namespace

TEST_CASE("dyadic levels") {
  CHECK(dyadic_level(0.01) == 6);
  for (int j = 0; j < 60; ++j) {
    CHECK(dyadic_level(std::ldexp(1.0, -j)) == j);
    CHECK(dyadic_level(std::ldexp(1.0, -j) * 0.75) == j);
    CHECK(dyadic_level(std::nextafter(std::ldexp(1.0, -j - 1), 1.0)) == j);
  }
  CHECK(dyadic_level(0.5) == 1);
  CHECK_THROWS_AS(dyadic_level(0.0), PreconditionError);
  CHECK_THROWS_AS(dyadic_level(-1.0), PreconditionError);
}

TEST_CASE("stratification is disjoint and exhaustive") {
  std::mt19937_64 rng(3);
  std::vector<MatchedPoint> trace;
  for (int r = 0; r < 2000; ++r) {
    double lh = std::ldexp(std::uniform_real_distribution<double>(0.5, 1.0)(rng), -static_cast<int>(rng() % 30));
    if (r % 97 == 0) lh = 0.0;
    double l = lh + std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    trace.push_back(synthetic(lh, l));
  }
  const int m = 4;
  auto s = stratify(trace, m);
  std::set<std::size_t> seen;
  std::size_t total = 0;
  int prev_j = -1;
  for (const auto& row : s.rows) {
    CHECK(row.j > prev_j);
    prev_j = row.j;
    for (auto r : row.members) {
      CHECK(trace[r].l < 2.0 / m);
      CHECK(std::ldexp(1.0, -row.j - 1) < trace[r].lh);
      CHECK(trace[r].lh <= std::ldexp(1.0, -row.j));
      seen.insert(r);
      ++total;
    }
  }
  CHECK(seen.size() == total);
  for (auto r : s.unassigned) CHECK(trace[r].l >= 2.0 / m);
  for (auto r : s.zero_horizontal) CHECK(trace[r].lh == 0.0);
  std::size_t expected = 0;
  for (const auto& p : trace)
    if (p.l < 2.0 / m && p.lh > 0.0) ++expected;
  CHECK(total == expected);
  CHECK(total + s.unassigned.size() + s.zero_horizontal.size() == trace.size());
}

TEST_CASE("matched geometry follows both orbits") {
  auto sys = make_sys();
  std::mt19937_64 rng(4);
  ProductPoint a = sample_invariant(sys, rng), b = sample_invariant(sys, rng);
  Matching m;
  m.length = 30;
  m.pairs = {{0, 2}, {5, 6}, {11, 20}};
  auto trace = matched_geometry(sys, m, a, b);
  REQUIRE(trace.size() == 3);
  ProductPoint x = a;
  for (int k = 0; k < 5; ++k) x = time_one_product(sys, x);
  ProductPoint y = b;
  for (int k = 0; k < 6; ++k) y = time_one_product(sys, y);
  CHECK(trace[1].left == x);
  CHECK(trace[1].right == y);
  auto g = pair_geometry(x, y);
  CHECK(trace[1].lh == g.horizontal);
  CHECK(trace[1].l == g.full);
  CHECK(trace[1].dh1 == circle_dist(x.first.h, y.first.h).value);
  Matching bad;
  bad.length = 10;
  bad.pairs = {{3, 3}, {2, 4}};
  CHECK_THROWS_AS(matched_geometry(sys, bad, a, b), PreconditionError);
}

TEST_CASE("dichotomy") {
  auto f = RoofFunction::make(-0.5, true);
  auto rot = cf_expand("golden", 40);
  FlowPoint z = make_flow_point(f, CirclePoint::from_double(0.3), 0.4);

  auto same = dichotomy_check(f, rot, z, z, 50.0);
  CHECK(same.pass());
  CHECK(same.isometric == same.grid_points);

  FlowPoint zp{z.h + CirclePoint::from_double(1e-4), z.v};
  double small = 0.5 * (f.value(zp.h) - zp.v);
  auto early = dichotomy_check(f, rot, z, zp, std::min(small, 0.5 * (f.value(z.h) - z.v)));
  CHECK(early.pass());
  CHECK(early.isometric == early.grid_points);
  CHECK(early.w == doctest::Approx(1e4).epsilon(1e-9));

  std::mt19937_64 rng(77);
  for (int k = 0; k < 20; ++k) {
    FlowPoint p = sample_invariant(f, rng);
    FlowPoint q{p.h + CirclePoint::from_double(1e-4), p.v};
    if (!is_valid(f, q)) continue;
    auto rep = dichotomy_check(f, rot, p, q, dichotomy_horizon(1e4));
    CHECK(rep.pass());
    CHECK(rep.isometric + rep.separated == rep.grid_points);
    if (rep.separated > 0) CHECK(rep.min_ratio > 100.0);
  }

  CHECK(dichotomy_horizon(1e4) == doctest::Approx(1e4 / std::pow(std::log(1e4), 4)));
  CHECK_THROWS_AS(dichotomy_check(f, rot, z, zp, 10.0), PreconditionError);
  FlowPoint far = make_flow_point(f, CirclePoint::from_double(0.6), 0.1);
  CHECK_THROWS_AS(dichotomy_check(f, rot, z, far, 0.1), PreconditionError);
}

TEST_CASE("isometric close matches") {
  Matching m;
  m.length = 10;
  std::vector<MatchedPoint> trace;
  for (int s = 0; s < 10; ++s) {
    m.pairs.push_back({s, s});
    trace.push_back(synthetic(0.01, 0.05, s % 2 ? 0.01 : 0.003, 0.004));
  }
  CHECK(count_isometric_close(m, trace, 4, 0.0, 1.0) == 1);
  CHECK(count_isometric_close(m, trace, 4, 0.0, 0.01) == 0);
  CHECK(count_isometric_close(m, trace, 4, 100.0, 0.0) == 0);
  CHECK(count_isometric_close(m, trace, 4, 100.0, 1.0) == 5);
  CHECK(count_isometric_close(m, trace, 4, 2.0, 1.0) == 3);
  trace[4].dh2 = 0.004 + 1e-13;
  CHECK(count_isometric_close(m, trace, 4, 0.0, 1.0) == 1);
  trace.pop_back();
  CHECK_THROWS_AS(count_isometric_close(m, trace, 4, 0.0, 1.0), PreconditionError);

  // real orbits of a close pair
  auto sys = make_sys();
  auto p1 = build_partition(sys.f1, 3), p2 = build_partition(sys.f2, 3);
  std::mt19937_64 rng(31);
  ProductPoint a = sample_invariant(sys, rng);
  ProductPoint b = a;
  b.first.h += CirclePoint::from_double(1e-7);
  b.second.h += CirclePoint::from_double(2e-7);
  if (!is_valid(sys.f1, b.first)) b.first.v = 0.0;
  if (!is_valid(sys.f2, b.second)) b.second.v = 0.0;
  auto wa = code_orbit(sys, p1, p2, a, 300), wb = code_orbit(sys, p1, p2, b, 300);
  auto match = fbar_distance(wa, wb).witness;
  auto real = matched_geometry(sys, match, a, b);
  for (std::size_t w : {std::size_t{0}, match.cardinality() / 2}) {
    for (double window : {3.0, 40.0}) {
      std::size_t manual = 0;
      for (std::size_t r = 0; r < match.cardinality(); ++r) {
        bool in_ball = std::abs(double(match.pairs[r].i - match.pairs[w].i)) <= window &&
                       std::abs(double(match.pairs[r].j - match.pairs[w].j)) <= window;
        bool iso = std::abs(real[r].dh1 - real[w].dh1) <= 1e-12 && std::abs(real[r].dh2 - real[w].dh2) <= 1e-12;
        if (in_ball && iso && real[r].l < 0.5) ++manual;
      }
      CHECK(count_isometric_close(match, real, w, window, 0.5) == manual);
    }
  }
}

TEST_CASE("claim witness search") {
  Matching m;
  m.length = 20001;
  std::vector<MatchedPoint> trace;
  for (int s = 0; s < 20000; ++s) {
    m.pairs.push_back({s, s});
    trace.push_back(synthetic(1e-4, 1e-3));
  }
  auto always = [](double, std::int64_t) { return true; };
  auto cw = claim_witness_search(m, trace, 0, 0.01, 0.3, always);
  REQUIRE(cw.found());
  CHECK(cw.r_w == doctest::Approx(1e4));
  CHECK(cw.short_window == doctest::Approx(std::pow(1e4, 1.0 / 1.3 + 0.01)));
  CHECK(cw.long_window == doctest::Approx(std::pow(1e4, 0.99)));
  double lr2 = std::pow(std::log(1e4), 2);
  CHECK(cw.r0 > 0);
  CHECK(cw.r1 > cw.r0);
  CHECK(in_annulus(m.pairs[cw.r0], m.pairs[0], cw.short_window, 0.5 * cw.short_window / lr2));
  CHECK(in_annulus(m.pairs[cw.r1], m.pairs[0], cw.long_window, 0.5 * cw.long_window / lr2));
  CHECK_FALSE(in_annulus(m.pairs[cw.r0 - 1], m.pairs[0], cw.short_window, 0.5 * cw.short_window / lr2));

  // the good-set test picks which annulus members qualify
  auto even = [](double, std::int64_t off) { return off % 10 == 3; };
  auto cw2 = claim_witness_search(m, trace, 0, 0.01, 0.3, even);
  REQUIRE(cw2.found());
  CHECK(m.pairs[cw2.r0].i % 10 == 3);
  CHECK(m.pairs[cw2.r1].i % 10 == 3);

  auto never = [](double, std::int64_t) { return false; };
  auto none = claim_witness_search(m, trace, 0, 0.01, 0.3, never);
  CHECK_FALSE(none.found());
  CHECK(none.reason == "no short-annulus pair in G");
  CHECK(none.candidates_r0 > 0);

  auto last = claim_witness_search(m, trace, m.cardinality() - 1, 0.01, 0.3, always);
  CHECK(last.reason == "no matched pairs after w");

  trace[0].lh = 2.0;
  auto tiny = claim_witness_search(m, trace, 0, 0.01, 0.3, always);
  CHECK(tiny.reason == "window below 1, annulus empty");
  trace[0].lh = 0.5;
  auto thin = claim_witness_search(m, trace, 0, 0.01, 0.3, always);
  CHECK(thin.reason == "short annulus holds no matched pair");
  trace[0].lh = 0.0;
  CHECK(claim_witness_search(m, trace, 0, 0.01, 0.3, always).reason == "L_H(w) = 0");
}

TEST_CASE("shadow set measure") {
  auto rot = cf_expand("golden", 40);
  // K = floor(2 C1 R); disjoint arcs for small rho
  for (std::int64_t r : {16, 64, 256}) {
    double c1 = 0.5;
    double eps0 = 0.6;
    double rho = std::pow(double(r), -1.0 / (1.0 - eps0));
    auto k = static_cast<std::int64_t>(std::floor(2.0 * c1 * r));
    std::vector<double> centres;
    for (std::int64_t i = -k; i <= k; ++i) centres.push_back((CirclePoint() + rot.step().times(i)).value());
    double measure = shadow_set_measure(rot, r, eps0, c1);
    CHECK(measure == doctest::Approx(union_oracle(centres, rho)).epsilon(1e-9));
    CHECK(measure == doctest::Approx(double(2 * k + 1) * 2.0 * rho).epsilon(1e-9));
    // each of the 4 C1 R + 1 arcs has length 2 rho, so disjoint arcs exceed (4 C1 R + 2) rho
    CHECK(measure > shadow_set_bound(r, eps0, c1));
    CHECK(shadow_set_bound(r, eps0, c1) == doctest::Approx((4.0 * c1 * r + 2.0) * rho));
  }
  // overlapping arcs
  for (std::int64_t r : {4, 10, 50, 300}) {
    double c1 = 1.2, eps0 = 0.05;
    double rho = std::pow(double(r), -1.0 / (1.0 - eps0));
    auto k = static_cast<std::int64_t>(std::floor(2.0 * c1 * r));
    std::vector<double> centres;
    for (std::int64_t i = -k; i <= k; ++i) centres.push_back((CirclePoint() + rot.step().times(i)).value());
    double measure = shadow_set_measure(rot, r, eps0, c1);
    double oracle = std::min(1.0, union_oracle(centres, rho));
    CHECK(measure == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(measure <= 1.0);
  }
  double prev = 2.0;
  for (int e = 4; e <= 16; ++e) {
    double v = shadow_set_measure(rot, std::int64_t{1} << e, 0.3, 0.5);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK_THROWS_AS(shadow_set_measure(rot, 1, 0.1, 1.0), PreconditionError);
  CHECK_THROWS_AS(shadow_set_measure(rot, 10, 1.0, 1.0), PreconditionError);
}
