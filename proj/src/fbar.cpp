#include "kflow/fbar.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kflow/error.hpp"

namespace kflow {

namespace {

void check_pair(const SymbolicWord& a, const SymbolicWord& b) {
  if (a.size() != b.size())
    throw PreconditionError("f-bar needs equal lengths (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  if (a.size() == 0) throw PreconditionError("f-bar of empty words");
}

double value_of(std::size_t r, std::size_t len) {
  return 1.0 - static_cast<double>(r) / static_cast<double>(len);
}

}  // namespace

bool Matching::is_monotone() const {
  for (std::size_t s = 1; s < pairs.size(); ++s)
    if (pairs[s].i <= pairs[s - 1].i || pairs[s].j <= pairs[s - 1].j) return false;
  return true;
}

bool Matching::is_valid(const SymbolicWord& a, const SymbolicWord& b) const {
  if (!is_monotone()) return false;
  for (const auto& p : pairs) {
    if (p.i < 0 || p.j < 0 || p.i >= length || p.j >= length) return false;
    if (static_cast<std::size_t>(p.i) >= a.size() || static_cast<std::size_t>(p.j) >= b.size()) return false;
    if (a.symbols[static_cast<std::size_t>(p.i)] != b.symbols[static_cast<std::size_t>(p.j)]) return false;
  }
  return true;
}

FbarResult fbar_distance(const SymbolicWord& a, const SymbolicWord& b) {
  check_pair(a, b);
  FbarResult res;
  res.witness.length = static_cast<std::int64_t>(a.size());
  res.witness.pairs = lcs_witness(a.symbols, b.symbols);
  res.cardinality = res.witness.cardinality();
  std::size_t r = lcs_length(a.symbols, b.symbols);
  if (r != res.cardinality)
    throw Error("LCS routes disagree: " + std::to_string(r) + " vs " + std::to_string(res.cardinality));
  if (!res.witness.is_valid(a, b)) throw Error("LCS witness is not a valid matching");
  res.value = value_of(r, a.size());
  return res;
}

double fbar_value(const SymbolicWord& a, const SymbolicWord& b) {
  check_pair(a, b);
  return value_of(lcs_length(a.symbols, b.symbols), a.size());
}

FbarResult fbar_banded(const SymbolicWord& a, const SymbolicWord& b, std::size_t band) {
  check_pair(a, b);
  FbarResult res;
  res.approximate = true;
  res.witness.length = static_cast<std::int64_t>(a.size());
  res.witness.pairs = lcs_banded(a.symbols, b.symbols, band);
  if (!res.witness.is_valid(a, b)) throw Error("banded witness is not a valid matching");
  res.cardinality = res.witness.cardinality();
  res.value = value_of(res.cardinality, a.size());
  return res;
}

ExhaustiveResult fbar_exhaustive(const SymbolicWord& a, const SymbolicWord& b) {
  check_pair(a, b);
  if (a.size() > kExhaustiveMaxLength)
    throw PreconditionError("exhaustive f-bar limited to length " + std::to_string(kExhaustiveMaxLength));
  const auto n = static_cast<std::int64_t>(a.size());
  std::vector<MatchPair> cand;
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t j = 0; j < n; ++j)
      if (a.symbols[static_cast<std::size_t>(i)] == b.symbols[static_cast<std::size_t>(j)]) cand.push_back({i, j});

  ExhaustiveResult res;
  std::vector<MatchPair> cur;
  // candidates are in (i, j) order, so depth-first extension visits
  // matchings in lexicographic order
  auto dfs = [&](auto&& self, std::size_t start) -> void {
    std::int64_t li = cur.empty() ? -1 : cur.back().i, lj = cur.empty() ? -1 : cur.back().j;
    std::size_t bound = cur.size() + static_cast<std::size_t>(std::min(n - 1 - li, n - 1 - lj));
    if (bound < res.cardinality) return;
    if (cur.size() > res.cardinality) {
      res.cardinality = cur.size();
      res.optimal.clear();
    }
    if (cur.size() == res.cardinality) res.optimal.push_back(Matching{cur, n});
    for (std::size_t c = start; c < cand.size(); ++c) {
      if (cand[c].i > li && cand[c].j > lj) {
        cur.push_back(cand[c]);
        self(self, c + 1);
        cur.pop_back();
      }
    }
  };
  dfs(dfs, 0);
  std::sort(res.optimal.begin(), res.optimal.end(),
            [](const Matching& x, const Matching& y) { return x.pairs < y.pairs; });
  res.value = value_of(res.cardinality, a.size());
  return res;
}

bool is_good_matching(const Matching& match, std::int64_t n, double eps) {
  double need = (1.0 - eps) * static_cast<double>(n);
  return static_cast<double>(match.cardinality()) >= need - 1e-9 * std::max(1.0, std::abs(need));
}

std::vector<std::size_t> matching_ball(const Matching& match, std::size_t w, double u) {
  if (w >= match.pairs.size()) throw PreconditionError("ball centre outside the matching");
  const auto& c = match.pairs[w];
  // i and j both increase along the matching, so the ball is a contiguous run
  auto inside = [&](const MatchPair& p) {
    return std::abs(static_cast<double>(p.i - c.i)) <= u && std::abs(static_cast<double>(p.j - c.j)) <= u;
  };
  std::size_t lo = w, hi = w + 1;
  while (lo > 0 && inside(match.pairs[lo - 1])) --lo;
  while (hi < match.pairs.size() && inside(match.pairs[hi])) ++hi;
  std::vector<std::size_t> out;
  if (!inside(c)) return out;
  for (std::size_t r = lo; r < hi; ++r) out.push_back(r);
  return out;
}

}  // namespace kflow
