#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kflow/coding.hpp"
#include "kflow/lcs.hpp"

namespace kflow {

/// Pairs (i_s, j_s) with both coordinates strictly increasing. Positions past
/// the last pair read as the sentinel (length, length).
struct Matching {
  std::vector<MatchPair> pairs;
  std::int64_t length = 0;

  std::size_t cardinality() const noexcept { return pairs.size(); }
  MatchPair at(std::size_t s) const noexcept { return s < pairs.size() ? pairs[s] : MatchPair{length, length}; }
  /// Monotone, inside [0, length), and symbol-equal on a and b.
  bool is_valid(const SymbolicWord& a, const SymbolicWord& b) const;
  bool is_monotone() const;
};

struct FbarResult {
  double value = 0.0;  ///< 1 - r / length
  std::size_t cardinality = 0;
  Matching witness;
  bool approximate = false;  ///< banded mode
};

/// Exact f-bar distance of two equal-length words; the witness is the
/// lexicographically smallest optimal matching.
FbarResult fbar_distance(const SymbolicWord& a, const SymbolicWord& b);

/// Value only (bit-parallel, no witness).
double fbar_value(const SymbolicWord& a, const SymbolicWord& b);

/// APPROXIMATE: matchings restricted to |i - j| <= band. Overestimates the distance.
FbarResult fbar_banded(const SymbolicWord& a, const SymbolicWord& b, std::size_t band);

inline constexpr std::size_t kExhaustiveMaxLength = 14;

struct ExhaustiveResult {
  double value = 0.0;
  std::size_t cardinality = 0;
  std::vector<Matching> optimal;  ///< every maximum matching, lexicographic order
};

/// Enumerates all matchings; lengths up to kExhaustiveMaxLength.
ExhaustiveResult fbar_exhaustive(const SymbolicWord& a, const SymbolicWord& b);

/// cardinality >= (1 - eps) n.
bool is_good_matching(const Matching& match, std::int64_t n, double eps);

/// Indices r with |i_r - i_w| <= u and |j_r - j_w| <= u.
std::vector<std::size_t> matching_ball(const Matching& match, std::size_t w, double u);

}  // namespace kflow
