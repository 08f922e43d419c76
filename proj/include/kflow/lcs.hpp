#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace kflow {

struct MatchPair {
  std::int64_t i = 0;
  std::int64_t j = 0;
  bool operator==(const MatchPair&) const = default;
  auto operator<=>(const MatchPair&) const = default;
};

using Symbols = std::span<const std::uint32_t>;

/// Length of a longest common subsequence, bit-parallel (64 columns per word).
std::size_t lcs_length(Symbols a, Symbols b);

/// row[k] = LCS(a, b[0..k)) for k = 0..|b|.
std::vector<std::uint32_t> lcs_prefix_row(Symbols a, Symbols b);

/// A longest common subsequence as index pairs. Among all optimal matchings
/// the lexicographically smallest sequence of (i, j) is returned. Linear
/// memory (divide and conquer over rows).
std::vector<MatchPair> lcs_witness(Symbols a, Symbols b);

/// Same result from a full quadratic table; used for small boxes and tests.
std::vector<MatchPair> lcs_witness_table(Symbols a, Symbols b);

/// APPROXIMATE: common subsequence restricted to pairs with |i - j| <= band.
/// A lower bound on the true LCS.
std::vector<MatchPair> lcs_banded(Symbols a, Symbols b, std::size_t band);

}  // namespace kflow
