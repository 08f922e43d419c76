#include "kflow/lcs.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

#include "kflow/error.hpp"

namespace kflow {

namespace {

using Word = std::uint64_t;

// Bit-parallel LCS state over a fixed text b (bit k <-> b[k]).
class BitRow {
 public:
  explicit BitRow(Symbols b) : n_(b.size()), words_((b.size() + 63) / 64), v_(words_, ~Word{0}), mask_(words_, 0) {
    for (std::size_t k = 0; k < n_; ++k) {
      auto [it, fresh] = ids_.try_emplace(b[k], static_cast<std::uint32_t>(pos_.size()));
      if (fresh) pos_.emplace_back();
      pos_[it->second].push_back(static_cast<std::uint32_t>(k));
    }
  }

  void feed(std::uint32_t symbol) {
    auto it = ids_.find(symbol);
    if (it == ids_.end()) return;
    const auto& p = pos_[it->second];
    for (auto k : p) mask_[k >> 6] |= Word{1} << (k & 63);
    // V' = (V + (V & M)) | (V & ~M)
    Word carry = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      Word v = v_[w], u = v & mask_[w];
      Word s = v + u;
      Word c1 = s < v;
      Word s2 = s + carry;
      Word c2 = s2 < s;
      carry = c1 | c2;
      v_[w] = s2 | (v & ~mask_[w]);
    }
    for (auto k : p) mask_[k >> 6] = 0;
  }

  std::size_t zeros() const {
    std::size_t ones = 0;
    for (std::size_t w = 0; w < words_; ++w) {
      Word v = v_[w];
      if (w + 1 == words_ && (n_ & 63)) v &= (Word{1} << (n_ & 63)) - 1;
      ones += static_cast<std::size_t>(std::popcount(v));
    }
    return n_ - ones;
  }

  std::vector<std::uint32_t> prefix_zeros() const {
    std::vector<std::uint32_t> row(n_ + 1, 0);
    std::uint32_t z = 0;
    for (std::size_t k = 0; k < n_; ++k) {
      if (!((v_[k >> 6] >> (k & 63)) & 1)) ++z;
      row[k + 1] = z;
    }
    return row;
  }

 private:
  std::size_t n_, words_;
  std::vector<Word> v_, mask_;
  std::unordered_map<std::uint32_t, std::uint32_t> ids_;
  std::vector<std::vector<std::uint32_t>> pos_;
};

// Greedy over the suffix table: the next pair is the smallest feasible row,
// then its first feasible column.
void witness_table(Symbols a, Symbols b, std::int64_t i0, std::int64_t j0, std::vector<MatchPair>& out) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) return;
  std::vector<std::uint32_t> s((n + 1) * (m + 1), 0);
  auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return s[i * (m + 1) + j]; };
  for (std::size_t i = n; i-- > 0;)
    for (std::size_t j = m; j-- > 0;)
      at(i, j) = a[i] == b[j] ? at(i + 1, j + 1) + 1 : std::max(at(i + 1, j), at(i, j + 1));
  std::size_t i = 0, j = 0;
  while (i < n && j < m && at(i, j) > 0) {
    std::size_t k = j;
    while (k < m && b[k] != a[i]) ++k;
    if (k < m && at(i + 1, k + 1) + 1 == at(i, j)) {
      out.push_back({i0 + static_cast<std::int64_t>(i), j0 + static_cast<std::int64_t>(k)});
      j = k + 1;
    }
    ++i;
  }
}

constexpr std::size_t kTableCells = std::size_t{1} << 16;

void hirschberg(Symbols a, Symbols b, std::int64_t i0, std::int64_t j0, std::vector<MatchPair>& out) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0 || m == 0) return;
  if (n == 1) {
    for (std::size_t k = 0; k < m; ++k)
      if (b[k] == a[0]) {
        out.push_back({i0, j0 + static_cast<std::int64_t>(k)});
        return;
      }
    return;
  }
  if ((n + 1) * (m + 1) <= kTableCells) {
    witness_table(a, b, i0, j0, out);
    return;
  }
  const std::size_t mid = n / 2;
  auto fwd = lcs_prefix_row(a.first(mid), b);
  std::vector<std::uint32_t> ra(a.begin() + static_cast<std::ptrdiff_t>(mid), a.end());
  std::vector<std::uint32_t> rb(b.begin(), b.end());
  std::reverse(ra.begin(), ra.end());
  std::reverse(rb.begin(), rb.end());
  auto bwd = lcs_prefix_row(ra, rb);  // bwd[m - k] = LCS(a[mid..), b[k..))
  std::size_t best_k = 0;
  std::uint32_t best = 0;
  for (std::size_t k = 0; k <= m; ++k) {
    std::uint32_t tot = fwd[k] + bwd[m - k];
    if (tot >= best) {
      best = tot;
      best_k = k;
    }
  }
  // largest optimal split maximises the prefix share; the suffix box then
  // starts right after the prefix's last column
  std::size_t before = out.size();
  hirschberg(a.first(mid), b.first(best_k), i0, j0, out);
  std::size_t s = out.size() > before ? static_cast<std::size_t>(out.back().j - j0) + 1 : 0;
  hirschberg(a.subspan(mid), b.subspan(s), i0 + static_cast<std::int64_t>(mid), j0 + static_cast<std::int64_t>(s),
             out);
}

}  // namespace

std::size_t lcs_length(Symbols a, Symbols b) {
  if (a.size() < b.size()) std::swap(a, b);  // fewer words per row
  BitRow row(b);
  for (auto x : a) row.feed(x);
  return row.zeros();
}

std::vector<std::uint32_t> lcs_prefix_row(Symbols a, Symbols b) {
  BitRow row(b);
  for (auto x : a) row.feed(x);
  return row.prefix_zeros();
}

std::vector<MatchPair> lcs_witness(Symbols a, Symbols b) {
  std::vector<MatchPair> out;
  hirschberg(a, b, 0, 0, out);
  return out;
}

std::vector<MatchPair> lcs_witness_table(Symbols a, Symbols b) {
  std::vector<MatchPair> out;
  witness_table(a, b, 0, 0, out);
  return out;
}

std::vector<MatchPair> lcs_banded(Symbols a, Symbols b, std::size_t band) {
  const auto n = static_cast<std::int64_t>(a.size()), m = static_cast<std::int64_t>(b.size());
  const auto w = static_cast<std::int64_t>(band);
  const std::int64_t width = 2 * w + 1;
  // cell (i, j) with |i - j| <= w stored at i * width + (j - i + w); 1-based DP
  std::vector<std::uint32_t> score(static_cast<std::size_t>((n + 1) * width), 0);
  std::vector<std::uint8_t> dir(score.size(), 0);  // 0 stop, 1 diag, 2 up, 3 left
  auto idx = [&](std::int64_t i, std::int64_t j) { return static_cast<std::size_t>(i * width + (j - i + w)); };
  auto inside = [&](std::int64_t i, std::int64_t j) { return j >= 0 && j <= m && std::abs(i - j) <= w; };
  for (std::int64_t i = 1; i <= n; ++i) {
    for (std::int64_t j = std::max<std::int64_t>(1, i - w); j <= std::min(m, i + w); ++j) {
      std::uint32_t best = 0;
      std::uint8_t d = 0;
      if (inside(i - 1, j) && score[idx(i - 1, j)] > best) best = score[idx(i - 1, j)], d = 2;
      if (inside(i, j - 1) && score[idx(i, j - 1)] > best) best = score[idx(i, j - 1)], d = 3;
      if (a[static_cast<std::size_t>(i - 1)] == b[static_cast<std::size_t>(j - 1)]) {
        std::uint32_t diag = inside(i - 1, j - 1) ? score[idx(i - 1, j - 1)] + 1 : 1;
        if (diag > best) best = diag, d = 1;
      }
      score[idx(i, j)] = best;
      dir[idx(i, j)] = d;
    }
  }
  // best end cell in the last row or column
  std::int64_t bi = 0, bj = 0;
  std::uint32_t top = 0;
  for (std::int64_t i = 0; i <= n; ++i)
    for (std::int64_t j = std::max<std::int64_t>(0, i - w); j <= std::min(m, i + w); ++j)
      if ((i == n || j == m) && score[idx(i, j)] > top) top = score[idx(i, j)], bi = i, bj = j;
  std::vector<MatchPair> out;
  while (bi > 0 && bj > 0 && inside(bi, bj)) {
    auto d = dir[idx(bi, bj)];
    if (d == 0) break;
    if (d == 1) {
      out.push_back({bi - 1, bj - 1});
      --bi, --bj;
    } else if (d == 2) {
      --bi;
    } else {
      --bj;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

}  // namespace kflow
