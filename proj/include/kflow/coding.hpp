#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "kflow/roof.hpp"
#include "kflow/special_flow.hpp"

namespace kflow {

/// A word x_0 x_1 ... x_N over {0, ..., alphabet_size - 1}.
struct SymbolicWord {
  std::vector<std::uint32_t> symbols;
  std::uint32_t alphabet_size = 0;

  std::size_t size() const noexcept { return symbols.size(); }
  /// Throws PreconditionError when a symbol is outside the alphabet.
  void validate() const;
  bool operator==(const SymbolicWord&) const = default;
};

/// A compact atom: base interval [base_lo, base_hi) times vertical interval
/// [v_lo, v_hi), clipped by the roof graph. v_hi is +inf for the top atom of
/// a column.
struct Atom {
  std::size_t column = 0;
  double base_lo = 0.0;
  double base_hi = 0.0;
  double v_lo = 0.0;
  double v_hi = std::numeric_limits<double>::infinity();
  double diameter = 0.0;  ///< in the metric d_H + d_V
};

/// The cusp-cutting partition P_m: symbol 0 is every fibre over a base point
/// with f(x_h) >= 2^m; the compact part K_m is tiled by atoms of diameter in
/// [1/m, 2/m].
class Partition {
 public:
  int m() const noexcept { return m_; }
  double cusp_height() const noexcept { return cusp_height_; }
  /// Roots of f = 2^m on either side of 1/2 (K_m has base (left_root, right_root)).
  double left_root() const noexcept { return left_root_; }
  double right_root() const noexcept { return right_root_; }

  std::size_t atom_count() const noexcept { return atoms_.size(); }
  std::uint32_t alphabet_size() const noexcept { return static_cast<std::uint32_t>(atoms_.size() + 1); }
  /// Compact atom with symbol `symbol` (symbol >= 1).
  const Atom& atom(std::uint32_t symbol) const;

  /// The unique atom containing p; cells are half-open [lo, hi) in both coordinates.
  std::uint32_t atom_index(const FlowPoint& p) const;

 private:
  friend Partition build_partition(const RoofFunction& f, int m, std::size_t atom_cap);
  struct Column {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t first_atom = 0;
    std::vector<double> cuts;  // lower vertical bound of each atom, cuts[0] = 0
  };

  explicit Partition(const RoofFunction& f) : roof_(f) {}

  RoofFunction roof_;
  int m_ = 0;
  double cusp_height_ = 0.0;
  double left_root_ = 0.0;
  double right_root_ = 0.0;
  std::vector<Column> columns_;
  std::vector<Atom> atoms_;
};

inline constexpr std::size_t kDefaultAtomCap = 4'000'000;

/// Builds P_m for roof f; m >= 2. Throws when the atom count would exceed
/// atom_cap or when the roof is too low for the diameter bracket.
Partition build_partition(const RoofFunction& f, int m, std::size_t atom_cap = kDefaultAtomCap);

/// Solves f(x) = level on (0, 1/2] (left) or [1/2, 1) (right) by bisection to
/// 1e-15, returning both ends of the final bracket.
struct RootBracket {
  double cusp_side = 0.0;    ///< f >= level here
  double compact_side = 0.0; ///< f < level here
};
RootBracket roof_level_root(const RoofFunction& f, double level, bool left);

/// Symbols of the time-one orbit p, T_1 p, ..., T_1^N p.
SymbolicWord code_single(const RoofFunction& f, const Rotation& rot, const Partition& part, FlowPoint p,
                         std::int64_t n);

/// Coding of the product time-one orbit under P^1 x P^2; the symbol at time k
/// is index1 * |A_2| + index2.
SymbolicWord code_orbit(const RoofFunction& f1, const RoofFunction& f2, const Rotation& rot1, const Rotation& rot2,
                        const Partition& part1, const Partition& part2, ProductPoint pp, std::int64_t n);
SymbolicWord code_orbit(const ProductSystem& sys, const Partition& part1, const Partition& part2, ProductPoint pp,
                        std::int64_t n);

/// Component words of a product word (inverse of the pair encoding).
SymbolicWord project_first(const SymbolicWord& product, std::uint32_t second_alphabet);
SymbolicWord project_second(const SymbolicWord& product, std::uint32_t second_alphabet);

}  // namespace kflow
