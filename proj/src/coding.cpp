#include "kflow/coding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kflow/error.hpp"

namespace kflow {

void SymbolicWord::validate() const {
  for (std::size_t i = 0; i < symbols.size(); ++i)
    if (symbols[i] >= alphabet_size)
      throw PreconditionError("symbol " + std::to_string(symbols[i]) + " at position " + std::to_string(i) +
                              " outside alphabet of size " + std::to_string(alphabet_size));
}

RootBracket roof_level_root(const RoofFunction& f, double level, bool left) {
  if (!(level > f.minimum())) throw PreconditionError("level must exceed the roof minimum");
  // left: f decreasing on (0, 1/2]; right: increasing on [1/2, 1)
  double cusp = left ? 0.0 : 1.0;
  double compact = 0.5;
  while (std::abs(compact - cusp) > 1e-15) {
    double mid = 0.5 * (cusp + compact);
    if (mid == cusp || mid == compact) break;
    if (f.value(mid) >= level)
      cusp = mid;
    else
      compact = mid;
  }
  if (cusp == 0.0 || cusp == 1.0) cusp = std::nextafter(cusp, 0.5);
  return {cusp, compact};
}

namespace {

// Column of the compact region with f monotone on [lo, hi).
struct ColumnGeometry {
  const RoofFunction* f;
  double lo, hi;
  bool steep_left;  // f is largest at lo
  double top;       // sup of f on the column, capped at the cusp height

  // width of {x in column : f(x) > c}
  double width_above(double c) const {
    double flat_end = steep_left ? hi : lo;
    double steep_end = steep_left ? lo : hi;
    if (f->value(std::clamp(flat_end, 1e-300, 1.0 - 1e-16)) > c) return hi - lo;
    if (c >= top) return 0.0;
    double a = steep_end, b = flat_end;  // f(a) > c >= f(b)
    for (int it = 0; it < 200 && std::abs(b - a) > 1e-17; ++it) {
      double mid = 0.5 * (a + b);
      if (mid == a || mid == b) break;
      if (f->value(mid) > c)
        a = mid;
      else
        b = mid;
    }
    return std::abs(b - steep_end);
  }
  double diameter(double c, double d) const { return width_above(c) + std::min(d, top) - c; }
};

}  // namespace

Partition build_partition(const RoofFunction& f, int m, std::size_t atom_cap) {
  if (m < 2) throw PreconditionError("partition parameter m must be >= 2");
  if (m > 60) throw PreconditionError("partition parameter m too large");
  const double inv_m = 1.0 / m;
  if (f.minimum() < 0.75 * inv_m)
    throw PreconditionError("roof minimum " + std::to_string(f.minimum()) + " too small for m = " + std::to_string(m));

  Partition part(f);
  part.m_ = m;
  part.cusp_height_ = std::ldexp(1.0, m);
  RootBracket lb = roof_level_root(f, part.cusp_height_, true);
  RootBracket rb = roof_level_root(f, part.cusp_height_, false);
  part.left_root_ = lb.compact_side;
  part.right_root_ = rb.compact_side;

  auto add_half = [&](double lo, double hi, bool steep_left) {
    double len = hi - lo;
    auto ncols = static_cast<std::size_t>(std::ceil(len / (0.5 * inv_m)));
    if (ncols == 0) ncols = 1;
    for (std::size_t k = 0; k < ncols; ++k) {
      double a = lo + len * static_cast<double>(k) / static_cast<double>(ncols);
      double b = (k + 1 == ncols) ? hi : lo + len * static_cast<double>(k + 1) / static_cast<double>(ncols);
      double steep = steep_left ? a : b;
      double fs = f.value(std::clamp(steep, 1e-300, 1.0 - 1e-16));
      ColumnGeometry g{&f, a, b, steep_left, std::min(fs, part.cusp_height_)};

      Partition::Column col;
      col.lo = a;
      col.hi = b;
      col.first_atom = part.atoms_.size();
      col.cuts.push_back(0.0);
      double c = 0.0;
      while (g.diameter(c, INFINITY) > 2.0 * inv_m) {
        double d = c + 1.5 * inv_m - g.width_above(c);
        col.cuts.push_back(d);
        c = d;
        if (part.atoms_.size() + col.cuts.size() > atom_cap)
          throw PreconditionError("atom count exceeds cap " + std::to_string(atom_cap) + " at m = " +
                                  std::to_string(m));
      }
      if (g.diameter(c, INFINITY) < inv_m) {
        if (col.cuts.size() < 2) throw PreconditionError("column too small for the diameter bracket");
        col.cuts.pop_back();
        double cp = col.cuts.back();
        if (g.diameter(cp, INFINITY) > 2.0 * inv_m) {
          // split the merged remainder so the top piece has diameter 1/m
          double lo_c = cp, hi_c = c;  // g(lo_c) > 1/m > g(hi_c)
          for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (lo_c + hi_c);
            if (mid == lo_c || mid == hi_c) break;
            if (g.diameter(mid, INFINITY) >= inv_m)
              lo_c = mid;
            else
              hi_c = mid;
          }
          col.cuts.push_back(lo_c);
        }
      }
      for (std::size_t i = 0; i < col.cuts.size(); ++i) {
        Atom at;
        at.column = part.columns_.size();
        at.base_lo = a;
        at.base_hi = b;
        at.v_lo = col.cuts[i];
        at.v_hi = (i + 1 < col.cuts.size()) ? col.cuts[i + 1] : INFINITY;
        at.diameter = g.diameter(at.v_lo, at.v_hi);
        part.atoms_.push_back(at);
      }
      part.columns_.push_back(std::move(col));
    }
  };
  add_half(lb.cusp_side, 0.5, true);
  add_half(0.5, rb.cusp_side, false);
  if (part.atoms_.size() + 1 > atom_cap)
    throw PreconditionError("atom count exceeds cap " + std::to_string(atom_cap));
  return part;
}

const Atom& Partition::atom(std::uint32_t symbol) const {
  if (symbol == 0 || symbol > atoms_.size()) throw PreconditionError("not a compact atom symbol");
  return atoms_[symbol - 1];
}

std::uint32_t Partition::atom_index(const FlowPoint& p) const {
  if (p.h.is_zero() || roof_.value(p.h) >= cusp_height_) return 0;
  double x = p.h.value();
  auto it = std::upper_bound(columns_.begin(), columns_.end(), x,
                             [](double v, const Column& c) { return v < c.lo; });
  // rounding of x near a root can land just outside the column range
  if (it == columns_.begin()) it = columns_.begin() + 1;
  const Column& col = *(it - 1);
  auto cut = std::upper_bound(col.cuts.begin(), col.cuts.end(), p.v);
  std::size_t k = (cut == col.cuts.begin()) ? 0 : static_cast<std::size_t>(cut - col.cuts.begin()) - 1;
  return static_cast<std::uint32_t>(col.first_atom + k + 1);
}

SymbolicWord code_single(const RoofFunction& f, const Rotation& rot, const Partition& part, FlowPoint p,
                         std::int64_t n) {
  if (n < 0) throw PreconditionError("word length N must be >= 0");
  SymbolicWord w;
  w.alphabet_size = part.alphabet_size();
  w.symbols.reserve(static_cast<std::size_t>(n) + 1);
  w.symbols.push_back(part.atom_index(p));
  for (std::int64_t k = 0; k < n; ++k) {
    p = flow(f, rot, p, 1.0).point;
    w.symbols.push_back(part.atom_index(p));
  }
  return w;
}

SymbolicWord code_orbit(const RoofFunction& f1, const RoofFunction& f2, const Rotation& rot1, const Rotation& rot2,
                        const Partition& part1, const Partition& part2, ProductPoint pp, std::int64_t n) {
  if (n < 0) throw PreconditionError("word length N must be >= 0");
  std::uint64_t alpha = static_cast<std::uint64_t>(part1.alphabet_size()) * part2.alphabet_size();
  if (alpha > 0xffffffffULL) throw PreconditionError("product alphabet does not fit in 32 bits");
  const std::uint32_t a2 = part2.alphabet_size();
  SymbolicWord w;
  w.alphabet_size = static_cast<std::uint32_t>(alpha);
  w.symbols.reserve(static_cast<std::size_t>(n) + 1);
  auto sym = [&](const ProductPoint& q) { return part1.atom_index(q.first) * a2 + part2.atom_index(q.second); };
  w.symbols.push_back(sym(pp));
  for (std::int64_t k = 0; k < n; ++k) {
    pp = time_one_product(f1, f2, rot1, rot2, pp);
    w.symbols.push_back(sym(pp));
  }
  return w;
}

SymbolicWord code_orbit(const ProductSystem& sys, const Partition& part1, const Partition& part2, ProductPoint pp,
                        std::int64_t n) {
  return code_orbit(sys.f1, sys.f2, sys.rot1, sys.rot2, part1, part2, pp, n);
}

SymbolicWord project_first(const SymbolicWord& product, std::uint32_t second_alphabet) {
  if (second_alphabet == 0 || product.alphabet_size % second_alphabet != 0)
    throw PreconditionError("second alphabet does not divide the product alphabet");
  SymbolicWord w;
  w.alphabet_size = product.alphabet_size / second_alphabet;
  w.symbols.reserve(product.size());
  for (auto s : product.symbols) w.symbols.push_back(s / second_alphabet);
  return w;
}

SymbolicWord project_second(const SymbolicWord& product, std::uint32_t second_alphabet) {
  if (second_alphabet == 0 || product.alphabet_size % second_alphabet != 0)
    throw PreconditionError("second alphabet does not divide the product alphabet");
  SymbolicWord w;
  w.alphabet_size = second_alphabet;
  w.symbols.reserve(product.size());
  for (auto s : product.symbols) w.symbols.push_back(s % second_alphabet);
  return w;
}

}  // namespace kflow
