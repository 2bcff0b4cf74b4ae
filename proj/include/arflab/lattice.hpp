#pragma once

// Multi-index arithmetic and half-open lattice rectangles.
//
// All rectangles are half-open boxes (a, b] = prod_s (a_s, b_s] on the
// positive lattice; a degenerate box (some a_s == b_s) is representable
// and has volume 0.  Coordinates are 64-bit and every product is checked:
// geometry arithmetic must stay exact even for block boundaries far
// beyond any simulable grid, and it must fail loudly rather than wrap.

#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace arflab {

using Index = std::int64_t;

class overflow_error : public std::runtime_error {
 public:
  explicit overflow_error(const std::string& what) : std::runtime_error(what) {}
};

inline Index checked_add(Index a, Index b) {
  Index out;
  if (__builtin_add_overflow(a, b, &out))
    throw overflow_error("integer addition overflows 64 bits");
  return out;
}

inline Index checked_mul(Index a, Index b) {
  Index out;
  if (__builtin_mul_overflow(a, b, &out))
    throw overflow_error("integer product overflows 64 bits");
  return out;
}

/// base^exp with overflow detection; exp >= 0.
inline Index checked_ipow(Index base, Index exp) {
  if (exp < 0) throw std::invalid_argument("checked_ipow: negative exponent");
  Index acc = 1;
  for (Index i = 0; i < exp; ++i) acc = checked_mul(acc, base);
  return acc;
}

/// A point of Z_+^d.  The dimension is fixed per laboratory session; all
/// indices taking part in one computation share it.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t d, Index fill = 0) : c_(d, fill) {}
  MultiIndex(std::initializer_list<Index> coords) : c_(coords) {}
  explicit MultiIndex(std::vector<Index> coords) : c_(std::move(coords)) {}

  std::size_t dim() const { return c_.size(); }
  Index operator[](std::size_t s) const { return c_[s]; }
  Index& operator[](std::size_t s) { return c_[s]; }
  const std::vector<Index>& coords() const { return c_; }

  bool operator==(const MultiIndex&) const = default;

 private:
  std::vector<Index> c_;
};

inline std::ostream& operator<<(std::ostream& os, const MultiIndex& m) {
  os << '(';
  for (std::size_t s = 0; s < m.dim(); ++s) os << (s ? "," : "") << m[s];
  return os << ')';
}

/// Componentwise i <= j.
inline bool leq(const MultiIndex& i, const MultiIndex& j) {
  for (std::size_t s = 0; s < i.dim(); ++s)
    if (i[s] > j[s]) return false;
  return true;
}

/// Componentwise i < j (strict in every coordinate).
inline bool lt(const MultiIndex& i, const MultiIndex& j) {
  for (std::size_t s = 0; s < i.dim(); ++s)
    if (i[s] >= j[s]) return false;
  return true;
}

/// Lexicographic order, used wherever a deterministic total order is needed.
inline bool lex_less(const MultiIndex& i, const MultiIndex& j) {
  for (std::size_t s = 0; s < i.dim(); ++s) {
    if (i[s] != j[s]) return i[s] < j[s];
  }
  return false;
}

/// sup-norm ||i|| = max_s |i_s|.
inline Index sup_norm(const MultiIndex& i) {
  Index m = 0;
  for (std::size_t s = 0; s < i.dim(); ++s) m = std::max(m, std::abs(i[s]));
  return m;
}

/// [N] = prod_s N_s with overflow detection.
inline Index volume(const MultiIndex& n) {
  Index acc = 1;
  for (std::size_t s = 0; s < n.dim(); ++s) acc = checked_mul(acc, n[s]);
  return acc;
}

/// Half-open lattice box (lo, hi].
struct Rect {
  MultiIndex lo, hi;

  Rect() = default;
  Rect(MultiIndex lo_, MultiIndex hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.dim() != hi.dim())
      throw std::invalid_argument("Rect: dimension mismatch");
    if (!leq(lo, hi))
      throw std::invalid_argument("Rect: requires lo <= hi componentwise");
  }

  std::size_t dim() const { return lo.dim(); }
  Index side(std::size_t s) const { return hi[s] - lo[s]; }

  Index volume() const {
    Index acc = 1;
    for (std::size_t s = 0; s < dim(); ++s) acc = checked_mul(acc, side(s));
    return acc;
  }

  bool empty() const {
    for (std::size_t s = 0; s < dim(); ++s)
      if (lo[s] == hi[s]) return true;
    return false;
  }

  /// Lattice membership: j in (lo, hi].
  bool contains(const MultiIndex& j) const {
    for (std::size_t s = 0; s < dim(); ++s)
      if (j[s] <= lo[s] || j[s] > hi[s]) return false;
    return true;
  }

  bool contains_rect(const Rect& o) const {
    for (std::size_t s = 0; s < dim(); ++s)
      if (o.lo[s] < lo[s] || o.hi[s] > hi[s]) return false;
    return true;
  }

  bool disjoint_from(const Rect& o) const {
    for (std::size_t s = 0; s < dim(); ++s)
      if (o.hi[s] <= lo[s] || o.lo[s] >= hi[s]) return true;
    return empty() || o.empty();
  }

  bool operator==(const Rect&) const = default;
};

inline std::ostream& operator<<(std::ostream& os, const Rect& r) {
  for (std::size_t s = 0; s < r.dim(); ++s)
    os << (s ? "x" : "") << '(' << r.lo[s] << ',' << r.hi[s] << ']';
  return os;
}

/// Visits every lattice point of the half-open box (lo, hi] in row-major
/// order.  The workhorse of the small-scale brute-force oracles.
template <typename Fn>
void for_each_point(const Rect& v, Fn&& fn) {
  const std::size_t d = v.dim();
  if (v.empty()) return;
  MultiIndex j(d);
  for (std::size_t s = 0; s < d; ++s) j[s] = v.lo[s] + 1;
  while (true) {
    fn(static_cast<const MultiIndex&>(j));
    std::size_t s = d - 1;
    while (true) {
      if (++j[s] <= v.hi[s]) break;
      j[s] = v.lo[s] + 1;
      if (s == 0) return;
      --s;
    }
  }
}

/// Membership in the wedge G_tau: j_s >= prod_{s' != s} j_{s'}^tau for
/// every axis s, evaluated in double precision with ties counting as
/// inside.  Requires j >= (1,...,1).
inline bool g_tau_contains(const MultiIndex& j, double tau) {
  for (std::size_t s = 0; s < j.dim(); ++s) {
    double rhs = 1.0;
    for (std::size_t t = 0; t < j.dim(); ++t)
      if (t != s) rhs *= std::pow(static_cast<double>(j[t]), tau);
    if (static_cast<double>(j[s]) < rhs) return false;
  }
  return true;
}

}  // namespace arflab
