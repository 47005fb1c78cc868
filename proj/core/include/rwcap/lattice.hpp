#pragma once

#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <span>
#include <vector>

namespace rwcap {

/// A point of the four-dimensional integer lattice.
struct Point {
  std::array<int, 4> c{0, 0, 0, 0};

  constexpr int operator[](int i) const { return c[static_cast<size_t>(i)]; }
  constexpr int& operator[](int i) { return c[static_cast<size_t>(i)]; }

  friend constexpr Point operator+(Point a, const Point& b) {
    for (int i = 0; i < 4; ++i) a[i] += b[i];
    return a;
  }
  friend constexpr Point operator-(Point a, const Point& b) {
    for (int i = 0; i < 4; ++i) a[i] -= b[i];
    return a;
  }
  friend constexpr Point operator-(Point a) {
    for (int i = 0; i < 4; ++i) a[i] = -a[i];
    return a;
  }
  friend constexpr bool operator==(const Point&, const Point&) = default;
  friend constexpr auto operator<=>(const Point&, const Point&) = default;

  constexpr long norm1() const {
    long s = 0;
    for (int x : c) s += std::abs(x);
    return s;
  }
  constexpr long norm2_sq() const {
    long s = 0;
    for (long x : c) s += x * x;
    return s;
  }
  double norm2() const { return std::sqrt(static_cast<double>(norm2_sq())); }
  constexpr int norm_inf() const {
    int m = 0;
    for (int x : c) m = std::max(m, std::abs(x));
    return m;
  }
  /// Parity of the point: (sum |z_i|) mod 2.  p_k(z) vanishes unless k has
  /// the same parity.
  constexpr int parity() const { return static_cast<int>(norm1() & 1); }
};

inline constexpr Point kOrigin{};

inline constexpr Point unit(int axis, int sign = 1) {
  Point p;
  p[axis] = sign;
  return p;
}

/// The 8 nearest-neighbor steps, indexed by a 3-bit code:
/// axis = code >> 1, sign = (code & 1) ? -1 : +1.
inline constexpr Point step_vector(int code) {
  return unit(code >> 1, (code & 1) ? -1 : 1);
}

/// Representative of the orbit of z under the 384-element symmetry group of
/// Z^4 (coordinate permutations and sign flips): |coords| sorted descending.
Point canonical_orbit(Point z);

struct PointHash {
  size_t operator()(const Point& p) const {
    uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (int x : p.c) {
      h ^= static_cast<uint64_t>(static_cast<uint32_t>(x)) + 0x9e3779b97f4a7c15ULL +
           (h << 6) + (h >> 2);
    }
    return static_cast<size_t>(h * 0xff51afd7ed558ccdULL);
  }
};

/// A finite set of lattice points with stable lexicographic ordering.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::vector<Point> pts);

  size_t size() const { return pts_.size(); }
  bool empty() const { return pts_.empty(); }
  const Point& operator[](size_t i) const { return pts_[i]; }
  std::span<const Point> points() const { return pts_; }
  auto begin() const { return pts_.begin(); }
  auto end() const { return pts_.end(); }

  bool contains(const Point& p) const;
  /// Index of p in the canonical order, or -1.
  long index_of(const Point& p) const;

  friend bool operator==(const PointSet&, const PointSet&) = default;

  PointSet translated(const Point& z) const;
  static PointSet unioned(const PointSet& a, const PointSet& b);

  /// max_{p,q} ||p-q||_2
  double diameter() const;
  Point centroid_rounded() const;

 private:
  std::vector<Point> pts_;  // sorted, unique
};

/// Open-addressing membership table for hot walk/hit loops.
class PointMemberTable {
 public:
  PointMemberTable() = default;
  explicit PointMemberTable(std::span<const Point> pts);
  bool contains(const Point& p) const;
  size_t size() const { return count_; }

 private:
  std::vector<Point> slots_;
  std::vector<uint8_t> used_;
  size_t mask_ = 0;
  size_t count_ = 0;
};

}  // namespace rwcap
