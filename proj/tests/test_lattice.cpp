#include <algorithm>
#include <vector>

#include "doctest.h"
#include "rwcap/lattice.hpp"
#include "rwcap/rng.hpp"

using namespace rwcap;

namespace {

Point random_point(CounterRng& rng, int radius) {
  Point p;
  for (int i = 0; i < 4; ++i) {
    p[i] = static_cast<int>(rng.next_below(static_cast<uint64_t>(2 * radius + 1))) -
           radius;
  }
  return p;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("point arithmetic and norms") {
  Point a{1, -2, 3, 0};
  Point b{0, 1, -1, 4};
  CHECK((a + b) == Point{1, -1, 2, 4});
  CHECK((a - b) == Point{1, -3, 4, -4});
  CHECK((-a) == Point{-1, 2, -3, 0});
  CHECK(a.norm1() == 6);
  CHECK(a.norm2_sq() == 14);
  CHECK(a.norm_inf() == 3);
  CHECK(a.parity() == 0);
  CHECK(Point{1, 0, 0, 0}.parity() == 1);
  CHECK(kOrigin.norm1() == 0);
}

TEST_CASE("step vectors enumerate the 8 neighbors exactly once") {
  std::vector<Point> steps;
  for (int code = 0; code < 8; ++code) {
    Point s = step_vector(code);
    CHECK(s.norm1() == 1);
    steps.push_back(s);
  }
  std::sort(steps.begin(), steps.end());
  CHECK(std::unique(steps.begin(), steps.end()) == steps.end());
}

TEST_CASE("canonical orbit is invariant under signed permutations") {
  CounterRng rng(42, 0);
  for (int trial = 0; trial < 200; ++trial) {
    Point z = random_point(rng, 9);
    Point c = canonical_orbit(z);
    // Sorted descending absolute values.
    for (int i = 0; i < 3; ++i) CHECK(c[i] >= c[i + 1]);
    CHECK(c[3] >= 0);
    // A random signed permutation of z has the same representative.
    Point w;
    int perm[4] = {0, 1, 2, 3};
    for (int i = 3; i > 0; --i) {
      int j = static_cast<int>(rng.next_below(static_cast<uint64_t>(i + 1)));
      std::swap(perm[i], perm[j]);
    }
    for (int i = 0; i < 4; ++i) {
      w[i] = (rng.next_u64() & 1) ? -z[perm[i]] : z[perm[i]];
    }
    CHECK(canonical_orbit(w) == c);
  }
}

TEST_CASE("point set is sorted, unique, and searchable") {
  std::vector<Point> pts = {Point{1, 0, 0, 0}, Point{0, 0, 0, 0},
                            Point{1, 0, 0, 0}, Point{-1, 2, 0, 3}};
  PointSet s(pts);
  CHECK(s.size() == 3);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(s.contains(Point{0, 0, 0, 0}));
  CHECK(s.contains(Point{-1, 2, 0, 3}));
  CHECK(!s.contains(Point{2, 0, 0, 0}));
  CHECK(s.index_of(Point{2, 0, 0, 0}) == -1);
  for (size_t i = 0; i < s.size(); ++i) {
    CHECK(s.index_of(s[i]) == static_cast<long>(i));
  }
}

TEST_CASE("translate, union, diameter") {
  PointSet a(std::vector<Point>{Point{0, 0, 0, 0}, Point{3, 0, 0, 0}});
  PointSet b = a.translated(Point{0, 4, 0, 0});
  CHECK(b.contains(Point{0, 4, 0, 0}));
  CHECK(b.contains(Point{3, 4, 0, 0}));
  CHECK(a.diameter() == doctest::Approx(3.0));
  PointSet u = PointSet::unioned(a, b);
  CHECK(u.size() == 4);
  CHECK(u.diameter() == doctest::Approx(5.0));
  PointSet overlap = PointSet::unioned(a, a);
  CHECK(overlap == a);
}

TEST_CASE("membership table agrees with the sorted set") {
  CounterRng rng(7, 3);
  std::vector<Point> pts;
  for (int i = 0; i < 500; ++i) pts.push_back(random_point(rng, 6));
  PointSet s(pts);
  PointMemberTable table(s.points());
  CHECK(table.size() == s.size());
  for (int trial = 0; trial < 2000; ++trial) {
    Point q = random_point(rng, 7);
    CHECK(table.contains(q) == s.contains(q));
  }
}

}  // TEST_SUITE
