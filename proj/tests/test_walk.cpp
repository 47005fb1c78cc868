#include <cstdio>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "rwcap/walk.hpp"

using namespace rwcap;

TEST_SUITE("walk") {

TEST_CASE("sampling is deterministic and steps are nearest-neighbor") {
  WalkPath w1 = sample_walk(1000, 5, 2);
  WalkPath w2 = sample_walk(1000, 5, 2);
  CHECK(w1 == w2);
  CHECK(w1.length() == 1000);
  CHECK(w1.position(0) == kOrigin);
  for (size_t i = 1; i <= w1.length(); ++i) {
    CHECK((w1.position(i) - w1.position(i - 1)).norm1() == 1);
  }
  CHECK(sample_walk(1000, 5, 3).positions()[1000] != w1.positions()[1000]);
}

TEST_CASE("range excludes the starting point unless revisited") {
  WalkPath w = sample_walk(50, 9, 0);
  PointSet r = range_of(w, 1, 50);
  CHECK(r.size() <= 50);
  bool revisits_origin = false;
  for (size_t i = 1; i <= 50; ++i) {
    if (w.position(i) == kOrigin) revisits_origin = true;
  }
  CHECK(r.contains(kOrigin) == revisits_origin);
  // Sub-range is contained in the full range.
  PointSet sub = range_of(w, 10, 20);
  for (const Point& p : sub) {
    bool in_full = r.contains(p) || p == w.position(10);
    CHECK(in_full);
  }
}

TEST_CASE("dyadic segments partition the path") {
  WalkPath w = sample_walk(64, 11, 4);
  for (int level = 0; level <= 3; ++level) {
    int parts = 1 << level;
    size_t m = 64 / static_cast<size_t>(parts);
    for (int k = 1; k <= parts; ++k) {
      WalkPath s = segment(w, level, k);
      CHECK(s.length() == m);
      for (size_t i = 0; i <= m; ++i) {
        CHECK(s.position(i) == w.position((static_cast<size_t>(k) - 1) * m + i));
      }
    }
  }
  CHECK_THROWS(segment(w, 7, 1));   // 64 not divisible by 128
  CHECK_THROWS(segment(w, 2, 5));   // k out of range
}

TEST_CASE("stream round trip is exact") {
  WalkPath w = sample_walk(777, 123456789u, 42);
  std::stringstream buf;
  write_walk(buf, w);
  WalkPath r = read_walk(buf);
  CHECK(r == w);
  CHECK(r.seed() == 123456789u);
  CHECK(r.stream_id() == 42);
}

TEST_CASE("file round trip is exact") {
  namespace fs = std::filesystem;
  fs::path tmp = fs::temp_directory_path() / "rwcap_walk_test.wlk";
  WalkPath w = sample_walk(321, 77, 5);
  save_walk(tmp.string(), w);
  WalkPath r = load_walk(tmp.string());
  CHECK(r == w);
  fs::remove(tmp);
}

TEST_CASE("zero-length walk is the origin") {
  WalkPath w = sample_walk(0, 1, 1);
  CHECK(w.length() == 0);
  CHECK(w.position(0) == kOrigin);
  CHECK(range_of(w, 0, 0).size() == 1);
  CHECK_THROWS(range_of(w, 1, 0));
}

}  // TEST_SUITE
