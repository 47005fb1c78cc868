#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "rwcap/lattice.hpp"
#include "rwcap/rng.hpp"

namespace rwcap {

/// A simple random walk on Z^4: positions S_0..S_n plus the RNG provenance
/// that regenerates it.  Immutable after creation.
class WalkPath {
 public:
  WalkPath() : positions_(1, kOrigin) {}
  WalkPath(std::vector<Point> positions, uint64_t seed, uint64_t stream_id);

  size_t length() const { return positions_.size() - 1; }  // number of steps
  const Point& position(size_t i) const { return positions_[i]; }
  std::span<const Point> positions() const { return positions_; }
  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  friend bool operator==(const WalkPath&, const WalkPath&) = default;

 private:
  std::vector<Point> positions_;
  uint64_t seed_ = 0;
  uint64_t stream_id_ = 0;
};

/// n-step SRW from the origin; deterministic in (seed, stream_id, n).
WalkPath sample_walk(size_t n, uint64_t seed, uint64_t stream_id);

/// The range {S_a,...,S_b} as a set.  Note S[1,n] excludes S_0.
PointSet range_of(const WalkPath& path, size_t a, size_t b);

/// Slice S[(k-1)m_l, k m_l] of a path divided into 2^level equal parts,
/// positions preserved (not re-rooted).  1 <= k <= 2^level; the length must
/// be divisible by 2^level.
WalkPath segment(const WalkPath& path, int level, int k);

/// Compact replay format: header (n, seed, stream_id), then 3-bit step codes
/// packed little-endian.
void write_walk(std::ostream& os, const WalkPath& path);
WalkPath read_walk(std::istream& is);
void save_walk(const std::string& file, const WalkPath& path);
WalkPath load_walk(const std::string& file);

}  // namespace rwcap
