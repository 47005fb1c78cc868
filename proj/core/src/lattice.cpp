#include "rwcap/lattice.hpp"

#include <algorithm>

namespace rwcap {

Point canonical_orbit(Point z) {
  for (int i = 0; i < 4; ++i) z[i] = std::abs(z[i]);
  std::sort(z.c.begin(), z.c.end(), std::greater<int>());
  return z;
}

PointSet::PointSet(std::vector<Point> pts) : pts_(std::move(pts)) {
  std::sort(pts_.begin(), pts_.end());
  pts_.erase(std::unique(pts_.begin(), pts_.end()), pts_.end());
}

bool PointSet::contains(const Point& p) const {
  return std::binary_search(pts_.begin(), pts_.end(), p);
}

long PointSet::index_of(const Point& p) const {
  auto it = std::lower_bound(pts_.begin(), pts_.end(), p);
  if (it == pts_.end() || *it != p) return -1;
  return it - pts_.begin();
}

PointSet PointSet::translated(const Point& z) const {
  std::vector<Point> out;
  out.reserve(pts_.size());
  for (const Point& p : pts_) out.push_back(p + z);
  return PointSet(std::move(out));  // translation preserves order, sort is cheap
}

PointSet PointSet::unioned(const PointSet& a, const PointSet& b) {
  std::vector<Point> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return PointSet(std::move(out));
}

double PointSet::diameter() const {
  // Exact pairwise scan for small sets; bounding-box estimate above that.
  if (pts_.size() <= 512) {
    long best = 0;
    for (size_t i = 0; i < pts_.size(); ++i)
      for (size_t j = i + 1; j < pts_.size(); ++j)
        best = std::max(best, (pts_[i] - pts_[j]).norm2_sq());
    return std::sqrt(static_cast<double>(best));
  }
  Point lo = pts_[0], hi = pts_[0];
  for (const Point& p : pts_)
    for (int i = 0; i < 4; ++i) {
      lo[i] = std::min(lo[i], p[i]);
      hi[i] = std::max(hi[i], p[i]);
    }
  return (hi - lo).norm2();
}

Point PointSet::centroid_rounded() const {
  std::array<long, 4> acc{0, 0, 0, 0};
  for (const Point& p : pts_)
    for (int i = 0; i < 4; ++i) acc[static_cast<size_t>(i)] += p[i];
  Point out;
  for (int i = 0; i < 4; ++i)
    out[i] = static_cast<int>(std::lround(
        static_cast<double>(acc[static_cast<size_t>(i)]) / static_cast<double>(pts_.size())));
  return out;
}

PointMemberTable::PointMemberTable(std::span<const Point> pts) {
  size_t cap = 16;
  while (cap < pts.size() * 2) cap <<= 1;
  slots_.resize(cap);
  used_.assign(cap, 0);
  mask_ = cap - 1;
  PointHash hasher;
  for (const Point& p : pts) {
    size_t i = hasher(p) & mask_;
    while (used_[i]) {
      if (slots_[i] == p) goto next;
      i = (i + 1) & mask_;
    }
    slots_[i] = p;
    used_[i] = 1;
    ++count_;
  next:;
  }
}

bool PointMemberTable::contains(const Point& p) const {
  if (used_.empty()) return false;
  size_t i = PointHash{}(p) & mask_;
  while (used_[i]) {
    if (slots_[i] == p) return true;
    i = (i + 1) & mask_;
  }
  return false;
}

}  // namespace rwcap
