#include "rwcap/walk.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rwcap {

WalkPath::WalkPath(std::vector<Point> positions, uint64_t seed, uint64_t stream_id)
    : positions_(std::move(positions)), seed_(seed), stream_id_(stream_id) {
  // Slices of a walk keep their absolute positions, so only the step
  // structure is enforced here; sample_walk always starts at the origin.
  if (positions_.empty()) throw std::invalid_argument("walk needs S_0");
  for (size_t i = 1; i < positions_.size(); ++i)
    if ((positions_[i] - positions_[i - 1]).norm1() != 1)
      throw std::invalid_argument("walk has a non-unit step");
}

WalkPath sample_walk(size_t n, uint64_t seed, uint64_t stream_id) {
  CounterRng rng(seed, stream_id);
  std::vector<Point> pos;
  pos.reserve(n + 1);
  Point cur = kOrigin;
  pos.push_back(cur);
  for (size_t i = 0; i < n; ++i) {
    cur = cur + step_vector(rng.next_step_code());
    pos.push_back(cur);
  }
  return WalkPath(std::move(pos), seed, stream_id);
}

PointSet range_of(const WalkPath& path, size_t a, size_t b) {
  if (a > b || b > path.length())
    throw std::out_of_range("range_of: need 0 <= a <= b <= length");
  std::vector<Point> pts(path.positions().begin() + static_cast<long>(a),
                         path.positions().begin() + static_cast<long>(b) + 1);
  return PointSet(std::move(pts));
}

WalkPath segment(const WalkPath& path, int level, int k) {
  if (level < 0 || level > 30) throw std::invalid_argument("segment: bad level");
  size_t parts = size_t{1} << level;
  if (path.length() % parts != 0)
    throw std::invalid_argument("segment: length not divisible by 2^level");
  if (k < 1 || static_cast<size_t>(k) > parts)
    throw std::out_of_range("segment: k out of range");
  size_t m = path.length() / parts;
  size_t lo = (static_cast<size_t>(k) - 1) * m;
  std::vector<Point> pos(path.positions().begin() + static_cast<long>(lo),
                         path.positions().begin() + static_cast<long>(lo + m) + 1);
  return WalkPath(std::move(pos), path.seed(), path.stream_id());
}

namespace {
constexpr char kMagic[8] = {'R', 'W', 'C', 'W', 'A', 'L', 'K', '1'};

int code_of_step(const Point& d) {
  for (int c = 0; c < 8; ++c)
    if (step_vector(c) == d) return c;
  throw std::logic_error("non-unit step");
}

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("walk file truncated");
  return v;
}
}  // namespace

void write_walk(std::ostream& os, const WalkPath& path) {
  os.write(kMagic, sizeof kMagic);
  put<uint64_t>(os, path.length());
  put<uint64_t>(os, path.seed());
  put<uint64_t>(os, path.stream_id());
  uint64_t acc = 0;
  int bits = 0;
  for (size_t i = 1; i <= path.length(); ++i) {
    uint64_t c = static_cast<uint64_t>(
        code_of_step(path.position(i) - path.position(i - 1)));
    acc |= c << bits;
    bits += 3;
    if (bits >= 8) {
      put<uint8_t>(os, static_cast<uint8_t>(acc & 0xff));
      acc >>= 8;
      bits -= 8;
    }
  }
  if (bits > 0) put<uint8_t>(os, static_cast<uint8_t>(acc & 0xff));
}

WalkPath read_walk(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a walk file");
  auto n = get<uint64_t>(is);
  auto seed = get<uint64_t>(is);
  auto stream = get<uint64_t>(is);
  std::vector<Point> pos;
  pos.reserve(n + 1);
  Point cur = kOrigin;
  pos.push_back(cur);
  uint64_t acc = 0;
  int bits = 0;
  for (uint64_t i = 0; i < n; ++i) {
    while (bits < 3) {
      acc |= static_cast<uint64_t>(get<uint8_t>(is)) << bits;
      bits += 8;
    }
    cur = cur + step_vector(static_cast<int>(acc & 7));
    acc >>= 3;
    bits -= 3;
    pos.push_back(cur);
  }
  return WalkPath(std::move(pos), seed, stream);
}

void save_walk(const std::string& file, const WalkPath& path) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + file);
  write_walk(os, path);
}

WalkPath load_walk(const std::string& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file);
  return read_walk(is);
}

}  // namespace rwcap
