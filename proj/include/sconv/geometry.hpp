// Copyright (c) 2026 The sconv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sconv {

// Coordinate packing constants: 21 bits per axis with a bias, so a full
// (x, y, z) triple fits one 64-bit key in lexicographic order.
constexpr std::int32_t COORD_BIAS = 1 << 20;
constexpr std::int32_t COORD_MAX = COORD_BIAS - 1;
constexpr std::int32_t COORD_MIN = -COORD_MAX;
constexpr std::uint64_t COORD_FIELD_MASK = (1ull << 21) - 1;

using PackedKey = std::uint64_t;

// Largest key a valid coordinate can pack to. Anything above is a sentinel.
constexpr PackedKey PACKED_KEY_MAX = 0x7FFFFFFFFFFFFFFFull;

/// Signed integer voxel coordinate. Default comparison is lexicographic
/// (x, y, z), which matches PackedKey order.
struct Coordinate {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  auto operator<=>(const Coordinate&) const = default;

  Coordinate operator+(const Coordinate& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Coordinate operator-(const Coordinate& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

inline bool component_in_range(std::int64_t v) {
  return v >= COORD_MIN && v <= COORD_MAX;
}

inline bool in_range(const Coordinate& c) {
  return component_in_range(c.x) && component_in_range(c.y) && component_in_range(c.z);
}

inline void check_component(std::int64_t v, char axis) {
  if (!component_in_range(v)) {
    throw std::out_of_range(std::string("coordinate ") + axis + " out of range: " +
                            std::to_string(v));
  }
}

/// Order-preserving 64-bit encoding: pack(a) < pack(b) iff a < b lexicographically.
inline PackedKey pack_key(const Coordinate& c) {
  check_component(c.x, 'x');
  check_component(c.y, 'y');
  check_component(c.z, 'z');
  const auto ux = static_cast<std::uint64_t>(c.x + COORD_BIAS);
  const auto uy = static_cast<std::uint64_t>(c.y + COORD_BIAS);
  const auto uz = static_cast<std::uint64_t>(c.z + COORD_BIAS);
  return (ux << 42) | (uy << 21) | uz;
}

inline Coordinate unpack_key(PackedKey k) {
  return {static_cast<std::int32_t>((k >> 42) & COORD_FIELD_MASK) - COORD_BIAS,
          static_cast<std::int32_t>((k >> 21) & COORD_FIELD_MASK) - COORD_BIAS,
          static_cast<std::int32_t>(k & COORD_FIELD_MASK) - COORD_BIAS};
}

using CoordList = std::vector<Coordinate>;
// Coordinate lists are shared between layers: a stride-1 layer's output
// coordinates alias its input coordinates instead of copying them.
using CoordsPtr = std::shared_ptr<const CoordList>;

inline CoordsPtr make_coords(CoordList coords) {
  return std::make_shared<const CoordList>(std::move(coords));
}

/// Dense row-major float matrix used for features and buffers.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::int64_t rows, std::int64_t cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), 0.0f) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("negative matrix shape");
  }

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  float& operator()(std::int64_t r, std::int64_t c) { return data_[r * cols_ + c]; }
  float operator()(std::int64_t r, std::int64_t c) const { return data_[r * cols_ + c]; }
  float* row(std::int64_t r) { return data_.data() + r * cols_; }
  const float* row(std::int64_t r) const { return data_.data() + r * cols_; }
  const std::vector<float>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<float> data_;
};

/// Unique voxel coordinates plus an N x C feature matrix. `sorted` marks the
/// coordinate list as nondecreasing under PackedKey order, which lets the
/// next layer skip its sort. `features` may be empty for coordinate-only sets.
struct PointCloud {
  CoordsPtr coords = make_coords({});
  Matrix features;
  bool sorted = false;

  std::int64_t size() const { return static_cast<std::int64_t>(coords->size()); }
  std::int64_t channels() const { return features.cols(); }
};

/// The K^3 weight offsets Delta(K, s) = {s*t : t in [-K/2 .. K/2]}^3,
/// sorted lexicographically (strictly increasing under PackedKey order).
struct OffsetSet {
  int kernel_size = 1;
  int stride = 1;
  CoordList offsets;

  int count() const { return static_cast<int>(offsets.size()); }
};

inline OffsetSet weight_offsets(int kernel_size, int stride) {
  if (kernel_size < 1 || kernel_size % 2 == 0)
    throw std::invalid_argument("kernel size must be a positive odd integer");
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  const int half = kernel_size / 2;
  check_component(static_cast<std::int64_t>(half) * stride, 'x');
  OffsetSet set;
  set.kernel_size = kernel_size;
  set.stride = stride;
  set.offsets.reserve(static_cast<std::size_t>(kernel_size) * kernel_size * kernel_size);
  for (int tx = -half; tx <= half; ++tx)
    for (int ty = -half; ty <= half; ++ty)
      for (int tz = -half; tz <= half; ++tz)
        set.offsets.push_back({tx * stride, ty * stride, tz * stride});
  return set;
}

// Floor division rounding toward minus infinity, exact for negatives.
inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Downsampled output coordinates: each input coordinate maps to
/// (floor(x/s)*s, floor(y/s)*s, floor(z/s)*s), duplicates removed, sorted.
/// For s == 1 the returned list aliases the input list (no copy, no sort)
/// and keeps the input's sort state.
inline PointCloud generate_output_coords(const PointCloud& input, int stride) {
  if (stride < 1) throw std::invalid_argument("stride must be positive");
  if (stride == 1) return PointCloud{input.coords, Matrix{}, input.sorted};
  std::vector<PackedKey> keys;
  keys.reserve(input.coords->size());
  for (const Coordinate& c : *input.coords) {
    const Coordinate q{static_cast<std::int32_t>(floor_div(c.x, stride) * stride),
                       static_cast<std::int32_t>(floor_div(c.y, stride) * stride),
                       static_cast<std::int32_t>(floor_div(c.z, stride) * stride)};
    keys.push_back(pack_key(q));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  CoordList out;
  out.reserve(keys.size());
  for (PackedKey k : keys) out.push_back(unpack_key(k));
  return PointCloud{make_coords(std::move(out)), Matrix{}, true};
}

/// Floors real-valued points to the integer grid at `resolution`, merging
/// duplicate voxels. Merged feature rows are the arithmetic mean of the
/// contributing rows, accumulated in a canonical order so the result is
/// exactly independent of the input point order.
inline PointCloud voxelize(const std::vector<std::array<double, 3>>& points,
                           const Matrix& features, double resolution) {
  if (!(resolution > 0.0)) throw std::invalid_argument("resolution must be positive");
  const auto n = static_cast<std::int64_t>(points.size());
  if (!features.empty() && features.rows() != n)
    throw std::invalid_argument("feature row count does not match point count");
  const std::int64_t channels = features.empty() ? 0 : features.cols();

  struct Entry {
    PackedKey key;
    std::int64_t point;
  };
  std::vector<Entry> entries;
  entries.reserve(points.size());
  const char axes[3] = {'x', 'y', 'z'};
  for (std::int64_t i = 0; i < n; ++i) {
    Coordinate c;
    std::int32_t* comp[3] = {&c.x, &c.y, &c.z};
    for (int a = 0; a < 3; ++a) {
      const double v = std::floor(points[i][a] / resolution);
      if (!(v >= COORD_MIN && v <= COORD_MAX))
        throw std::out_of_range(std::string("voxel index ") + axes[a] + " out of range");
      *comp[a] = static_cast<std::int32_t>(v);
    }
    entries.push_back({pack_key(c), i});
  }

  // Canonical order: by voxel key, then by original real point, then by
  // feature row. Exact duplicates are interchangeable, so the mean below is
  // permutation invariant in exact floating-point terms.
  std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key < b.key;
    if (points[a.point] != points[b.point]) return points[a.point] < points[b.point];
    for (std::int64_t c = 0; c < channels; ++c) {
      const float fa = features(a.point, c);
      const float fb = features(b.point, c);
      if (fa != fb) return fa < fb;
    }
    return false;
  });

  CoordList coords;
  Matrix merged;
  std::vector<float> rows;
  std::vector<double> acc(static_cast<std::size_t>(channels));
  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    std::fill(acc.begin(), acc.end(), 0.0);
    while (j < entries.size() && entries[j].key == entries[i].key) {
      for (std::int64_t c = 0; c < channels; ++c) acc[c] += features(entries[j].point, c);
      ++j;
    }
    coords.push_back(unpack_key(entries[i].key));
    const auto count = static_cast<double>(j - i);
    for (std::int64_t c = 0; c < channels; ++c)
      rows.push_back(static_cast<float>(acc[c] / count));
    i = j;
  }

  PointCloud cloud;
  const auto voxels = static_cast<std::int64_t>(coords.size());
  cloud.coords = make_coords(std::move(coords));
  if (channels > 0) {
    cloud.features = Matrix(voxels, channels);
    for (std::int64_t r = 0; r < voxels; ++r)
      for (std::int64_t c = 0; c < channels; ++c)
        cloud.features(r, c) = rows[static_cast<std::size_t>(r * channels + c)];
  }
  cloud.sorted = true;
  return cloud;
}

}  // namespace sconv
