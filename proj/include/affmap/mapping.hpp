#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "affmap/core.hpp"
#include "affmap/geometry.hpp"

namespace affmap::mapping {

// World point carrying the full multi-label class set of its source pixel.
// object_id indexes the map's object vocabulary; -1 when the source carries
// no object information (mask lifts).
struct MapPoint {
  Vec3 position = Vec3::Zero();
  std::uint64_t class_mask = 0;
  std::int64_t source_frame = 0;
  std::int32_t object_id = -1;
};

// Accumulated world-frame affordance points of one environment. No fusion is
// performed: co-located points with different class sets are all kept.
struct AffordanceMap3D {
  std::string environment_id;
  std::vector<std::string> classes;
  std::vector<std::string> objects;  // object name vocabulary, grows on use
  std::vector<MapPoint> points;

  std::int32_t object_id(const std::string& name) {
    for (size_t i = 0; i < objects.size(); ++i)
      if (objects[i] == name) return static_cast<std::int32_t>(i);
    objects.push_back(name);
    return static_cast<std::int32_t>(objects.size() - 1);
  }
};

struct LiftStats {
  std::size_t lifted = 0;
  std::size_t skipped_invalid_depth = 0;
};

// Unprojects every stride-th active pixel of a multi-label mask; each emitted
// point carries the full class set of its pixel.
inline std::vector<MapPoint> lift_mask(const LabelField& mask, const FrameContext& ctx, int stride,
                                       LiftStats* stats = nullptr) {
  if (stride < 1) fail(errc::domain_error, "stride must be >= 1");
  const int K = mask.num_classes();
  if (K > 64) fail(errc::domain_error, "class masks support at most 64 classes");
  LiftStats local;
  LiftStats& s = stats ? *stats : local;
  std::vector<MapPoint> batch;
  for (int y = 0; y < mask.height; y += stride) {
    for (int x = 0; x < mask.width; x += stride) {
      std::uint64_t bits = 0;
      for (int k = 0; k < K; ++k)
        if (mask.at(k, y, x)) bits |= std::uint64_t{1} << k;
      if (bits == 0) continue;
      double d = ctx.scale.value * ctx.depth.dense.at(y, x);
      if (!(d > 0) || !std::isfinite(d)) {
        ++s.skipped_invalid_depth;
        continue;
      }
      batch.push_back({unproject(Vec2(x, y), d, ctx.pose, ctx.intrinsics), bits, ctx.frame_id, -1});
      ++s.lifted;
    }
  }
  return batch;
}

inline void accumulate(AffordanceMap3D& map, std::span<const MapPoint> batch) {
  map.points.insert(map.points.end(), batch.begin(), batch.end());
}

enum class GroundPlane { xz, xy };

inline GroundPlane parse_ground_plane(const std::string& s) {
  if (s == "xz") return GroundPlane::xz;
  if (s == "xy") return GroundPlane::xy;
  fail(errc::usage_error, "ground plane must be xz or xy");
}

inline const char* ground_plane_name(GroundPlane p) {
  return p == GroundPlane::xz ? "xz" : "xy";
}

struct OccupancyConfig {
  double cell_size = 0.10;
  double band_min = 0.1;   // height band relative to height_reference
  double band_max = 2.0;
  double height_reference = 0.0;  // typically the lowest camera height
  int min_points = 3;
  GroundPlane plane = GroundPlane::xz;
};

enum class CellState : std::uint8_t { free = 0, occupied = 1, unknown = 2 };

// Planar occupancy over the observed bounding rectangle of the in-band cloud.
// Queries outside the rectangle are unknown. Cells additionally carry the
// union of class sets of the map points that land in them.
struct OccupancyGrid {
  Vec2 origin = Vec2::Zero();  // min corner in ground-plane coordinates
  double cell_size = 0.10;
  int rows = 0, cols = 0;
  GroundPlane plane = GroundPlane::xz;
  std::vector<CellState> states;
  std::vector<std::uint64_t> cell_class_masks;

  size_t index(int row, int col) const { return static_cast<size_t>(row) * cols + col; }
  bool in_bounds(int row, int col) const {
    return row >= 0 && row < rows && col >= 0 && col < cols;
  }
  CellState state(int row, int col) const {
    return in_bounds(row, col) ? states[index(row, col)] : CellState::unknown;
  }
  bool is_free(int row, int col) const { return state(row, col) == CellState::free; }

  // Ground-plane coordinates (a, b) of a world point: columns follow a,
  // rows follow b.
  Vec2 planar(const Vec3& p) const {
    return plane == GroundPlane::xz ? Vec2(p.x(), p.z()) : Vec2(p.x(), p.y());
  }
  double height_of(const Vec3& p) const { return plane == GroundPlane::xz ? p.y() : p.z(); }

  // Cell of a planar coordinate; may be out of bounds.
  std::pair<int, int> cell_of(const Vec2& planar_point) const {
    int col = static_cast<int>(std::floor((planar_point.x() - origin.x()) / cell_size));
    int row = static_cast<int>(std::floor((planar_point.y() - origin.y()) / cell_size));
    return {row, col};
  }
  Vec2 cell_center(int row, int col) const {
    return {origin.x() + (col + 0.5) * cell_size, origin.y() + (row + 0.5) * cell_size};
  }
};

// Unions map point class sets into the cells containing them. Points outside
// the grid are ignored; the returned count reports them.
inline std::size_t attach_points(OccupancyGrid& grid, const AffordanceMap3D& map) {
  grid.cell_class_masks.assign(grid.states.size(), 0);
  std::size_t outside = 0;
  for (const MapPoint& p : map.points) {
    auto [row, col] = grid.cell_of(grid.planar(p.position));
    if (!grid.in_bounds(row, col)) {
      ++outside;
      continue;
    }
    grid.cell_class_masks[grid.index(row, col)] |= p.class_mask;
  }
  return outside;
}

// Builds the occupancy grid from the SfM cloud: cells with at least
// min_points in-band points are occupied, the rest of the observed bounding
// rectangle is free. Affordance class sets come from the map points.
inline OccupancyGrid to_occupancy(const AffordanceMap3D& map, std::span<const Vec3> cloud,
                                  const OccupancyConfig& cfg) {
  if (cloud.empty()) fail(errc::empty_cloud, "occupancy grid needs a point cloud");
  if (!(cfg.cell_size > 0)) fail(errc::domain_error, "cell_size must be positive");

  OccupancyGrid grid;
  grid.cell_size = cfg.cell_size;
  grid.plane = cfg.plane;

  std::vector<Vec2> in_band;
  in_band.reserve(cloud.size());
  for (const Vec3& p : cloud) {
    double h = grid.height_of(p) - cfg.height_reference;
    if (h >= cfg.band_min && h <= cfg.band_max) in_band.push_back(grid.planar(p));
  }
  if (in_band.empty()) fail(errc::empty_cloud, "no cloud points inside the height band");

  Vec2 lo = in_band[0], hi = in_band[0];
  for (const Vec2& p : in_band) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  grid.origin = lo;
  grid.cols = static_cast<int>(std::floor((hi.x() - lo.x()) / cfg.cell_size)) + 1;
  grid.rows = static_cast<int>(std::floor((hi.y() - lo.y()) / cfg.cell_size)) + 1;
  grid.states.assign(static_cast<size_t>(grid.rows) * grid.cols, CellState::free);

  std::vector<int> counts(grid.states.size(), 0);
  for (const Vec2& p : in_band) {
    auto [row, col] = grid.cell_of(p);
    if (grid.in_bounds(row, col)) ++counts[grid.index(row, col)];
  }
  for (size_t i = 0; i < counts.size(); ++i)
    if (counts[i] >= cfg.min_points) grid.states[i] = CellState::occupied;

  attach_points(grid, map);
  return grid;
}

// Deterministic class color: golden-angle hue walk, full saturation.
inline std::array<std::uint8_t, 3> class_color(int k) {
  double hue = std::fmod(k * 0.61803398874989485, 1.0) * 6.0;
  int sector = static_cast<int>(hue);
  double f = hue - sector;
  double v = 0.95, s = 0.75;
  double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  double r = 0, g = 0, b = 0;
  switch (sector % 6) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    case 5: r = v; g = p; b = q; break;
  }
  return {static_cast<std::uint8_t>(r * 255), static_cast<std::uint8_t>(g * 255),
          static_cast<std::uint8_t>(b * 255)};
}

// Lowest set bit = first class in vocabulary order; used for the PLY color.
inline int dominant_class(std::uint64_t mask) {
  for (int k = 0; k < 64; ++k)
    if (mask & (std::uint64_t{1} << k)) return k;
  return -1;
}

}  // namespace affmap::mapping
