#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "affmap/core.hpp"
#include "affmap/mapping.hpp"

namespace affmap::planner {

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

struct NavQuery {
  std::string verb;
  std::optional<std::string> object;
  Cell start;
};

struct NavPath {
  std::vector<Cell> cells;
  double cost_m = 0.0;
};

namespace detail {

inline double cell_distance(const Cell& a, const Cell& b) {
  return std::hypot(static_cast<double>(a.row - b.row), static_cast<double>(a.col - b.col));
}

// 8-connected moves; diagonal steps cost sqrt(2) cells.
inline constexpr int kMoves[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                     {0, 1},   {1, -1}, {1, 0}, {1, 1}};

// Diagonal moves may not cut corners: both orthogonal neighbors must be free.
inline bool step_allowed(const mapping::OccupancyGrid& grid, const Cell& from, int dr, int dc) {
  if (!grid.is_free(from.row + dr, from.col + dc)) return false;
  if (dr != 0 && dc != 0)
    return grid.is_free(from.row + dr, from.col) && grid.is_free(from.row, from.col + dc);
  return true;
}

}  // namespace detail

// Scores affordance cells by the number of map points recorded in them that
// carry the queried verb (and object, when filtered); ties break by distance
// to the start, then row-major index. The returned goal is the best cell
// itself when free, otherwise its nearest free 8-neighbor (nearest to the
// start). The chosen affordance cell is reported through `affordance_cell`.
inline Cell select_goal(const mapping::OccupancyGrid& grid, const mapping::AffordanceMap3D& map,
                        const NavQuery& query, Cell* affordance_cell = nullptr) {
  int verb_index = -1;
  for (size_t k = 0; k < map.classes.size(); ++k)
    if (map.classes[k] == query.verb) verb_index = static_cast<int>(k);
  if (verb_index < 0)
    fail(errc::affordance_not_found, "verb '" + query.verb + "' not present in the map");
  std::int32_t object_index = -1;
  if (query.object) {
    for (size_t i = 0; i < map.objects.size(); ++i)
      if (map.objects[i] == *query.object) object_index = static_cast<std::int32_t>(i);
    if (object_index < 0)
      fail(errc::affordance_not_found, "object '" + *query.object + "' not present in the map");
  }

  std::map<Cell, int> counts;  // deterministic iteration order
  const std::uint64_t bit = std::uint64_t{1} << verb_index;
  for (const mapping::MapPoint& p : map.points) {
    if (!(p.class_mask & bit)) continue;
    if (query.object && p.object_id != object_index) continue;
    auto [row, col] = grid.cell_of(grid.planar(p.position));
    if (grid.in_bounds(row, col)) ++counts[{row, col}];
  }
  if (counts.empty())
    fail(errc::affordance_not_found, "no grid cell carries affordance '" + query.verb + "'");

  // Candidate affordance cells in score order.
  std::vector<std::pair<Cell, int>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    double da = detail::cell_distance(a.first, query.start);
    double db = detail::cell_distance(b.first, query.start);
    if (da != db) return da < db;
    return a.first < b.first;  // row-major
  });

  for (const auto& [cell, count] : ranked) {
    // Standing cell: the affordance cell itself when free, otherwise the
    // free 8-neighbor nearest to the start.
    if (grid.is_free(cell.row, cell.col)) {
      if (affordance_cell) *affordance_cell = cell;
      return cell;
    }
    std::vector<Cell> candidates;
    for (const auto& mv : detail::kMoves) {
      Cell n{cell.row + mv[0], cell.col + mv[1]};
      if (grid.is_free(n.row, n.col)) candidates.push_back(n);
    }
    if (candidates.empty()) continue;
    std::sort(candidates.begin(), candidates.end(), [&](const Cell& a, const Cell& b) {
      double da = detail::cell_distance(a, query.start);
      double db = detail::cell_distance(b, query.start);
      if (da != db) return da < db;
      return a < b;
    });
    if (affordance_cell) *affordance_cell = cell;
    return candidates.front();
  }
  fail(errc::affordance_not_found,
       "no free standing cell next to any '" + query.verb + "' cell");
}

// A* over the free space with the Euclidean heuristic (admissible and
// consistent for unit/sqrt(2) step costs). Returns a cost-minimal path in
// meters; expansion order is fixed so repeated runs yield identical paths.
inline NavPath astar(const mapping::OccupancyGrid& grid, Cell start, Cell goal) {
  if (!grid.in_bounds(start.row, start.col) || !grid.in_bounds(goal.row, goal.col))
    fail(errc::blocked_endpoint, "start or goal outside the grid");
  if (!grid.is_free(start.row, start.col) || !grid.is_free(goal.row, goal.col))
    fail(errc::blocked_endpoint, "start or goal cell is not free");

  const size_t n = grid.states.size();
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> g(n, kInf);
  std::vector<std::int32_t> parent(n, -1);
  std::vector<bool> closed(n, false);

  auto heuristic = [&](const Cell& c) { return detail::cell_distance(c, goal); };
  struct Node {
    double f;
    double g;
    std::int32_t index;
    bool operator>(const Node& o) const {
      if (f != o.f) return f > o.f;
      if (g != o.g) return g < o.g;  // prefer deeper nodes on equal f
      return index > o.index;        // fixed order among exact ties
    }
  };
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;

  auto idx = [&](const Cell& c) { return static_cast<std::int32_t>(grid.index(c.row, c.col)); };
  g[idx(start)] = 0.0;
  open.push({heuristic(start), 0.0, idx(start)});

  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (closed[node.index]) continue;
    closed[node.index] = true;
    Cell cell{static_cast<int>(node.index / grid.cols), static_cast<int>(node.index % grid.cols)};
    if (cell == goal) break;
    for (const auto& mv : detail::kMoves) {
      if (!detail::step_allowed(grid, cell, mv[0], mv[1])) continue;
      Cell next{cell.row + mv[0], cell.col + mv[1]};
      double step = (mv[0] != 0 && mv[1] != 0) ? std::numbers::sqrt2 : 1.0;
      // Heuristic consistency (implies admissibility) on every expansion.
      assert(heuristic(cell) <= step + heuristic(next) + 1e-9);
      double tentative = g[node.index] + step;
      std::int32_t ni = idx(next);
      if (tentative < g[ni]) {
        g[ni] = tentative;
        parent[ni] = node.index;
        open.push({tentative + heuristic(next), tentative, ni});
      }
    }
  }

  if (g[idx(goal)] == kInf) fail(errc::no_path, "free-space components are disconnected");

  NavPath path;
  path.cost_m = g[idx(goal)] * grid.cell_size;
  for (std::int32_t i = idx(goal); i != -1; i = parent[i])
    path.cells.push_back({static_cast<int>(i / grid.cols), static_cast<int>(i % grid.cols)});
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

struct NavResult {
  NavPath path;
  Cell affordance_cell;
  Cell goal;
};

inline NavResult navigate(const mapping::OccupancyGrid& grid, const mapping::AffordanceMap3D& map,
                          const NavQuery& query) {
  NavResult r;
  r.goal = select_goal(grid, map, query, &r.affordance_cell);
  r.path = astar(grid, query.start, r.goal);
  return r;
}

}  // namespace affmap::planner
