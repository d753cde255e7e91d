#ifndef APFPRED_WORLD_HPP_
#define APFPRED_WORLD_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "apfpred/geometry.hpp"

namespace apfpred {

struct CellIndex {
  int ix = 0;
  int iy = 0;
  constexpr bool operator==(const CellIndex&) const = default;
};

/// Immutable planar occupancy lattice. Cell (ix, iy) covers
/// [origin.x + ix*res, origin.x + (ix+1)*res) x [origin.y + iy*res, origin.y + (iy+1)*res).
class OccupancyGrid {
 public:
  OccupancyGrid(int width, int height, double resolution, Vec2 origin, std::vector<std::uint8_t> cells);

  /// All-free grid.
  static OccupancyGrid empty(int width, int height, double resolution, Vec2 origin = {});

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }

  bool in_bounds(const CellIndex& c) const { return c.ix >= 0 && c.iy >= 0 && c.ix < width_ && c.iy < height_; }
  bool contains(const Vec2& p) const { return in_bounds(cell_of(p)); }

  /// Out-of-bounds cells read as free.
  bool occupied(const CellIndex& c) const { return in_bounds(c) && cells_[linear(c)] != 0; }
  bool occupied_at(const Vec2& p) const { return occupied(cell_of(p)); }

  CellIndex cell_of(const Vec2& p) const;
  Vec2 cell_center(const CellIndex& c) const;

  std::uint32_t linear(const CellIndex& c) const {
    return static_cast<std::uint32_t>(c.iy) * static_cast<std::uint32_t>(width_) + static_cast<std::uint32_t>(c.ix);
  }
  CellIndex unlinear(std::uint32_t id) const {
    return {static_cast<int>(id % static_cast<std::uint32_t>(width_)), static_cast<int>(id / static_cast<std::uint32_t>(width_))};
  }

  std::size_t occupied_count() const;

 private:
  int width_;
  int height_;
  double resolution_;
  Vec2 origin_;
  std::vector<std::uint8_t> cells_;
};

/// Mutable builder used to author grids before freezing them.
class GridBuilder {
 public:
  GridBuilder(int width, int height, double resolution, Vec2 origin = {});

  /// Marks every cell whose center lies in the axis-aligned world rectangle [lo, hi].
  GridBuilder& fill_rect(const Vec2& lo, const Vec2& hi);
  GridBuilder& set(const CellIndex& c, bool occupied = true);

  OccupancyGrid build() const;

 private:
  int width_;
  int height_;
  double resolution_;
  Vec2 origin_;
  std::vector<std::uint8_t> cells_;
};

/// Sorted, duplicate-free set of linear cell ids.
class CellSet {
 public:
  CellSet() = default;
  /// Accepts ids in any order; duplicates are removed.
  explicit CellSet(std::vector<std::uint32_t> ids);

  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  bool contains(std::uint32_t id) const;
  /// True when every element of `other` is in this set.
  bool includes(const CellSet& other) const;

  CellSet united(const CellSet& other) const;
  CellSet intersected(const CellSet& other) const;
  CellSet minus(const CellSet& other) const;

  std::span<const std::uint32_t> ids() const { return ids_; }
  bool operator==(const CellSet&) const = default;

 private:
  std::vector<std::uint32_t> ids_;
};

struct HitReport {
  bool hit = false;
  double distance = 0.0;
  std::optional<CellIndex> cell;  // first occupied cell when hit
};

/// Range to the entry face of the first occupied cell along the ray, by exact cell stepping.
/// Throws SensorError if `origin` sits in an occupied cell.
HitReport raycast(const OccupancyGrid& grid, const Vec2& origin, const Vec2& direction, double max_range);

/// True when the segment origin->target crosses no occupied cell other than the one containing `target`.
bool line_of_sight(const OccupancyGrid& grid, const Vec2& origin, const Vec2& target);

OccupancyGrid load_map(std::string_view document);
std::string save_map(const OccupancyGrid& grid);
OccupancyGrid load_map_file(const std::filesystem::path& path);
void save_map_file(const OccupancyGrid& grid, const std::filesystem::path& path);

struct ScenarioConfig {
  std::string name;
  OccupancyGrid map = OccupancyGrid::empty(1, 1, 1.0);
  std::string map_path;  // relative path as written in a scenario document; empty for built-ins
  Vec2 start;
  Vec2 goal;
  double xi = 1.0;
  double eta = 1.0;
  double rho0 = 2.0;
  double delta = 0.05;
  double gamma = 0.85;
  int n_rays = 181;
  int max_steps = 500;
};

/// Throws ConfigError describing the first violated invariant.
void validate(const ScenarioConfig& config);

/// "wall" and "hallway" benchmark scenes.
std::vector<ScenarioConfig> builtin_scenarios();
std::optional<ScenarioConfig> builtin_scenario(std::string_view name);

/// Scenario JSON; `map` is resolved relative to the document's directory.
ScenarioConfig load_scenario_file(const std::filesystem::path& path);
/// Writes `<dir>/<name>.json` and `<dir>/<name>.map`.
std::filesystem::path save_scenario(const ScenarioConfig& config, const std::filesystem::path& dir);

}  // namespace apfpred

#endif  // APFPRED_WORLD_HPP_
