#include "apfpred/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apfpred/errors.hpp"

namespace apfpred {

std::size_t ScanResult::hit_count() const {
  return static_cast<std::size_t>(std::count_if(rays.begin(), rays.end(), [](const Ray& r) { return r.hit; }));
}

double ray_bearing(int i, int n_rays) { return -kPi / 2.0 + kPi * static_cast<double>(i) / (n_rays - 1); }

namespace {

void check_scan_args(const OccupancyGrid& grid, const Vec2& pose, double rho0, int n_rays) {
  if (n_rays < 2) throw std::invalid_argument("scan: need at least two rays");
  if (!(rho0 > 0.0)) throw std::invalid_argument("scan: rho0 must be positive");
  if (!grid.contains(pose)) throw std::invalid_argument("scan: pose outside grid");
  if (grid.occupied_at(pose)) throw SensorError("scan: pose inside an occupied cell");
}

Ray cast_one(const OccupancyGrid& grid, const Vec2& pose, double heading, double rho0, int i, int n_rays) {
  const double bearing = ray_bearing(i, n_rays);
  const HitReport r = raycast(grid, pose, unit_from_angle(heading + bearing), rho0);
  return {bearing, r.hit, r.hit ? r.distance : rho0};
}

}  // namespace

ScanResult scan_serial(const OccupancyGrid& grid, const Vec2& pose, double heading, double rho0, int n_rays) {
  check_scan_args(grid, pose, rho0, n_rays);
  ScanResult out{pose, heading, rho0, std::vector<Ray>(static_cast<std::size_t>(n_rays))};
  for (int i = 0; i < n_rays; ++i) out.rays[static_cast<std::size_t>(i)] = cast_one(grid, pose, heading, rho0, i, n_rays);
  return out;
}

ScanResult scan(const OccupancyGrid& grid, const Vec2& pose, double heading, double rho0, int n_rays) {
  check_scan_args(grid, pose, rho0, n_rays);
  ScanResult out{pose, heading, rho0, std::vector<Ray>(static_cast<std::size_t>(n_rays))};
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_rays; ++i) out.rays[static_cast<std::size_t>(i)] = cast_one(grid, pose, heading, rho0, i, n_rays);
  return out;
}

double occupied_fraction(const ScanResult& scan) {
  if (scan.rays.empty()) throw std::invalid_argument("occupied_fraction: empty scan");
  return static_cast<double>(scan.hit_count()) / static_cast<double>(scan.rays.size());
}

namespace {

struct FootprintWindow {
  int ix0, ix1, iy0, iy1;
};

FootprintWindow footprint_window(const OccupancyGrid& grid, const Vec2& pose, double rho0) {
  const CellIndex lo = grid.cell_of(pose - Vec2{rho0, rho0});
  const CellIndex hi = grid.cell_of(pose + Vec2{rho0, rho0});
  return {std::max(lo.ix, 0), std::min(hi.ix, grid.width() - 1), std::max(lo.iy, 0), std::min(hi.iy, grid.height() - 1)};
}

bool in_footprint(const OccupancyGrid& grid, const Vec2& pose, const Vec2& forward, double rho0, const CellIndex& c) {
  const Vec2 rel = grid.cell_center(c) - pose;
  if (rel.dot(forward) < 0.0) return false;
  if (rel.dot(rel) > rho0 * rho0) return false;
  return line_of_sight(grid, pose, grid.cell_center(c));
}

}  // namespace

CellSet sensing_footprint_serial(const OccupancyGrid& grid, const Vec2& pose, double heading, double rho0) {
  const Vec2 forward = unit_from_angle(heading);
  const FootprintWindow w = footprint_window(grid, pose, rho0);
  std::vector<std::uint32_t> ids;
  if (grid.contains(pose)) ids.push_back(grid.linear(grid.cell_of(pose)));
  for (int iy = w.iy0; iy <= w.iy1; ++iy) {
    for (int ix = w.ix0; ix <= w.ix1; ++ix) {
      if (in_footprint(grid, pose, forward, rho0, {ix, iy})) ids.push_back(grid.linear({ix, iy}));
    }
  }
  return CellSet(std::move(ids));
}

CellSet sensing_footprint(const OccupancyGrid& grid, const Vec2& pose, double heading, double rho0) {
  const Vec2 forward = unit_from_angle(heading);
  const FootprintWindow w = footprint_window(grid, pose, rho0);
  const int rows = std::max(w.iy1 - w.iy0 + 1, 0);
  std::vector<std::vector<std::uint32_t>> per_row(static_cast<std::size_t>(rows));
#pragma omp parallel for schedule(dynamic, 4)
  for (int r = 0; r < rows; ++r) {
    const int iy = w.iy0 + r;
    auto& row = per_row[static_cast<std::size_t>(r)];
    for (int ix = w.ix0; ix <= w.ix1; ++ix) {
      if (in_footprint(grid, pose, forward, rho0, {ix, iy})) row.push_back(grid.linear({ix, iy}));
    }
  }
  std::vector<std::uint32_t> ids;
  if (grid.contains(pose)) ids.push_back(grid.linear(grid.cell_of(pose)));
  for (const auto& row : per_row) ids.insert(ids.end(), row.begin(), row.end());
  return CellSet(std::move(ids));
}

std::vector<Vec2> obstacle_vectors(const ScanResult& scan) {
  std::vector<Vec2> out;
  out.reserve(scan.rays.size());
  for (const Ray& r : scan.rays) {
    if (r.hit) out.push_back(unit_from_angle(scan.heading + r.bearing) * r.distance);
  }
  return out;
}

std::vector<Vec2> obstacle_points(const ScanResult& scan) {
  std::vector<Vec2> out = obstacle_vectors(scan);
  for (Vec2& v : out) v += scan.pose;
  return out;
}

}  // namespace apfpred
