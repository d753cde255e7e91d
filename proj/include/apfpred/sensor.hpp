#ifndef APFPRED_SENSOR_HPP_
#define APFPRED_SENSOR_HPP_

#include <vector>

#include "apfpred/geometry.hpp"
#include "apfpred/world.hpp"

namespace apfpred {

struct Ray {
  double bearing = 0.0;  // relative to heading
  bool hit = false;
  double distance = 0.0;
};

/// One forward half-plane sweep. Bearings increase from -pi/2 to +pi/2 inclusive.
struct ScanResult {
  Vec2 pose;
  double heading = 0.0;
  double rho0 = 0.0;
  std::vector<Ray> rays;

  std::size_t hit_count() const;
};

/// Bearing of ray `i` out of `n_rays` spread uniformly over [-pi/2, +pi/2].
double ray_bearing(int i, int n_rays);

/// OpenMP-parallel over rays. Output is identical to scan_serial.
ScanResult scan(const OccupancyGrid& grid, const Vec2& pose, double heading, double rho0, int n_rays);
/// Single-threaded reference kept for testing and benchmarking.
ScanResult scan_serial(const OccupancyGrid& grid, const Vec2& pose, double heading, double rho0, int n_rays);

/// Hit rays over total rays; the alpha/pi term with a 180 degree field of view.
double occupied_fraction(const ScanResult& scan);

/// Cells whose centers lie in the forward half-disc of radius rho0 and are not shadowed
/// by another occupied cell. The pose's own cell is always included.
CellSet sensing_footprint(const OccupancyGrid& grid, const Vec2& pose, double heading, double rho0);
CellSet sensing_footprint_serial(const OccupancyGrid& grid, const Vec2& pose, double heading, double rho0);

/// UGV->obstacle vectors, one per hit ray.
std::vector<Vec2> obstacle_vectors(const ScanResult& scan);

/// World positions of the hit points (pose + d_i).
std::vector<Vec2> obstacle_points(const ScanResult& scan);

}  // namespace apfpred

#endif  // APFPRED_SENSOR_HPP_
