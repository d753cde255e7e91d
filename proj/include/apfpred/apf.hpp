#ifndef APFPRED_APF_HPP_
#define APFPRED_APF_HPP_

#include <array>
#include <cstddef>
#include <optional>
#include <span>

#include "apfpred/geometry.hpp"
#include "apfpred/world.hpp"

namespace apfpred {

struct ForceParams {
  double xi = 1.0;    // attractive gain
  double eta = 1.0;   // repulsive gain
  double rho0 = 2.0;  // influence radius == sensor range
};

/// Pose under the fixed-step point model.
struct VehicleState {
  Vec2 position;
  double heading = 0.0;  // direction of the last motion
  int t = 0;
};

/// Sign convention: f_att points at the goal, f_rep points away from obstacles, f_tot = f_att + f_rep.
struct ForceDecomposition {
  Vec2 f_att;
  Vec2 f_rep;
  Vec2 f_tot;
};

Vec2 attractive_force(const Vec2& position, const Vec2& goal, double xi);

/// Magnitude of one obstacle's push at range d: eta / d^2 * (1/d - 1/rho0).
double repulsive_magnitude(double d, double eta, double rho0);

/// Sum over UGV->obstacle vectors. Every |d_i| must lie in (0, rho0]; a zero-length
/// vector throws SingularityError.
Vec2 repulsive_force(std::span<const Vec2> obstacles, double eta, double rho0);

/// Same law over world obstacle points; points farther than rho0 are outside the sensed set and ignored.
Vec2 repulsive_force_from_points(const Vec2& position, std::span<const Vec2> points, double eta, double rho0);

ForceDecomposition decompose(const Vec2& f_att, const Vec2& f_rep);

/// Forces at `position` against a fixed set of world obstacle points.
ForceDecomposition forces_at(const Vec2& position, const Vec2& goal, std::span<const Vec2> points,
                             const ForceParams& params);

/// Moves `delta` along f_tot. Throws StuckError for a zero force and CollisionError when the
/// new position is occupied.
VehicleState step(const OccupancyGrid& grid, const VehicleState& state, const Vec2& f_tot, double delta);

struct ParallelCriterion {
  double tol = deg_to_rad(5.0);
  /// f_rep must exceed this fraction of f_att before opposition counts.
  double min_rep_ratio = 0.05;
};

/// Forces in direct opposition: the angle between f_att and -f_rep is within tol.
bool is_parallel(const Vec2& f_att, const Vec2& f_rep, const ParallelCriterion& criterion = {});

/// Marches from `position` along the current f_tot direction and returns the first point where
/// |f_att| - |f_rep| changes sign, refined by bisection to 1e-9 m. Forces use only `known_obstacles`.
/// Returns nullopt when no sign change occurs before the nearest known obstacle.
std::optional<Vec2> project_local_minimum(std::span<const Vec2> known_obstacles, const Vec2& position,
                                          const Vec2& goal, const ForceParams& params);

inline constexpr double kDefaultEpsStop = 1e-3;

bool detect_stuck(const Vec2& f_tot, double eps_stop = kDefaultEpsStop);

/// Flags a position within delta/2 of one of the last three recorded positions.
class OscillationDetector {
 public:
  explicit OscillationDetector(double delta) : radius_(delta / 2.0) {}

  void record(const Vec2& position);
  bool revisits(const Vec2& candidate) const;

 private:
  double radius_;
  std::array<Vec2, 3> recent_{};
  std::size_t count_ = 0;
  std::size_t next_ = 0;
};

}  // namespace apfpred

#endif  // APFPRED_APF_HPP_
