#include "apfpred/apf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "apfpred/errors.hpp"

namespace apfpred {

Vec2 attractive_force(const Vec2& position, const Vec2& goal, double xi) { return (goal - position) * xi; }

double repulsive_magnitude(double d, double eta, double rho0) { return eta / (d * d) * (1.0 / d - 1.0 / rho0); }

Vec2 repulsive_force(std::span<const Vec2> obstacles, double eta, double rho0) {
  Vec2 sum;
  for (const Vec2& d : obstacles) {
    const double n = d.norm();
    if (n == 0.0) throw SingularityError("repulsive_force: obstacle at zero distance");
    sum += d * (-repulsive_magnitude(n, eta, rho0) / n);
  }
  return sum;
}

Vec2 repulsive_force_from_points(const Vec2& position, std::span<const Vec2> points, double eta, double rho0) {
  Vec2 sum;
  for (const Vec2& p : points) {
    const Vec2 d = p - position;
    const double n = d.norm();
    if (n > rho0) continue;
    if (n == 0.0) throw SingularityError("repulsive_force: obstacle at zero distance");
    sum += d * (-repulsive_magnitude(n, eta, rho0) / n);
  }
  return sum;
}

ForceDecomposition decompose(const Vec2& f_att, const Vec2& f_rep) { return {f_att, f_rep, f_att + f_rep}; }

ForceDecomposition forces_at(const Vec2& position, const Vec2& goal, std::span<const Vec2> points,
                             const ForceParams& params) {
  return decompose(attractive_force(position, goal, params.xi),
                   repulsive_force_from_points(position, points, params.eta, params.rho0));
}

VehicleState step(const OccupancyGrid& grid, const VehicleState& state, const Vec2& f_tot, double delta) {
  if (f_tot.x == 0.0 && f_tot.y == 0.0) throw StuckError("step: total force is zero");
  const double theta = f_tot.angle();
  VehicleState next{state.position + unit_from_angle(theta) * delta, theta, state.t + 1};
  if (!grid.contains(next.position)) throw CollisionError("step " + std::to_string(next.t) + ": vehicle left the map");
  if (grid.occupied_at(next.position)) {
    throw CollisionError("step " + std::to_string(next.t) + ": vehicle entered an occupied cell");
  }
  return next;
}

bool is_parallel(const Vec2& f_att, const Vec2& f_rep, const ParallelCriterion& criterion) {
  const double att = f_att.norm();
  const double rep = f_rep.norm();
  if (att == 0.0 || rep == 0.0) return false;
  if (!(rep > criterion.min_rep_ratio * att)) return false;
  return angle_between(f_att, -f_rep) <= criterion.tol;
}

std::optional<Vec2> project_local_minimum(std::span<const Vec2> known_obstacles, const Vec2& position,
                                          const Vec2& goal, const ForceParams& params) {
  if (known_obstacles.empty()) return std::nullopt;

  double nearest = std::numeric_limits<double>::infinity();
  for (const Vec2& p : known_obstacles) nearest = std::min(nearest, distance(p, position));
  if (!(nearest > 0.0)) return std::nullopt;

  const ForceDecomposition here = forces_at(position, goal, known_obstacles, params);
  const double f_norm = here.f_tot.norm();
  if (f_norm == 0.0) return position;
  const Vec2 dir = here.f_tot / f_norm;

  auto balance = [&](double s) {
    const ForceDecomposition f = forces_at(position + dir * s, goal, known_obstacles, params);
    return f.f_att.norm() - f.f_rep.norm();
  };

  if (balance(0.0) <= 0.0) return position;

  // Coarse march, then bisection on the first bracketing interval.
  constexpr double kMarch = 1e-2;
  // Well under the 1e-4 m needed for placement: near an obstacle the balance slope reaches ~30/m,
  // and the returned point should also read as stuck under eps_stop.
  constexpr double kTol = 1e-9;
  const double s_end = nearest * (1.0 - 1e-9);
  double lo = 0.0;
  double hi = -1.0;
  for (double s = kMarch;; s += kMarch) {
    const double probe = std::min(s, s_end);
    if (balance(probe) <= 0.0) {
      hi = probe;
      break;
    }
    lo = probe;
    if (probe >= s_end) break;
  }
  if (hi < 0.0) return std::nullopt;

  while (hi - lo > kTol) {
    const double mid = 0.5 * (lo + hi);
    if (balance(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return position + dir * (0.5 * (lo + hi));
}

bool detect_stuck(const Vec2& f_tot, double eps_stop) {
  if (!(eps_stop > 0.0)) throw std::invalid_argument("detect_stuck: eps_stop must be positive");
  return f_tot.norm() < eps_stop;
}

void OscillationDetector::record(const Vec2& position) {
  recent_[next_] = position;
  next_ = (next_ + 1) % recent_.size();
  count_ = std::min(count_ + 1, recent_.size());
}

bool OscillationDetector::revisits(const Vec2& candidate) const {
  for (std::size_t i = 0; i < count_; ++i) {
    if (distance(recent_[i], candidate) <= radius_) return true;
  }
  return false;
}

}  // namespace apfpred
