#include "apfpred/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "apfpred/errors.hpp"

namespace apfpred {

std::string_view to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::monitoring:
      return "monitoring";
    case VerdictStatus::armed:
      return "armed";
    case VerdictStatus::halt:
      return "halt";
    case VerdictStatus::revoked:
      return "revoked";
  }
  return "monitoring";
}

std::optional<VerdictStatus> parse_status(std::string_view text) {
  for (auto s : {VerdictStatus::monitoring, VerdictStatus::armed, VerdictStatus::halt, VerdictStatus::revoked}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

double PredictionState::ra_ratio() const {
  if (aoi.empty()) return 0.0;
  return static_cast<double>(ra.size()) / static_cast<double>(aoi.size());
}

PredictionState arm(const OccupancyGrid& grid, const CellSet& scan_footprint_t0, const Vec2& x_lm,
                    const CellSet& sa_xlm, const Vec2& position, double delta, int t0) {
  if (!grid.contains(x_lm)) throw ArmingRefused("arm: projected minimum lies outside the grid");
  if (!(delta > 0.0)) throw std::invalid_argument("arm: delta must be positive");

  PredictionState s;
  s.x_lm = x_lm;
  s.ra = scan_footprint_t0;
  s.aoi = scan_footprint_t0.united(sa_xlm);

  const double dist = distance(position, x_lm);
  // Guard against dist/delta landing a hair below an integer.
  const auto n_before = static_cast<int>(std::floor(dist / delta + 1e-9));
  const Vec2 dir = dist > 0.0 ? (x_lm - position) / dist : Vec2{};
  s.group_a.reserve(static_cast<std::size_t>(n_before) + 1);
  for (int k = 0; k < n_before; ++k) s.group_a.push_back(position + dir * (k * delta));
  s.group_a.push_back(x_lm);

  s.belief_lm = 1.0 / static_cast<double>(s.group_a.size());
  s.armed_at = t0;
  s.active = true;
  return s;
}

PredictionState observe(PredictionState state, const CellSet& new_footprint) {
  state.ra = state.ra.united(new_footprint.intersected(state.aoi));
  return state;
}

PredictionState bayes_update(PredictionState state, double alpha_frac, double ra_ratio) {
  if (!(alpha_frac >= 0.0 && alpha_frac <= 1.0)) throw std::invalid_argument("bayes_update: alpha_frac outside [0,1]");
  if (!(ra_ratio >= 0.0 && ra_ratio <= 1.0)) throw std::invalid_argument("bayes_update: ra_ratio outside [0,1]");

  // Prediction: transition weights (alpha, 1 - alpha). Correction: likelihoods (ra, 1 - ra).
  const double u_lm = alpha_frac * ra_ratio * state.belief_lm;
  const double u_not = (1.0 - alpha_frac) * (1.0 - ra_ratio) * (1.0 - state.belief_lm);
  const double norm = u_lm + u_not;
  if (norm == 0.0) {
    state.degenerate = true;
    return state;
  }
  state.degenerate = false;
  state.belief_lm = u_lm / norm;
  return state;
}

PredictorVerdict check_halt(const PredictionState& state, double gamma, const Vec2& position, double delta) {
  PredictorVerdict v;
  v.belief = state.belief_lm;
  v.x_lm = state.x_lm;
  v.steps_remaining = static_cast<int>(std::lround(distance(position, state.x_lm) / delta));
  if (state.belief_lm >= gamma) {
    v.status = VerdictStatus::halt;
    v.confidence_pct = static_cast<int>(std::lround(state.belief_lm * 100.0));
  } else {
    v.status = VerdictStatus::armed;
  }
  return v;
}

PredictionState revoke_if_broken(PredictionState state, const Vec2& f_att, const Vec2& f_rep,
                                 const ParallelCriterion& criterion, int k_grace) {
  if (is_parallel(f_att, f_rep, criterion)) {
    state.broken_streak = 0;
    return state;
  }
  ++state.broken_streak;
  if (state.broken_streak >= k_grace) {
    state.active = false;
    state.revoked = true;
  }
  return state;
}

namespace {

Vec2 ray_endpoint(const ScanResult& scan, const Ray& r) {
  return scan.pose + unit_from_angle(scan.heading + r.bearing) * r.distance;
}

}  // namespace

double widest_free_gap(const ScanResult& scan) {
  const auto& rays = scan.rays;
  const std::size_t n = rays.size();
  double widest = 0.0;
  std::size_t i = 0;
  while (i < n) {
    if (rays[i].hit) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < n && !rays[j + 1].hit) ++j;
    const Ray& left = i > 0 ? rays[i - 1] : rays[i];
    const Ray& right = j + 1 < n ? rays[j + 1] : rays[j];
    widest = std::max(widest, distance(ray_endpoint(scan, left), ray_endpoint(scan, right)));
    i = j + 1;
  }
  return widest;
}

bool method1_predict(const ScanResult& scan, double robot_width) {
  if (scan.rays.empty()) throw std::invalid_argument("method1_predict: empty scan");
  if (std::none_of(scan.rays.begin(), scan.rays.end(), [](const Ray& r) { return r.hit; })) return false;
  return widest_free_gap(scan) < robot_width;
}

double horizon_distance(const ScanResult& scan, const Vec2& direction) {
  if (scan.rays.empty()) throw std::invalid_argument("horizon_distance: empty scan");
  const double rel = std::remainder(direction.angle() - scan.heading, 2.0 * kPi);
  const std::size_t n = scan.rays.size();
  const double spacing = n > 1 ? kPi / static_cast<double>(n - 1) : kPi;
  if (std::abs(rel) > kPi / 2.0 + spacing / 2.0) return scan.rho0;
  const auto nearest = std::min_element(scan.rays.begin(), scan.rays.end(), [&](const Ray& a, const Ray& b) {
    return std::abs(a.bearing - rel) < std::abs(b.bearing - rel);
  });
  return nearest->distance;
}

bool method2_predict(const ScanResult& scan, const Vec2& f_tot_direction, double rho0) {
  return horizon_distance(scan, f_tot_direction) < rho0 / 2.0;
}

// ---------------------------------------------------------------------------

std::string_view to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::none:
      return "none";
    case PredictorKind::bayes:
      return "bayes";
    case PredictorKind::method1:
      return "method1";
    case PredictorKind::method2:
      return "method2";
  }
  return "none";
}

std::optional<PredictorKind> parse_predictor(std::string_view text) {
  for (auto k : {PredictorKind::none, PredictorKind::bayes, PredictorKind::method1, PredictorKind::method2}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

PredictorOutput NullPredictor::observe(const StepContext&) { return {}; }

namespace {

// Baselines have no belief; a signal is reported as certainty at the current position.
PredictorOutput baseline_signal(const StepContext& ctx) {
  PredictorOutput out;
  out.verdict.status = VerdictStatus::halt;
  out.verdict.belief = 1.0;
  out.verdict.x_lm = ctx.position;
  out.verdict.steps_remaining = 0;
  out.verdict.confidence_pct = 100;
  return out;
}

}  // namespace

PredictorOutput Method1Predictor::observe(const StepContext& ctx) {
  if (method1_predict(ctx.scan, robot_width_)) return baseline_signal(ctx);
  return {};
}

PredictorOutput Method2Predictor::observe(const StepContext& ctx) {
  if (method2_predict(ctx.scan, ctx.forces.f_tot, ctx.force_params.rho0)) return baseline_signal(ctx);
  return {};
}

PredictorOutput BayesPredictor::observe(const StepContext& ctx) {
  if (!state_ || !state_->active) return try_arm(ctx);

  *state_ = revoke_if_broken(std::move(*state_), ctx.forces.f_att, ctx.forces.f_rep, settings_.parallel,
                             settings_.k_grace);
  if (!state_->active) {
    PredictorOutput out;
    out.verdict.status = VerdictStatus::revoked;
    out.verdict.belief = state_->belief_lm;
    out.verdict.x_lm = state_->x_lm;
    out.ra_cells = state_->ra.size();
    out.aoi_cells = state_->aoi.size();
    return out;
  }
  return update(ctx, sensing_footprint(ctx.grid, ctx.position, ctx.heading, ctx.force_params.rho0));
}

PredictorOutput BayesPredictor::try_arm(const StepContext& ctx) {
  if (!is_parallel(ctx.forces.f_att, ctx.forces.f_rep, settings_.parallel)) return {};

  const std::vector<Vec2> known = obstacle_points(ctx.scan);
  const std::optional<Vec2> x_lm = project_local_minimum(known, ctx.position, ctx.goal, ctx.force_params);
  if (!x_lm || !ctx.grid.contains(*x_lm) || ctx.grid.occupied_at(*x_lm)) return {};

  const double rho0 = ctx.force_params.rho0;
  const CellSet here = sensing_footprint(ctx.grid, ctx.position, ctx.heading, rho0);
  const CellSet at_minimum = sensing_footprint(ctx.grid, *x_lm, ctx.forces.f_tot.angle(), rho0);
  state_ = arm(ctx.grid, here, *x_lm, at_minimum, ctx.position, ctx.delta, ctx.t);
  return update(ctx, here);
}

PredictorOutput BayesPredictor::update(const StepContext& ctx, const CellSet& footprint) {
  PredictionState& s = *state_;
  s = apfpred::observe(std::move(s), footprint);
  const double ratio = s.ra_ratio();
  s = bayes_update(std::move(s), occupied_fraction(ctx.scan), ratio);
  PredictorOutput out;
  out.verdict = check_halt(s, ctx.gamma, ctx.position, ctx.delta);
  out.ra_cells = s.ra.size();
  out.aoi_cells = s.aoi.size();
  out.degenerate = s.degenerate;
  return out;
}

std::unique_ptr<Predictor> make_predictor(PredictorKind kind, const PredictorSettings& settings) {
  switch (kind) {
    case PredictorKind::none:
      return std::make_unique<NullPredictor>();
    case PredictorKind::bayes:
      return std::make_unique<BayesPredictor>(settings);
    case PredictorKind::method1:
      return std::make_unique<Method1Predictor>(settings.robot_width);
    case PredictorKind::method2:
      return std::make_unique<Method2Predictor>();
  }
  return std::make_unique<NullPredictor>();
}

}  // namespace apfpred
