#ifndef APFPRED_PREDICTOR_HPP_
#define APFPRED_PREDICTOR_HPP_

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "apfpred/apf.hpp"
#include "apfpred/geometry.hpp"
#include "apfpred/sensor.hpp"
#include "apfpred/world.hpp"

namespace apfpred {

enum class VerdictStatus { monitoring, armed, halt, revoked };

std::string_view to_string(VerdictStatus status);
std::optional<VerdictStatus> parse_status(std::string_view text);

struct PredictorVerdict {
  VerdictStatus status = VerdictStatus::monitoring;
  double belief = 0.0;
  std::optional<Vec2> x_lm;
  std::optional<int> steps_remaining;
  std::optional<int> confidence_pct;
};

/// Belief over {LM, not LM} for one projected minimum, plus the RA/AOI cell ledger.
/// The unknown area is always aoi \ ra and is never stored.
struct PredictionState {
  Vec2 x_lm;
  std::vector<Vec2> group_a;
  CellSet aoi;
  CellSet ra;
  double belief_lm = 0.0;
  int armed_at = 0;
  bool active = false;
  bool revoked = false;
  bool degenerate = false;  // last update had a zero normalizer
  int broken_streak = 0;    // consecutive steps without force opposition

  double belief_not() const { return 1.0 - belief_lm; }
  CellSet unknown() const { return aoi.minus(ra); }
  double ra_ratio() const;
};

/// Initializes the filter: ra = footprint at arming, aoi = ra U SA(x_lm), Group A spaced
/// `delta` from `position` to x_lm inclusive, prior 1/|Group A|.
/// Throws ArmingRefused when x_lm lies outside the grid.
PredictionState arm(const OccupancyGrid& grid, const CellSet& scan_footprint_t0, const Vec2& x_lm,
                    const CellSet& sa_xlm, const Vec2& position, double delta, int t0 = 0);

/// ra' = ra U (footprint n aoi).
PredictionState observe(PredictionState state, const CellSet& new_footprint);

/// Prediction (transition alpha_frac), correction (likelihood ra_ratio) and normalization over the
/// two hypotheses. A zero normalizer keeps the prior and sets `degenerate`.
PredictionState bayes_update(PredictionState state, double alpha_frac, double ra_ratio);

PredictorVerdict check_halt(const PredictionState& state, double gamma, const Vec2& position, double delta);

/// Deactivates the state after `k_grace` consecutive steps without force opposition.
PredictionState revoke_if_broken(PredictionState state, const Vec2& f_att, const Vec2& f_rep,
                                 const ParallelCriterion& criterion, int k_grace);

/// Widest passage across any run of free rays, measured between the endpoints of the rays
/// bounding the run (hit rays, or the scan edge rays). Zero when every ray hits.
double widest_free_gap(const ScanResult& scan);

/// Gap-based baseline: true when no free gap admits `robot_width`.
bool method1_predict(const ScanResult& scan, double robot_width);

/// Range along `direction` read from the ray with the nearest bearing; rho0 when the direction
/// falls outside the forward field of view.
double horizon_distance(const ScanResult& scan, const Vec2& direction);

/// Horizon baseline: true when the range along f_tot is below rho0 / 2.
bool method2_predict(const ScanResult& scan, const Vec2& f_tot_direction, double rho0);

// ---------------------------------------------------------------------------
// Common predictor interface used by the episode runner.

enum class PredictorKind { none, bayes, method1, method2 };

std::string_view to_string(PredictorKind kind);
std::optional<PredictorKind> parse_predictor(std::string_view text);

struct PredictorSettings {
  ParallelCriterion parallel;
  int k_grace = 3;
  double robot_width = 0.5;
};

/// Everything a predictor may look at for one step.
struct StepContext {
  const OccupancyGrid& grid;
  int t;
  Vec2 position;
  double heading;
  Vec2 goal;
  const ScanResult& scan;
  const ForceDecomposition& forces;
  const ForceParams& force_params;
  double delta;
  double gamma;
};

struct PredictorOutput {
  PredictorVerdict verdict;
  std::size_t ra_cells = 0;
  std::size_t aoi_cells = 0;
  bool degenerate = false;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual PredictorKind kind() const = 0;
  virtual PredictorOutput observe(const StepContext& ctx) = 0;
};

/// Never signals.
class NullPredictor final : public Predictor {
 public:
  PredictorKind kind() const override { return PredictorKind::none; }
  PredictorOutput observe(const StepContext& ctx) override;
};

class BayesPredictor final : public Predictor {
 public:
  explicit BayesPredictor(PredictorSettings settings = {}) : settings_(settings) {}
  PredictorKind kind() const override { return PredictorKind::bayes; }
  PredictorOutput observe(const StepContext& ctx) override;

  const std::optional<PredictionState>& state() const { return state_; }

 private:
  PredictorOutput try_arm(const StepContext& ctx);
  PredictorOutput update(const StepContext& ctx, const CellSet& footprint);

  PredictorSettings settings_;
  std::optional<PredictionState> state_;
};

class Method1Predictor final : public Predictor {
 public:
  explicit Method1Predictor(double robot_width = 0.5) : robot_width_(robot_width) {}
  PredictorKind kind() const override { return PredictorKind::method1; }
  PredictorOutput observe(const StepContext& ctx) override;

 private:
  double robot_width_;
};

class Method2Predictor final : public Predictor {
 public:
  PredictorKind kind() const override { return PredictorKind::method2; }
  PredictorOutput observe(const StepContext& ctx) override;
};

std::unique_ptr<Predictor> make_predictor(PredictorKind kind, const PredictorSettings& settings = {});

}  // namespace apfpred

#endif  // APFPRED_PREDICTOR_HPP_
