#ifndef APFPRED_HARNESS_HPP_
#define APFPRED_HARNESS_HPP_

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "apfpred/apf.hpp"
#include "apfpred/predictor.hpp"
#include "apfpred/world.hpp"

namespace apfpred {

struct StepRecord {
  int t = 0;
  Vec2 position;
  Vec2 f_att;
  Vec2 f_rep;
  Vec2 f_tot;
  bool parallel = false;
  double alpha_frac = 0.0;
  std::size_t ra_cells = 0;
  std::size_t aoi_cells = 0;
  double belief = 0.0;
  VerdictStatus status = VerdictStatus::monitoring;
  std::optional<Vec2> x_lm;
  std::optional<int> steps_remaining;
  bool degenerate = false;
};

enum class Outcome { goal_reached, halted_by_predictor, stuck, max_steps };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> parse_outcome(std::string_view text);

struct SimTrace {
  std::string scenario;
  PredictorKind predictor = PredictorKind::none;
  double gamma = 0.0;
  std::vector<StepRecord> steps;
  Outcome outcome = Outcome::max_steps;
  int final_step = 0;
  double final_belief = 0.0;
};

struct EpisodeOptions {
  PredictorSettings predictor;
  double eps_stop = kDefaultEpsStop;
  // Called after each row is recorded, with the predictor that produced it.
  std::function<void(const StepRecord&, const Predictor&)> on_step;
};

/// Runs one episode: scan, forces, predictor, verdict, then one step along f_tot.
/// Ends on a halt verdict, a stuck state (vanishing force or an oscillating step), arrival
/// strictly within delta of the goal, or max_steps. Throws CollisionError on contact.
SimTrace run_episode(const ScenarioConfig& config, PredictorKind predictor, const EpisodeOptions& options = {});

struct ComparisonRow {
  std::string scenario;
  std::optional<int> method1;
  std::optional<int> method2;
  std::optional<int> bayes;
  std::optional<int> stuck;
};

/// First signal step of a trace: the halt step, or the stuck step for predictors that never
/// fired before the vehicle stopped.
std::optional<int> signal_step(const SimTrace& trace);

/// One row per scenario; episodes run concurrently.
std::vector<ComparisonRow> compare(const std::vector<ScenarioConfig>& configs, const EpisodeOptions& options = {});

std::string format_comparison_csv(const std::vector<ComparisonRow>& rows);

enum class TraceFormat { csv, json };

std::string format_trace_csv(const SimTrace& trace);
std::string format_trace_json(const SimTrace& trace);
/// Reads rows back; terminal summary is only recoverable from JSON.
SimTrace parse_trace_csv(std::string_view text);
SimTrace parse_trace_json(std::string_view text);
/// Dispatches on the first non-blank character ('{' means JSON).
SimTrace load_trace_file(const std::filesystem::path& path);

void emit_trace(const SimTrace& trace, TraceFormat format, const std::filesystem::path& path);

/// Writes `belief.csv` (t,belief for armed/halt rows) and `trajectory.csv` (t,x,y plus a final
/// x_lm marker row) into `dir`.
void emit_plot_data(const SimTrace& trace, const std::filesystem::path& dir);

}  // namespace apfpred

#endif  // APFPRED_HARNESS_HPP_
