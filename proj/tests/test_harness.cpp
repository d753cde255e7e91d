#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "apfpred/errors.hpp"
#include "apfpred/harness.hpp"
#include "apfpred/sensor.hpp"

using namespace apfpred;

namespace {

std::filesystem::path scratch_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "apfpred_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

ScenarioConfig open_field() {
  ScenarioConfig c;
  c.name = "open";
  c.map = OccupancyGrid::empty(50, 50, 0.1);
  c.start = {1.0, 2.5};
  c.goal = {2.0, 2.5};
  c.delta = 0.1;
  return c;
}

// Cached: the built-in episodes are reused by several cases.
const SimTrace& cached(const std::string& scenario, PredictorKind kind) {
  static std::map<std::pair<std::string, PredictorKind>, SimTrace> cache;
  auto key = std::pair{scenario, kind};
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, run_episode(*builtin_scenario(scenario), kind)).first;
  return it->second;
}

}  // namespace

TEST_CASE("obstacle-free line reaches the goal after ten steps") {
  const auto trace = run_episode(open_field(), PredictorKind::bayes);
  CHECK(trace.outcome == Outcome::goal_reached);
  CHECK(trace.final_step == 10);
  CHECK(trace.steps.size() == 11);
  for (const auto& r : trace.steps) {
    CHECK(r.status == VerdictStatus::monitoring);
    CHECK(r.f_rep == Vec2{});
  }
  CHECK(trace.steps.back().position.x == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("max_steps bounds the episode") {
  auto cfg = open_field();
  cfg.max_steps = 4;
  const auto trace = run_episode(cfg, PredictorKind::none);
  CHECK(trace.outcome == Outcome::max_steps);
  CHECK(trace.final_step == 4);
}

TEST_CASE("config errors propagate") {
  auto cfg = open_field();
  cfg.gamma = 0.0;
  CHECK_THROWS_AS(run_episode(cfg, PredictorKind::bayes), ConfigError);
}

TEST_CASE("collision aborts the episode") {
  // Pillar straight between start and goal; with a negligible eta nothing deflects the vehicle.
  auto cfg = open_field();
  cfg.map = GridBuilder(50, 50, 0.1).fill_rect({1.1, 2.0}, {1.3, 3.0}).build();
  cfg.start = {1.05, 2.55};
  cfg.eta = 1e-9;
  CHECK_THROWS_AS(run_episode(cfg, PredictorKind::none), CollisionError);
}

TEST_CASE("wall without a predictor ends stuck at the force balance") {
  const auto cfg = *builtin_scenario("wall");
  const auto& trace = cached("wall", PredictorKind::none);
  REQUIRE(trace.outcome == Outcome::stuck);

  // Oracle: march the axis with the sensor facing the wall and find where the axial force flips.
  double balance_x = -1.0;
  for (double x = cfg.start.x; x < 6.8; x += 1e-3) {
    const Vec2 p{x, cfg.start.y};
    const auto s = scan(cfg.map, p, 0.0, cfg.rho0, cfg.n_rays);
    const Vec2 f = attractive_force(p, cfg.goal, cfg.xi) + repulsive_force(obstacle_vectors(s), cfg.eta, cfg.rho0);
    if (f.x <= 0.0) {
      balance_x = x;
      break;
    }
  }
  REQUIRE(balance_x > 0.0);
  double furthest = 0.0;
  for (const auto& r : trace.steps) furthest = std::max(furthest, r.position.x);
  CHECK(std::abs(furthest - balance_x) <= cfg.delta);
  CHECK(trace.steps.back().position.x <= furthest);
}

TEST_CASE("wall with the Bayes predictor halts before the stuck step") {
  const auto& stuck = cached("wall", PredictorKind::none);
  const auto& halted = cached("wall", PredictorKind::bayes);
  CHECK(halted.outcome == Outcome::halted_by_predictor);
  CHECK(halted.final_step < stuck.final_step);
  CHECK(halted.final_belief >= 0.85);
  CHECK(halted.final_belief <= 1.0);
  const auto& last = halted.steps.back();
  CHECK(last.status == VerdictStatus::halt);
  REQUIRE(last.x_lm.has_value());
  REQUIRE(last.steps_remaining.has_value());
  CHECK(*last.steps_remaining >= 1);
}

TEST_CASE("belief never drops after arming on the wall") {
  const auto& trace = cached("wall", PredictorKind::bayes);
  double prev = -1.0;
  for (const auto& r : trace.steps) {
    if (r.status == VerdictStatus::monitoring) continue;
    CHECK(r.belief >= prev);
    prev = r.belief;
  }
  CHECK(prev >= 0.85);
}

TEST_CASE("predictors are passive until they signal") {
  for (const char* name : {"wall", "hallway"}) {
    const auto& none = cached(name, PredictorKind::none);
    for (auto k : {PredictorKind::bayes, PredictorKind::method1, PredictorKind::method2}) {
      const auto& other = cached(name, k);
      const std::size_t n = std::min(none.steps.size(), other.steps.size());
      for (std::size_t i = 0; i < n; ++i) {
        const auto& a = none.steps[i];
        const auto& b = other.steps[i];
        if (b.status != VerdictStatus::monitoring) break;
        CHECK(a.t == b.t);
        CHECK(a.position == b.position);
        CHECK(a.f_tot == b.f_tot);
        CHECK(a.parallel == b.parallel);
      }
    }
  }
}

TEST_CASE("compare table agrees with individual episodes") {
  const auto rows = compare(builtin_scenarios());
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.bayes == signal_step(cached(row.scenario, PredictorKind::bayes)));
    CHECK(row.method1 == signal_step(cached(row.scenario, PredictorKind::method1)));
    CHECK(row.method2 == signal_step(cached(row.scenario, PredictorKind::method2)));
    CHECK(row.stuck == signal_step(cached(row.scenario, PredictorKind::none)));
    REQUIRE(row.bayes.has_value());
    REQUIRE(row.stuck.has_value());
    CHECK(*row.bayes < *row.stuck);
    // The baselines do not anticipate the minimum on these layouts.
    CHECK(row.method1 == row.stuck);
    CHECK(row.method2 == row.stuck);
  }
  const auto table = lines_of(format_comparison_csv(rows));
  CHECK(table.size() == 3);
  CHECK(table[0] == "scenario,method1,method2,bayes,stuck");
}

TEST_CASE("traces are deterministic") {
  const auto cfg = *builtin_scenario("hallway");
  const auto a = format_trace_csv(run_episode(cfg, PredictorKind::bayes));
  const auto b = format_trace_csv(cached("hallway", PredictorKind::bayes));
  CHECK(a == b);
}

// ---------------------------------------------------------------------------
// Serialization

TEST_CASE("CSV layout") {
  const auto trace = run_episode(open_field(), PredictorKind::none);
  const auto rows = lines_of(format_trace_csv(trace));
  CHECK(rows.size() == trace.steps.size() + 1);
  CHECK(rows[0] ==
        "t,x,y,fatt_x,fatt_y,frep_x,frep_y,ftot_x,ftot_y,parallel,alpha_frac,ra_cells,aoi_cells,belief,status,"
        "xlm_x,xlm_y,steps_remaining");

  auto ten = trace;
  ten.steps.resize(10);
  CHECK(lines_of(format_trace_csv(ten)).size() == 11);
}

TEST_CASE("trace round-trips through CSV and JSON") {
  for (const char* name : {"wall", "hallway"}) {
    const auto& trace = cached(name, PredictorKind::bayes);
    const auto csv = format_trace_csv(trace);
    CHECK(format_trace_csv(parse_trace_csv(csv)) == csv);
    const auto json = format_trace_json(trace);
    const auto back = parse_trace_json(json);
    CHECK(format_trace_json(back) == json);
    CHECK(back.outcome == trace.outcome);
    CHECK(back.final_step == trace.final_step);
    CHECK(back.scenario == trace.scenario);
    CHECK(format_trace_csv(back) == csv);
  }
}

TEST_CASE("trace files load by content") {
  const auto dir = scratch_dir("traces");
  const auto& trace = cached("wall", PredictorKind::bayes);
  emit_trace(trace, TraceFormat::csv, dir / "t.csv");
  emit_trace(trace, TraceFormat::json, dir / "t.json");
  CHECK(format_trace_csv(load_trace_file(dir / "t.csv")) == format_trace_csv(trace));
  CHECK(load_trace_file(dir / "t.json").outcome == Outcome::halted_by_predictor);
  CHECK_THROWS(emit_trace(trace, TraceFormat::csv, dir / "missing" / "deeper" / "t.csv"));
  CHECK_THROWS_AS(parse_trace_csv("t,x,y\n1,2,3\n"), ParseError);
}

TEST_CASE("outcome names") {
  for (auto o : {Outcome::goal_reached, Outcome::halted_by_predictor, Outcome::stuck, Outcome::max_steps}) {
    CHECK(parse_outcome(to_string(o)) == o);
  }
  CHECK_FALSE(parse_outcome("crashed").has_value());
}

TEST_CASE("plot data") {
  const auto dir = scratch_dir("plot");
  SUBCASE("unarmed run has an empty belief curve") {
    const auto trace = run_episode(open_field(), PredictorKind::bayes);
    emit_plot_data(trace, dir);
    CHECK(slurp(dir / "belief.csv") == "t,belief\n");
    CHECK(lines_of(slurp(dir / "trajectory.csv")).size() == trace.steps.size() + 1);
  }
  SUBCASE("halted run ends above the threshold and marks x_lm") {
    const auto& trace = cached("wall", PredictorKind::bayes);
    emit_plot_data(trace, dir);
    const auto belief = lines_of(slurp(dir / "belief.csv"));
    REQUIRE(belief.size() > 1);
    CHECK(std::stod(belief.back().substr(belief.back().find(',') + 1)) >= trace.gamma);
    const auto traj = lines_of(slurp(dir / "trajectory.csv"));
    CHECK(traj.size() == trace.steps.size() + 2);
    CHECK(traj.back().rfind("xlm,", 0) == 0);
  }
}
