// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "apfpred/apf.hpp"
#include "apfpred/harness.hpp"
#include "apfpred/predictor.hpp"

using namespace apfpred;

namespace {

struct Result {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void fail(Result& r, const std::string& why) {
  if (r.pass) r.detail = why;
  r.pass = false;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

// Plain re-statement of the total force for the brute-force scans.
Vec2 total_force_oracle(const Vec2& x, const Vec2& goal, const std::vector<Vec2>& obs, double xi, double eta,
                        double rho0) {
  double fx = xi * (goal.x - x.x);
  double fy = xi * (goal.y - x.y);
  for (const Vec2& o : obs) {
    const double dx = o.x - x.x;
    const double dy = o.y - x.y;
    const double d = std::hypot(dx, dy);
    if (d > rho0) continue;
    const double m = eta / (d * d) * (1.0 / d - 1.0 / rho0);
    fx -= m * dx / d;
    fy -= m * dy / d;
  }
  return {fx, fy};
}

Result force_law() {
  const auto t0 = Clock::now();
  Result r;
  const std::vector<Vec2> at_one{{1.0, 0.0}};
  const double m1 = repulsive_force(at_one, 1.0, 2.0).norm();
  if (std::abs(m1 - 0.5) > 1e-12) fail(r, fmt("repulsion at d=1 is %.15g", m1));
  const std::vector<Vec2> at_edge{{0.0, 2.0}};
  const double m2 = repulsive_force(at_edge, 1.0, 2.0).norm();
  if (m2 > 1e-12) fail(r, fmt("repulsion at d=rho0 is %.3g", m2));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  std::uniform_real_distribution<double> gain(0.1, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec2 x{u(rng), u(rng)};
    const Vec2 g{u(rng), u(rng)};
    const double xi = gain(rng);
    const double got = attractive_force(x, g, xi).norm();
    const double want = xi * std::hypot(g.x - x.x, g.y - x.y);
    if (std::abs(got - want) > 1e-12 * std::max(1.0, want)) fail(r, "attractive magnitude != xi * distance");
  }
  const double s = seconds_since(t0);
  if (s >= 1.0) fail(r, fmt("runtime %.2f s", s));
  if (r.pass) r.detail = fmt("|f_rep|(1)=%.15g |f_rep|(rho0)=%.1g, %.3f s", m1, m2, s);
  return r;
}

Result projection() {
  const auto t0 = Clock::now();
  Result r;
  double worst = 0.0;
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int trial = 0; trial < 20; ++trial) {
    const double xi = 0.5 + 1.5 * u01(rng);
    const double eta = 0.5 + 1.5 * u01(rng);
    const double rho0 = 1.0 + 2.0 * u01(rng);
    const double goal_s = 6.0 + 9.0 * u01(rng);
    const double first = 2.0 + (goal_s - 3.0) * u01(rng);
    std::vector<double> along{first};
    if (trial % 2 == 1) along.push_back(first + 0.1 + 1.4 * u01(rng));

    const double th = ang(rng);
    const Vec2 shift{10.0 * u01(rng), 10.0 * u01(rng)};
    auto place = [&](double s) { return shift + unit_from_angle(th) * s; };
    std::vector<Vec2> obs;
    for (double s : along) obs.push_back(place(s));
    const Vec2 start = place(0.0);
    const Vec2 goal = place(goal_s);

    double best_s = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (double s = 0.0; s < first - 1e-4; s += 1e-4) {
      const double n = total_force_oracle(place(s), goal, obs, xi, eta, rho0).norm();
      if (n < best) {
        best = n;
        best_s = s;
      }
    }
    const auto got = project_local_minimum(obs, start, goal, {xi, eta, rho0});
    if (!got) {
      fail(r, "no projection on trial " + std::to_string(trial));
      continue;
    }
    const double err = distance(*got, place(best_s));
    worst = std::max(worst, err);
    if (err >= 1e-3) fail(r, fmt("trial %.0f off by %.3g m", trial, err));
  }

  const std::vector<Vec2> doc{{6.0, 0.0}};
  const auto x = project_local_minimum(doc, {0.0, 0.0}, {10.0, 0.0}, {1.0, 1.0, 2.0});
  if (!x || !(x->x > 5.4 && x->x < 5.5)) fail(r, "documented case outside (5.4, 5.5)");

  const double s = seconds_since(t0);
  if (s >= 5.0) fail(r, fmt("runtime %.2f s", s));
  if (r.pass) r.detail = fmt("20 layouts, worst error %.2g m; documented x*=%.6f, %.2f s", worst, x->x, s);
  return r;
}

Result belief_calculus() {
  const auto t0 = Clock::now();
  Result r;
  PredictionState st;
  st.active = true;
  st.belief_lm = 0.1;
  const double b1 = bayes_update(st, 0.8, 0.6).belief_lm;
  if (std::abs(b1 - 0.4) > 1e-12) fail(r, fmt("0.1 -> %.15g, expected 0.4", b1));
  st.belief_lm = 0.5;
  const double b2 = bayes_update(st, 0.5, 0.5).belief_lm;
  if (b2 != 0.5) fail(r, fmt("0.5 fixed point moved to %.15g", b2));

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  st.belief_lm = 0.5;
  for (int i = 0; i < 1'000'000; ++i) {
    if (i % 50 == 0) st.belief_lm = u(rng);
    st = bayes_update(std::move(st), u(rng), u(rng));
    worst = std::max(worst, std::abs(st.belief_lm + st.belief_not() - 1.0));
    if (!(st.belief_lm >= 0.0 && st.belief_lm <= 1.0)) fail(r, "belief left [0, 1]");
  }
  if (worst > 1e-12) fail(r, fmt("normalization error %.3g", worst));
  const double s = seconds_since(t0);
  if (s >= 10.0) fail(r, fmt("runtime %.2f s", s));
  if (r.pass) r.detail = fmt("0.1 -> %.12f, 0.5 -> %.12f, worst sum error %.2g over 1e6, %.2f s", b1, b2, worst, s);
  return r;
}

Result ordering() {
  Result r;
  std::string detail;
  for (const auto& cfg : builtin_scenarios()) {
    const auto t0 = Clock::now();
    const auto stuck = run_episode(cfg, PredictorKind::none);
    const auto bayes = run_episode(cfg, PredictorKind::bayes);
    const auto m1 = run_episode(cfg, PredictorKind::method1);
    const auto m2 = run_episode(cfg, PredictorKind::method2);
    const double s = seconds_since(t0);
    const std::string tag = cfg.name + ": ";

    if (stuck.outcome != Outcome::stuck) fail(r, tag + "no-predictor run did not end stuck");
    if (bayes.outcome != Outcome::halted_by_predictor) fail(r, tag + "bayes did not halt");
    const int lead = stuck.final_step - bayes.final_step;
    if (lead < 5) fail(r, tag + "lead " + std::to_string(lead) + " < 5");
    if (!(bayes.final_belief >= 0.85 && bayes.final_belief <= 1.0)) {
      fail(r, tag + fmt("final belief %.3f", bayes.final_belief));
    }
    const auto s1 = signal_step(m1);
    const auto s2 = signal_step(m2);
    for (const auto& sig : {s1, s2}) {
      if (!sig || *sig < bayes.final_step || *sig > stuck.final_step) fail(r, tag + "baseline signal out of range");
    }
    if (s >= 30.0) fail(r, tag + fmt("runtime %.1f s", s));
    detail += tag + "halt " + std::to_string(bayes.final_step) + " stuck " + std::to_string(stuck.final_step) +
              fmt(" belief %.3f", bayes.final_belief) + " m1 " + (s1 ? std::to_string(*s1) : "-") + " m2 " +
              (s2 ? std::to_string(*s2) : "-") + fmt(" (%.2f s); ", s);
  }
  if (r.pass) r.detail = detail;
  return r;
}

Result area_ledger() {
  Result r;
  std::string detail;
  for (const auto& cfg : builtin_scenarios()) {
    const std::string tag = cfg.name + ": ";
    std::optional<CellSet> prev_ra;
    double ratio_at_halt = -1.0;
    EpisodeOptions opts;
    opts.on_step = [&](const StepRecord& rec, const Predictor& p) {
      const auto& bayes = dynamic_cast<const BayesPredictor&>(p);
      if (!bayes.state()) return;
      const auto& st = *bayes.state();
      if (!st.aoi.includes(st.ra)) fail(r, tag + "ra not inside aoi at t=" + std::to_string(rec.t));
      if (prev_ra && st.active && !st.ra.includes(*prev_ra)) fail(r, tag + "ra shrank at t=" + std::to_string(rec.t));
      prev_ra = st.ra;
      if (rec.status == VerdictStatus::halt) ratio_at_halt = st.ra_ratio();
    };
    const auto trace = run_episode(cfg, PredictorKind::bayes, opts);

    // Same invariants read back from the emitted trace.
    const auto rows = parse_trace_csv(format_trace_csv(trace)).steps;
    std::size_t last_ra = 0;
    for (const auto& row : rows) {
      if (row.status == VerdictStatus::monitoring) continue;
      if (row.ra_cells > row.aoi_cells) fail(r, tag + "trace row with ra > aoi");
      if (row.ra_cells < last_ra) fail(r, tag + "trace ra column decreased");
      last_ra = row.ra_cells;
    }

    if (ratio_at_halt < 0.0) {
      fail(r, tag + "no halt step");
    } else if (ratio_at_halt < 0.95) {
      fail(r, tag + fmt("ra/aoi at halt %.3f < 0.95", ratio_at_halt));
    }
    detail += tag + fmt("ra/aoi at halt %.3f; ", ratio_at_halt);
  }
  if (r.pass) {
    r.detail = detail;
  } else {
    r.detail += " [" + detail + "]";
  }
  return r;
}

Result determinism() {
  Result r;
  int traces = 0;
  for (const auto& cfg : builtin_scenarios()) {
    for (auto k : {PredictorKind::none, PredictorKind::bayes, PredictorKind::method1, PredictorKind::method2}) {
      const auto a = run_episode(cfg, k);
      const auto csv = format_trace_csv(a);
      if (csv != format_trace_csv(run_episode(cfg, k))) fail(r, cfg.name + ": repeated run differs");
      if (format_trace_csv(parse_trace_csv(csv)) != csv) fail(r, cfg.name + ": CSV parse/emit not identity");
      const auto json = format_trace_json(a);
      if (format_trace_json(parse_trace_json(json)) != json) fail(r, cfg.name + ": JSON parse/emit not identity");
      ++traces;
    }
  }
  if (r.pass) r.detail = std::to_string(traces) + " traces byte-identical and round-trip exact";
  return r;
}

Result revocation() {
  Result r;
  // A short segment on the approach axis arms the filter; a block above and before it enters the
  // scan after arming and turns the repulsion off the axis.
  ScenarioConfig cfg;
  cfg.name = "deflect";
  cfg.start = {1.0, 5.0};
  cfg.goal = {11.0, 5.0};
  cfg.map = GridBuilder(125, 100, 0.1).fill_rect({6.0, 4.5}, {6.2, 5.5}).fill_rect({4.5, 5.8}, {5.5, 6.2}).build();
  const int k_grace = PredictorSettings{}.k_grace;

  SimTrace trace;
  try {
    trace = run_episode(cfg, PredictorKind::bayes);
  } catch (const std::exception& e) {
    fail(r, std::string("episode aborted: ") + e.what());
    return r;
  }
  int armed_at = -1;
  int broke_at = -1;
  int revoked_at = -1;
  for (const auto& row : trace.steps) {
    if (armed_at < 0 && row.status == VerdictStatus::armed) armed_at = row.t;
    if (armed_at >= 0 && broke_at < 0 && row.t > armed_at && !row.parallel) broke_at = row.t;
    if (revoked_at < 0 && row.status == VerdictStatus::revoked) revoked_at = row.t;
  }
  if (armed_at < 0) fail(r, "never armed");
  if (revoked_at < 0) fail(r, "never revoked");
  if (revoked_at >= 0 && broke_at >= 0 && revoked_at - broke_at + 1 > k_grace + 1) {
    fail(r, "revoked " + std::to_string(revoked_at - broke_at + 1) + " steps after opposition broke");
  }
  if (trace.outcome != Outcome::goal_reached) fail(r, "outcome " + std::string(to_string(trace.outcome)));
  if (r.pass) {
    r.detail = "armed t=" + std::to_string(armed_at) + ", opposition broke t=" + std::to_string(broke_at) +
               ", revoked t=" + std::to_string(revoked_at) + ", goal at t=" + std::to_string(trace.final_step);
  }
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria{
      {"force law", force_law},     {"projection oracle", projection}, {"belief calculus", belief_calculus},
      {"halt ordering", ordering},  {"area ledger", area_ledger},      {"determinism and serialization", determinism},
      {"revocation", revocation},
  };
  int failed = 0;
  int n = 0;
  for (const auto& [name, check] : criteria) {
    ++n;
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    if (!r.pass) ++failed;
    std::printf("criterion %d %-30s %s  %s\n", n, name, r.pass ? "PASS" : "FAIL", r.detail.c_str());
  }
  std::printf("%d/%d criteria passed\n", n - failed, n);
  return failed == 0 ? 0 : 1;
}
