#include "apfpred/harness.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "apfpred/errors.hpp"
#include "apfpred/sensor.hpp"

namespace apfpred {

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::goal_reached:
      return "goal_reached";
    case Outcome::halted_by_predictor:
      return "halted_by_predictor";
    case Outcome::stuck:
      return "stuck";
    case Outcome::max_steps:
      return "max_steps";
  }
  return "max_steps";
}

std::optional<Outcome> parse_outcome(std::string_view text) {
  for (auto o : {Outcome::goal_reached, Outcome::halted_by_predictor, Outcome::stuck, Outcome::max_steps}) {
    if (to_string(o) == text) return o;
  }
  return std::nullopt;
}

SimTrace run_episode(const ScenarioConfig& config, PredictorKind kind, const EpisodeOptions& options) {
  validate(config);
  const ForceParams params{config.xi, config.eta, config.rho0};
  auto predictor = make_predictor(kind, options.predictor);

  SimTrace trace;
  trace.scenario = config.name;
  trace.predictor = kind;
  trace.gamma = config.gamma;

  VehicleState state{config.start, (config.goal - config.start).angle(), 0};
  OscillationDetector oscillation(config.delta);
  oscillation.record(state.position);
  bool revisited = false;  // current position lies within delta/2 of one of the previous three

  for (;;) {
    const ScanResult sensed = scan(config.map, state.position, state.heading, config.rho0, config.n_rays);
    const std::vector<Vec2> d = obstacle_vectors(sensed);
    const ForceDecomposition forces =
        decompose(attractive_force(state.position, config.goal, config.xi), repulsive_force(d, config.eta, config.rho0));

    const StepContext ctx{config.map, state.t, state.position, state.heading, config.goal, sensed, forces,
                          params,     config.delta, config.gamma};
    const PredictorOutput out = predictor->observe(ctx);

    StepRecord rec;
    rec.t = state.t;
    rec.position = state.position;
    rec.f_att = forces.f_att;
    rec.f_rep = forces.f_rep;
    rec.f_tot = forces.f_tot;
    rec.parallel = is_parallel(forces.f_att, forces.f_rep, options.predictor.parallel);
    rec.alpha_frac = occupied_fraction(sensed);
    rec.ra_cells = out.ra_cells;
    rec.aoi_cells = out.aoi_cells;
    rec.belief = out.verdict.belief;
    rec.status = out.verdict.status;
    rec.x_lm = out.verdict.x_lm;
    rec.steps_remaining = out.verdict.steps_remaining;
    rec.degenerate = out.degenerate;
    trace.steps.push_back(rec);
    if (options.on_step) options.on_step(rec, *predictor);

    auto finish = [&](Outcome o) {
      trace.outcome = o;
      trace.final_step = state.t;
      trace.final_belief = rec.belief;
      return trace;
    };

    // Arrival means strictly inside one step length of the goal.
    if (distance(state.position, config.goal) < config.delta - 1e-9) return finish(Outcome::goal_reached);
    if (out.verdict.status == VerdictStatus::halt) return finish(Outcome::halted_by_predictor);
    if (forces.f_tot.norm() == 0.0 || detect_stuck(forces.f_tot, options.eps_stop)) return finish(Outcome::stuck);
    if (revisited) return finish(Outcome::stuck);
    if (state.t >= config.max_steps) return finish(Outcome::max_steps);

    state = step(config.map, state, forces.f_tot, config.delta);
    revisited = oscillation.revisits(state.position);
    oscillation.record(state.position);
  }
}

std::optional<int> signal_step(const SimTrace& trace) {
  if (trace.outcome == Outcome::halted_by_predictor || trace.outcome == Outcome::stuck) return trace.final_step;
  return std::nullopt;
}

std::vector<ComparisonRow> compare(const std::vector<ScenarioConfig>& configs, const EpisodeOptions& options) {
  if (configs.empty()) throw ConfigError("compare: no scenarios given");
  constexpr std::array<PredictorKind, 4> kKinds = {PredictorKind::none, PredictorKind::method1,
                                                   PredictorKind::method2, PredictorKind::bayes};
  const int jobs = static_cast<int>(configs.size() * kKinds.size());
  std::vector<std::optional<SimTrace>> traces(static_cast<std::size_t>(jobs));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));

#pragma omp parallel for schedule(dynamic, 1)
  for (int j = 0; j < jobs; ++j) {
    const auto& cfg = configs[static_cast<std::size_t>(j) / kKinds.size()];
    try {
      traces[static_cast<std::size_t>(j)] = run_episode(cfg, kKinds[static_cast<std::size_t>(j) % kKinds.size()], options);
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<ComparisonRow> rows;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    auto at = [&](std::size_t k) -> const SimTrace& { return *traces[c * kKinds.size() + k]; };
    ComparisonRow row;
    row.scenario = configs[c].name;
    if (at(0).outcome == Outcome::stuck) row.stuck = at(0).final_step;
    row.method1 = signal_step(at(1));
    row.method2 = signal_step(at(2));
    row.bayes = signal_step(at(3));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

}  // namespace

std::string format_comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::string out = "scenario,method1,method2,bayes,stuck\n";
  for (const auto& r : rows) {
    out += r.scenario + "," + opt_int(r.method1) + "," + opt_int(r.method2) + "," + opt_int(r.bayes) + "," +
           opt_int(r.stuck) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Trace serialization

namespace {

constexpr std::string_view kCsvHeader =
    "t,x,y,fatt_x,fatt_y,frep_x,frep_y,ftot_x,ftot_y,parallel,alpha_frac,ra_cells,aoi_cells,belief,status,xlm_x,"
    "xlm_y,steps_remaining";

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

double round9(double v) { return std::strtod(g9(v).c_str(), nullptr); }

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

double to_double(std::string_view s, int line) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw ParseError("bad number '" + tmp + "'", line, 1);
  return v;
}

template <class Int>
Int to_int(std::string_view s, int line) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("bad integer '" + std::string(s) + "'", line, 1);
  return v;
}

}  // namespace

std::string format_trace_csv(const SimTrace& trace) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : trace.steps) {
    out += std::to_string(r.t);
    for (double v : {r.position.x, r.position.y, r.f_att.x, r.f_att.y, r.f_rep.x, r.f_rep.y, r.f_tot.x, r.f_tot.y}) {
      out += ',' + g9(v);
    }
    out += r.parallel ? ",1," : ",0,";
    out += g9(r.alpha_frac) + ',' + std::to_string(r.ra_cells) + ',' + std::to_string(r.aoi_cells) + ',' + g9(r.belief) +
           ',' + std::string(to_string(r.status)) + ',';
    if (r.x_lm) out += g9(r.x_lm->x) + ',' + g9(r.x_lm->y);
    else out += ',';
    out += ',' + opt_int(r.steps_remaining) + '\n';
  }
  return out;
}

SimTrace parse_trace_csv(std::string_view text) {
  SimTrace trace;
  std::size_t pos = 0;
  int line_no = 0;
  bool header_seen = false;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kCsvHeader) throw ParseError("unexpected trace header", line_no, 1);
      header_seen = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 18) throw ParseError("expected 18 fields, found " + std::to_string(f.size()), line_no, 1);
    StepRecord r;
    r.t = to_int<int>(f[0], line_no);
    r.position = {to_double(f[1], line_no), to_double(f[2], line_no)};
    r.f_att = {to_double(f[3], line_no), to_double(f[4], line_no)};
    r.f_rep = {to_double(f[5], line_no), to_double(f[6], line_no)};
    r.f_tot = {to_double(f[7], line_no), to_double(f[8], line_no)};
    r.parallel = to_int<int>(f[9], line_no) != 0;
    r.alpha_frac = to_double(f[10], line_no);
    r.ra_cells = to_int<std::size_t>(f[11], line_no);
    r.aoi_cells = to_int<std::size_t>(f[12], line_no);
    r.belief = to_double(f[13], line_no);
    const auto status = parse_status(f[14]);
    if (!status) throw ParseError("unknown status '" + std::string(f[14]) + "'", line_no, 1);
    r.status = *status;
    if (!f[15].empty() || !f[16].empty()) r.x_lm = Vec2{to_double(f[15], line_no), to_double(f[16], line_no)};
    if (!f[17].empty()) r.steps_remaining = to_int<int>(f[17], line_no);
    trace.steps.push_back(r);
  }
  if (!header_seen) throw ParseError("empty trace", 1, 1);
  if (!trace.steps.empty()) {
    trace.final_step = trace.steps.back().t;
    trace.final_belief = trace.steps.back().belief;
  }
  return trace;
}

std::string format_trace_json(const SimTrace& trace) {
  nlohmann::ordered_json j;
  j["scenario"] = trace.scenario;
  j["predictor"] = std::string(to_string(trace.predictor));
  j["gamma"] = round9(trace.gamma);
  auto& steps = j["steps"] = nlohmann::ordered_json::array();
  for (const auto& r : trace.steps) {
    nlohmann::ordered_json s;
    s["t"] = r.t;
    s["x"] = round9(r.position.x);
    s["y"] = round9(r.position.y);
    s["fatt_x"] = round9(r.f_att.x);
    s["fatt_y"] = round9(r.f_att.y);
    s["frep_x"] = round9(r.f_rep.x);
    s["frep_y"] = round9(r.f_rep.y);
    s["ftot_x"] = round9(r.f_tot.x);
    s["ftot_y"] = round9(r.f_tot.y);
    s["parallel"] = r.parallel;
    s["alpha_frac"] = round9(r.alpha_frac);
    s["ra_cells"] = r.ra_cells;
    s["aoi_cells"] = r.aoi_cells;
    s["belief"] = round9(r.belief);
    s["status"] = std::string(to_string(r.status));
    s["xlm_x"] = r.x_lm ? nlohmann::ordered_json(round9(r.x_lm->x)) : nlohmann::ordered_json(nullptr);
    s["xlm_y"] = r.x_lm ? nlohmann::ordered_json(round9(r.x_lm->y)) : nlohmann::ordered_json(nullptr);
    s["steps_remaining"] = r.steps_remaining ? nlohmann::ordered_json(*r.steps_remaining) : nlohmann::ordered_json(nullptr);
    s["degenerate"] = r.degenerate;
    steps.push_back(std::move(s));
  }
  j["summary"] = {{"outcome", std::string(to_string(trace.outcome))},
                  {"final_step", trace.final_step},
                  {"final_belief", round9(trace.final_belief)}};
  return j.dump(2) + "\n";
}

SimTrace parse_trace_json(std::string_view text) {
  SimTrace trace;
  try {
    const auto j = nlohmann::json::parse(text);
    trace.scenario = j.value("scenario", std::string());
    if (auto k = parse_predictor(j.value("predictor", std::string("none")))) trace.predictor = *k;
    trace.gamma = j.value("gamma", 0.0);
    for (const auto& s : j.at("steps")) {
      StepRecord r;
      r.t = s.at("t").get<int>();
      r.position = {s.at("x").get<double>(), s.at("y").get<double>()};
      r.f_att = {s.at("fatt_x").get<double>(), s.at("fatt_y").get<double>()};
      r.f_rep = {s.at("frep_x").get<double>(), s.at("frep_y").get<double>()};
      r.f_tot = {s.at("ftot_x").get<double>(), s.at("ftot_y").get<double>()};
      r.parallel = s.at("parallel").get<bool>();
      r.alpha_frac = s.at("alpha_frac").get<double>();
      r.ra_cells = s.at("ra_cells").get<std::size_t>();
      r.aoi_cells = s.at("aoi_cells").get<std::size_t>();
      r.belief = s.at("belief").get<double>();
      const auto status = parse_status(s.at("status").get<std::string>());
      if (!status) throw ParseError("unknown status in trace");
      r.status = *status;
      if (!s.at("xlm_x").is_null()) r.x_lm = Vec2{s.at("xlm_x").get<double>(), s.at("xlm_y").get<double>()};
      if (!s.at("steps_remaining").is_null()) r.steps_remaining = s.at("steps_remaining").get<int>();
      r.degenerate = s.value("degenerate", false);
      trace.steps.push_back(r);
    }
    const auto& summary = j.at("summary");
    const auto outcome = parse_outcome(summary.at("outcome").get<std::string>());
    if (!outcome) throw ParseError("unknown outcome in trace");
    trace.outcome = *outcome;
    trace.final_step = summary.at("final_step").get<int>();
    trace.final_belief = summary.at("final_belief").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("trace json: ") + e.what());
  }
  return trace;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

SimTrace load_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open trace '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_trace_json(text);
  return parse_trace_csv(text);
}

void emit_trace(const SimTrace& trace, TraceFormat format, const std::filesystem::path& path) {
  write_text(path, format == TraceFormat::csv ? format_trace_csv(trace) : format_trace_json(trace));
}

void emit_plot_data(const SimTrace& trace, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());

  std::string belief = "t,belief\n";
  std::string trajectory = "t,x,y\n";
  std::optional<Vec2> last_xlm;
  for (const auto& r : trace.steps) {
    if (r.status == VerdictStatus::armed || r.status == VerdictStatus::halt) {
      belief += std::to_string(r.t) + ',' + g9(r.belief) + '\n';
    }
    trajectory += std::to_string(r.t) + ',' + g9(r.position.x) + ',' + g9(r.position.y) + '\n';
    if (r.x_lm) last_xlm = r.x_lm;
  }
  if (last_xlm) trajectory += "xlm," + g9(last_xlm->x) + ',' + g9(last_xlm->y) + '\n';
  write_text(dir / "belief.csv", belief);
  write_text(dir / "trajectory.csv", trajectory);
}

}  // namespace apfpred
