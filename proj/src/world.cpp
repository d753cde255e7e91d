#include "apfpred/world.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "apfpred/errors.hpp"

namespace apfpred {

OccupancyGrid::OccupancyGrid(int width, int height, double resolution, Vec2 origin, std::vector<std::uint8_t> cells)
    : width_(width), height_(height), resolution_(resolution), origin_(origin), cells_(std::move(cells)) {
  if (width < 1 || height < 1) throw ConfigError("grid dimensions must be at least 1x1");
  if (!(resolution > 0.0)) throw ConfigError("grid resolution must be positive");
  if (cells_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ConfigError("grid cell count does not match dimensions");
  }
}

OccupancyGrid OccupancyGrid::empty(int width, int height, double resolution, Vec2 origin) {
  return OccupancyGrid(width, height, resolution, origin,
                       std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                 static_cast<std::size_t>(std::max(height, 0))));
}

CellIndex OccupancyGrid::cell_of(const Vec2& p) const {
  return {static_cast<int>(std::floor((p.x - origin_.x) / resolution_)),
          static_cast<int>(std::floor((p.y - origin_.y) / resolution_))};
}

Vec2 OccupancyGrid::cell_center(const CellIndex& c) const {
  return {origin_.x + (c.ix + 0.5) * resolution_, origin_.y + (c.iy + 0.5) * resolution_};
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count_if(cells_.begin(), cells_.end(), [](std::uint8_t v) { return v != 0; }));
}

GridBuilder::GridBuilder(int width, int height, double resolution, Vec2 origin)
    : width_(width),
      height_(height),
      resolution_(resolution),
      origin_(origin),
      cells_(static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0))) {}

GridBuilder& GridBuilder::fill_rect(const Vec2& lo, const Vec2& hi) {
  for (int iy = 0; iy < height_; ++iy) {
    const double cy = origin_.y + (iy + 0.5) * resolution_;
    if (cy < lo.y || cy > hi.y) continue;
    for (int ix = 0; ix < width_; ++ix) {
      const double cx = origin_.x + (ix + 0.5) * resolution_;
      if (cx >= lo.x && cx <= hi.x) cells_[static_cast<std::size_t>(iy) * width_ + ix] = 1;
    }
  }
  return *this;
}

GridBuilder& GridBuilder::set(const CellIndex& c, bool occupied) {
  if (c.ix >= 0 && c.iy >= 0 && c.ix < width_ && c.iy < height_) {
    cells_[static_cast<std::size_t>(c.iy) * width_ + c.ix] = occupied ? 1 : 0;
  }
  return *this;
}

OccupancyGrid GridBuilder::build() const { return OccupancyGrid(width_, height_, resolution_, origin_, cells_); }

// ---------------------------------------------------------------------------
// CellSet

CellSet::CellSet(std::vector<std::uint32_t> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool CellSet::contains(std::uint32_t id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

bool CellSet::includes(const CellSet& other) const {
  return std::includes(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end());
}

CellSet CellSet::united(const CellSet& other) const {
  CellSet out;
  out.ids_.reserve(ids_.size() + other.ids_.size());
  std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(), std::back_inserter(out.ids_));
  return out;
}

CellSet CellSet::intersected(const CellSet& other) const {
  CellSet out;
  std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(), std::back_inserter(out.ids_));
  return out;
}

CellSet CellSet::minus(const CellSet& other) const {
  CellSet out;
  std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(), std::back_inserter(out.ids_));
  return out;
}

// ---------------------------------------------------------------------------
// Ray traversal

namespace {

// Amanatides-Woo stepping. `visit(cell, t_enter)` is called for every cell entered after the
// origin cell, in order, while t_enter <= max_t; returning false stops the walk.
template <class Visit>
void traverse(const OccupancyGrid& grid, const Vec2& origin, const Vec2& dir, double max_t, Visit&& visit) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double res = grid.resolution();
  CellIndex cell = grid.cell_of(origin);

  const int step_x = dir.x > 0.0 ? 1 : (dir.x < 0.0 ? -1 : 0);
  const int step_y = dir.y > 0.0 ? 1 : (dir.y < 0.0 ? -1 : 0);

  auto boundary = [&](int index, double o) { return o + index * res; };
  double t_max_x = kInf;
  double t_max_y = kInf;
  if (step_x > 0) t_max_x = (boundary(cell.ix + 1, grid.origin().x) - origin.x) / dir.x;
  if (step_x < 0) t_max_x = (boundary(cell.ix, grid.origin().x) - origin.x) / dir.x;
  if (step_y > 0) t_max_y = (boundary(cell.iy + 1, grid.origin().y) - origin.y) / dir.y;
  if (step_y < 0) t_max_y = (boundary(cell.iy, grid.origin().y) - origin.y) / dir.y;
  const double t_delta_x = step_x != 0 ? res / std::abs(dir.x) : kInf;
  const double t_delta_y = step_y != 0 ? res / std::abs(dir.y) : kInf;

  for (;;) {
    double t = 0.0;
    if (t_max_x < t_max_y) {
      t = t_max_x;
      cell.ix += step_x;
      t_max_x += t_delta_x;
    } else {
      t = t_max_y;
      cell.iy += step_y;
      t_max_y += t_delta_y;
    }
    if (!(t <= max_t)) return;
    // Once outside a convex grid a straight ray never re-enters it.
    if (!grid.in_bounds(cell)) return;
    if (!visit(cell, std::max(t, 0.0))) return;
  }
}

}  // namespace

HitReport raycast(const OccupancyGrid& grid, const Vec2& origin, const Vec2& direction, double max_range) {
  if (!(max_range > 0.0)) throw std::invalid_argument("raycast: max_range must be positive");
  if (!grid.contains(origin)) throw std::invalid_argument("raycast: origin outside grid");
  if (grid.occupied_at(origin)) throw SensorError("raycast: sensor origin inside an occupied cell");
  const double n = direction.norm();
  if (!(n > 0.0)) throw std::invalid_argument("raycast: zero direction");
  const Vec2 dir = direction / n;

  HitReport report{false, max_range, std::nullopt};
  traverse(grid, origin, dir, max_range, [&](const CellIndex& c, double t) {
    if (!grid.occupied(c)) return true;
    report.hit = true;
    report.distance = t;
    report.cell = c;
    return false;
  });
  return report;
}

bool line_of_sight(const OccupancyGrid& grid, const Vec2& origin, const Vec2& target) {
  const CellIndex goal = grid.cell_of(target);
  const Vec2 d = target - origin;
  const double len = d.norm();
  if (grid.cell_of(origin) == goal || len == 0.0) return true;
  bool visible = true;
  traverse(grid, origin, d / len, len, [&](const CellIndex& c, double) {
    if (c == goal) return false;
    if (grid.occupied(c)) {
      visible = false;
      return false;
    }
    return true;
  });
  return visible;
}

// ---------------------------------------------------------------------------
// Map documents

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_lines(std::string_view doc) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= doc.size()) {
    const std::size_t nl = doc.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < doc.size()) lines.push_back(doc.substr(pos));
      break;
    }
    lines.push_back(doc.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

template <class T>
T parse_number(std::string_view token, int line, int column, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(std::string("malformed header: bad ") + what + " '" + std::string(token) + "'", line, column);
  }
  return value;
}

}  // namespace

OccupancyGrid load_map(std::string_view document) {
  const auto lines = split_lines(document);
  if (lines.empty()) throw ParseError("malformed header: empty document", 1, 1);

  // Header: APFMAP v1 <width> <height> <resolution_m>
  const std::string_view header = rstrip(lines[0]);
  std::vector<std::pair<std::string_view, int>> tokens;  // token, 1-based column
  for (std::size_t i = 0; i < header.size();) {
    while (i < header.size() && (header[i] == ' ' || header[i] == '\t')) ++i;
    if (i >= header.size()) break;
    const std::size_t begin = i;
    while (i < header.size() && header[i] != ' ' && header[i] != '\t') ++i;
    tokens.emplace_back(header.substr(begin, i - begin), static_cast<int>(begin) + 1);
  }
  if (tokens.size() != 5) throw ParseError("malformed header: expected 'APFMAP v1 <width> <height> <resolution_m>'", 1, 1);
  if (tokens[0].first != "APFMAP") throw ParseError("malformed header: missing APFMAP magic", 1, tokens[0].second);
  if (tokens[1].first != "v1") throw ParseError("malformed header: unsupported version", 1, tokens[1].second);
  const int width = parse_number<int>(tokens[2].first, 1, tokens[2].second, "width");
  const int height = parse_number<int>(tokens[3].first, 1, tokens[3].second, "height");
  const double resolution = parse_number<double>(tokens[4].first, 1, tokens[4].second, "resolution");
  if (width < 1) throw ParseError("malformed header: width must be >= 1", 1, tokens[2].second);
  if (height < 1) throw ParseError("malformed header: height must be >= 1", 1, tokens[3].second);
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw ParseError("malformed header: resolution must be positive", 1, tokens[4].second);
  }

  std::vector<std::uint8_t> cells(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int row = 0; row < height; ++row) {
    const int line_no = row + 2;
    if (static_cast<std::size_t>(row + 1) >= lines.size()) {
      throw ParseError("ragged map: expected " + std::to_string(height) + " rows, found " + std::to_string(row), line_no, 1);
    }
    const std::string_view text = rstrip(lines[static_cast<std::size_t>(row) + 1]);
    if (text.size() != static_cast<std::size_t>(width)) {
      throw ParseError("ragged row: expected " + std::to_string(width) + " glyphs, found " + std::to_string(text.size()),
                       line_no, static_cast<int>(std::min(text.size(), static_cast<std::size_t>(width))) + 1);
    }
    const int iy = height - 1 - row;
    for (int ix = 0; ix < width; ++ix) {
      const char glyph = text[static_cast<std::size_t>(ix)];
      if (glyph != '.' && glyph != '#') {
        throw ParseError(std::string("unknown cell glyph '") + glyph + "'", line_no, ix + 1);
      }
      cells[static_cast<std::size_t>(iy) * width + ix] = glyph == '#' ? 1 : 0;
    }
  }
  for (std::size_t i = static_cast<std::size_t>(height) + 1; i < lines.size(); ++i) {
    if (!rstrip(lines[i]).empty()) throw ParseError("ragged map: extra row", static_cast<int>(i) + 1, 1);
  }
  return OccupancyGrid(width, height, resolution, Vec2{}, std::move(cells));
}

std::string save_map(const OccupancyGrid& grid) {
  std::string out = "APFMAP v1 " + std::to_string(grid.width()) + " " + std::to_string(grid.height()) + " " +
                    format_double(grid.resolution()) + "\n";
  out.reserve(out.size() + static_cast<std::size_t>(grid.width() + 1) * grid.height());
  for (int iy = grid.height() - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < grid.width(); ++ix) out.push_back(grid.occupied({ix, iy}) ? '#' : '.');
    out.push_back('\n');
  }
  return out;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

OccupancyGrid load_map_file(const std::filesystem::path& path) {
  try {
    return load_map(read_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_map_file(const OccupancyGrid& grid, const std::filesystem::path& path) { write_file(path, save_map(grid)); }

// ---------------------------------------------------------------------------
// Scenarios

void validate(const ScenarioConfig& c) {
  auto free_inside = [&](const Vec2& p, const char* what) {
    if (!c.map.contains(p)) throw ConfigError(std::string(what) + " lies outside the map");
    if (c.map.occupied_at(p)) throw ConfigError(std::string(what) + " lies in an occupied cell");
  };
  free_inside(c.start, "start");
  free_inside(c.goal, "goal");
  if (!(c.delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(c.rho0 > c.delta)) throw ConfigError("rho0 must exceed delta");
  if (!(c.gamma > 0.0 && c.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (c.n_rays < 3) throw ConfigError("n_rays must be at least 3");
  if (!(c.xi > 0.0)) throw ConfigError("xi must be positive");
  if (!(c.eta > 0.0)) throw ConfigError("eta must be positive");
  if (c.max_steps < 1) throw ConfigError("max_steps must be at least 1");
}

namespace {

constexpr double kResolution = 0.1;

// Long wall across the approach axis at 60% of the start->goal distance.
ScenarioConfig make_wall() {
  ScenarioConfig c;
  c.name = "wall";
  c.start = {1.0, 5.0};
  c.goal = {11.0, 5.0};
  const double center_x = c.start.x + 0.6 * (c.goal.x - c.start.x);
  const double half_width = 4.0;
  const double half_thickness = 0.2;
  c.map = GridBuilder(125, 100, kResolution)
              .fill_rect({center_x - half_thickness, c.start.y - half_width},
                         {center_x + half_thickness, c.start.y + half_width})
              .build();
  return c;
}

// Dead-end corridor whose mouth faces the start; the goal sits 1 m past the closed end.
ScenarioConfig make_hallway() {
  ScenarioConfig c;
  c.name = "hallway";
  c.start = {1.0, 5.0};
  c.goal = {11.0, 5.0};
  const double end_x = c.goal.x - 1.0;
  const double mouth_x = end_x - 6.0;
  const double half_gap = 0.6;
  // Thick side walls: thin ones let the side rays slip past the wall ends and the vehicle
  // oscillates at the mouth before the filter has seen enough.
  const double thickness = 1.0;
  const double cap = 0.2;
  const double axis = c.start.y;
  c.map = GridBuilder(125, 100, kResolution)
              .fill_rect({mouth_x, axis + half_gap}, {end_x, axis + half_gap + thickness})
              .fill_rect({mouth_x, axis - half_gap - thickness}, {end_x, axis - half_gap})
              .fill_rect({end_x - cap, axis - half_gap}, {end_x, axis + half_gap})
              .build();
  return c;
}

}  // namespace

std::vector<ScenarioConfig> builtin_scenarios() { return {make_wall(), make_hallway()}; }

std::optional<ScenarioConfig> builtin_scenario(std::string_view name) {
  for (auto& c : builtin_scenarios()) {
    if (c.name == name) return c;
  }
  return std::nullopt;
}

namespace {

Vec2 read_point(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != 2) throw ParseError(std::string("scenario field '") + key + "' must be [x, y]");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }

  ScenarioConfig c;
  try {
    c.name = j.value("name", path.stem().string());
    c.map_path = j.at("map").get<std::string>();
    const std::filesystem::path map_file = path.parent_path() / c.map_path;
    OccupancyGrid grid = load_map_file(map_file);
    if (j.contains("origin")) {
      const Vec2 origin = read_point(j, "origin");
      std::vector<std::uint8_t> cells(static_cast<std::size_t>(grid.width()) * grid.height());
      for (int iy = 0; iy < grid.height(); ++iy) {
        for (int ix = 0; ix < grid.width(); ++ix) cells[grid.linear({ix, iy})] = grid.occupied({ix, iy}) ? 1 : 0;
      }
      grid = OccupancyGrid(grid.width(), grid.height(), grid.resolution(), origin, std::move(cells));
    }
    c.map = std::move(grid);
    c.start = read_point(j, "start");
    c.goal = read_point(j, "goal");
    c.xi = j.value("xi", c.xi);
    c.eta = j.value("eta", c.eta);
    c.rho0 = j.value("rho0", c.rho0);
    c.delta = j.value("delta", c.delta);
    c.gamma = j.value("gamma", c.gamma);
    c.n_rays = j.value("n_rays", c.n_rays);
    c.max_steps = j.value("max_steps", c.max_steps);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  validate(c);
  return c;
}

std::filesystem::path save_scenario(const ScenarioConfig& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const std::string map_name = c.name + ".map";
  save_map_file(c.map, dir / map_name);
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["map"] = map_name;
  j["origin"] = {c.map.origin().x, c.map.origin().y};
  j["start"] = {c.start.x, c.start.y};
  j["goal"] = {c.goal.x, c.goal.y};
  j["xi"] = c.xi;
  j["eta"] = c.eta;
  j["rho0"] = c.rho0;
  j["delta"] = c.delta;
  j["gamma"] = c.gamma;
  j["n_rays"] = c.n_rays;
  j["max_steps"] = c.max_steps;
  const auto path = dir / (c.name + ".json");
  write_file(path, j.dump(2) + "\n");
  return path;
}

}  // namespace apfpred
