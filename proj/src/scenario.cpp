#include "fleetgame/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <set>
#include <sstream>
#include <string_view>

#include <fmt/core.h>
#include <json.hpp>

namespace fleetgame {

namespace {

using nlohmann::json;

constexpr double kProbSumTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-9;

[[noreturn]] void fail(const std::string& message) { throw ValidationError(message); }

void reject_unknown_keys(const json& object, std::string_view where,
                         std::initializer_list<std::string_view> allowed) {
  if (!object.is_object()) fail(fmt::format("{} must be a JSON object", where));
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(fmt::format("unknown key '{}' in {}", key, where));
    }
  }
}

const json& require(const json& object, const char* key, std::string_view where) {
  auto it = object.find(key);
  if (it == object.end()) fail(fmt::format("missing key '{}' in {}", key, where));
  return *it;
}

double as_number(const json& value, std::string_view what) {
  if (!value.is_number()) fail(fmt::format("{} must be a number", what));
  double v = value.get<double>();
  if (!std::isfinite(v)) fail(fmt::format("{} must be finite", what));
  return v;
}

int as_integer(const json& value, std::string_view what) {
  if (value.is_number_integer()) return value.get<int>();
  if (value.is_number_float()) {
    double v = value.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 1e9) return static_cast<int>(v);
  }
  fail(fmt::format("{} must be an integer", what));
}

Point parse_point(const json& value, std::string_view where) {
  reject_unknown_keys(value, where, {"x", "y"});
  return Point{as_number(require(value, "x", where), fmt::format("{}.x", where)),
               as_number(require(value, "y", where), fmt::format("{}.y", where))};
}

std::vector<double> parse_number_array(const json& value, std::string_view what) {
  if (!value.is_array()) fail(fmt::format("{} must be an array", what));
  std::vector<double> out;
  out.reserve(value.size());
  for (const auto& v : value) out.push_back(as_number(v, what));
  return out;
}

Terminal parse_terminal(const json& value) {
  reject_unknown_keys(value, "terminal", {"id", "x", "y"});
  Terminal t;
  t.id = as_integer(require(value, "id", "terminal"), "terminal id");
  bool has_x = value.contains("x");
  bool has_y = value.contains("y");
  if (has_x != has_y) fail(fmt::format("terminal {} must give both x and y or neither", t.id));
  if (has_x) {
    t.location = Point{as_number(value.at("x"), "terminal x"), as_number(value.at("y"), "terminal y")};
  }
  return t;
}

Carrier parse_carrier(const json& value) {
  reject_unknown_keys(value, "carrier", {"id", "depot", "fee", "vehicles", "distance_matrix"});
  Carrier c;
  c.id = as_integer(require(value, "id", "carrier"), "carrier id");
  if (value.contains("depot")) c.depot = parse_point(value.at("depot"), "carrier depot");
  c.fee = as_number(require(value, "fee", "carrier"), "carrier fee");

  const json& vehicles = require(value, "vehicles", "carrier");
  if (!vehicles.is_array()) fail("carrier vehicles must be an array");
  for (const auto& v : vehicles) {
    reject_unknown_keys(v, "vehicle", {"capacity", "initial_cost"});
    c.vehicles.push_back(Vehicle{as_integer(require(v, "capacity", "vehicle"), "vehicle capacity"),
                                 as_number(require(v, "initial_cost", "vehicle"), "vehicle initial_cost")});
  }

  if (value.contains("distance_matrix")) {
    const json& rows = value.at("distance_matrix");
    if (!rows.is_array()) fail("distance_matrix must be an array of rows");
    DistanceMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto row = parse_number_array(rows[i], "distance_matrix entry");
      if (row.size() != rows.size()) fail(fmt::format("carrier {} distance_matrix must be square", c.id));
      for (std::size_t j = 0; j < row.size(); ++j) m(i, j) = row[j];
    }
    c.distance_override = std::move(m);
  }
  return c;
}

CostParams parse_cost(const json& value) {
  reject_unknown_keys(value, "cost",
                      {"price_per_km", "misc_cost_per_visit", "speed_kmh", "unload_minutes_per_customer"});
  CostParams p;
  p.price_per_km = as_number(require(value, "price_per_km", "cost"), "price_per_km");
  p.misc_cost_per_visit = as_number(require(value, "misc_cost_per_visit", "cost"), "misc_cost_per_visit");
  p.speed_kmh = as_number(require(value, "speed_kmh", "cost"), "speed_kmh");
  p.unload_minutes_per_customer =
      as_number(require(value, "unload_minutes_per_customer", "cost"), "unload_minutes_per_customer");
  return p;
}

GameParams parse_game(const json& value, int terminal_count) {
  reject_unknown_keys(value, "game",
                      {"num_customers", "terminal_probs", "decision_rate", "epsilon_sweep",
                       "stability_threshold"});
  GameParams g;
  g.num_customers = as_integer(require(value, "num_customers", "game"), "num_customers");
  if (value.contains("terminal_probs")) {
    g.terminal_probs = parse_number_array(value.at("terminal_probs"), "terminal_probs");
  } else if (terminal_count > 0) {
    g.terminal_probs.assign(terminal_count, 1.0 / terminal_count);
  }
  g.decision_rate = as_number(require(value, "decision_rate", "game"), "decision_rate");
  g.epsilon_sweep = value.contains("epsilon_sweep")
                        ? parse_number_array(value.at("epsilon_sweep"), "epsilon_sweep")
                        : kDefaultEpsilonSweep;
  g.stability_threshold = value.contains("stability_threshold")
                              ? as_number(value.at("stability_threshold"), "stability_threshold")
                              : kDefaultStabilityThreshold;
  return g;
}

json point_to_json(const Point& p) { return json{{"x", p.x}, {"y", p.y}}; }

void validate_matrix(const Carrier& c, std::size_t nodes) {
  const DistanceMatrix& m = *c.distance_override;
  if (m.size() != nodes) {
    fail(fmt::format("carrier {} distance_matrix must be {}x{}", c.id, nodes, nodes));
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    if (m(i, i) != 0.0) fail(fmt::format("carrier {} distance_matrix diagonal must be zero", c.id));
    for (std::size_t j = 0; j < nodes; ++j) {
      if (!std::isfinite(m(i, j)) || m(i, j) < 0.0) {
        fail(fmt::format("carrier {} distance_matrix entries must be nonnegative", c.id));
      }
      if (std::abs(m(i, j) - m(j, i)) > kSymmetryTolerance * std::max(1.0, std::abs(m(i, j)))) {
        fail(fmt::format("carrier {} distance_matrix must be symmetric", c.id));
      }
    }
  }
}

bool finite_point(const Point& p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

const Carrier& Scenario::carrier(int id) const {
  if (id < 1 || id > carrier_count()) throw ValidationError(fmt::format("unknown carrier id {}", id));
  return carriers[static_cast<std::size_t>(id - 1)];
}

void validate(const Scenario& s) {
  if (s.terminals.empty()) fail("at least one terminal is required");
  if (s.carriers.empty()) fail("at least one carrier is required");

  for (std::size_t i = 0; i < s.terminals.size(); ++i) {
    const Terminal& t = s.terminals[i];
    if (t.id != static_cast<int>(i) + 1) fail("terminal ids must be unique and contiguous from 1");
    if (t.location && !finite_point(*t.location)) fail(fmt::format("terminal {} location must be finite", t.id));
  }
  const bool all_terminals_located =
      std::all_of(s.terminals.begin(), s.terminals.end(), [](const Terminal& t) { return t.location.has_value(); });

  const std::size_t nodes = s.terminals.size() + 1;
  for (std::size_t i = 0; i < s.carriers.size(); ++i) {
    const Carrier& c = s.carriers[i];
    if (c.id != static_cast<int>(i) + 1) fail("carrier ids must be unique and contiguous from 1");
    if (c.vehicles.empty()) fail(fmt::format("carrier {} must have at least one vehicle", c.id));
    if (!(c.fee >= 0.0)) fail(fmt::format("carrier {} fee must be nonnegative", c.id));
    for (const Vehicle& v : c.vehicles) {
      if (v.capacity < 1) fail(fmt::format("carrier {} vehicle capacity must be at least 1", c.id));
      if (!(v.initial_cost >= 0.0)) fail(fmt::format("carrier {} vehicle initial_cost must be nonnegative", c.id));
    }
    if (c.depot && !finite_point(*c.depot)) fail(fmt::format("carrier {} depot must be finite", c.id));
    if (c.distance_override) {
      validate_matrix(c, nodes);
    } else if (!c.depot || !all_terminals_located) {
      fail(fmt::format("carrier {} needs a depot and located terminals, or a distance_matrix", c.id));
    }
  }

  const CostParams& p = s.cost;
  if (!(p.price_per_km >= 0.0)) fail("price_per_km must be nonnegative");
  if (!(p.misc_cost_per_visit >= 0.0)) fail("misc_cost_per_visit must be nonnegative");
  if (!(p.speed_kmh > 0.0)) fail("speed_kmh must be positive");
  if (!(p.unload_minutes_per_customer >= 0.0)) fail("unload_minutes_per_customer must be nonnegative");

  const GameParams& g = s.game;
  if (g.num_customers < 0) fail("num_customers must be nonnegative");
  if (g.terminal_probs.size() != s.terminals.size()) fail("terminal_probs must have one entry per terminal");
  for (double prob : g.terminal_probs) {
    if (!(prob >= 0.0)) fail("terminal_probs entries must be nonnegative");
  }
  double total = std::accumulate(g.terminal_probs.begin(), g.terminal_probs.end(), 0.0);
  if (std::abs(total - 1.0) > kProbSumTolerance) fail("terminal_probs must sum to 1");
  if (!(g.decision_rate > 0.0)) fail("decision_rate must be positive");
  if (g.epsilon_sweep.empty()) fail("epsilon_sweep must not be empty");
  for (std::size_t i = 0; i < g.epsilon_sweep.size(); ++i) {
    if (!(g.epsilon_sweep[i] > 0.0)) fail("epsilon_sweep values must be positive");
    if (i > 0 && !(g.epsilon_sweep[i] < g.epsilon_sweep[i - 1])) fail("epsilon_sweep must be strictly decreasing");
  }
  if (!(g.stability_threshold > 0.0 && g.stability_threshold <= 1.0)) {
    fail("stability_threshold must lie in (0, 1]");
  }
}

Scenario parse_scenario(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("malformed scenario JSON: {}", e.what()));
  }
  reject_unknown_keys(root, "scenario", {"terminals", "carriers", "cost", "game"});

  Scenario s;
  const json& terminals = require(root, "terminals", "scenario");
  if (!terminals.is_array()) fail("terminals must be an array");
  for (const auto& t : terminals) s.terminals.push_back(parse_terminal(t));

  const json& carriers = require(root, "carriers", "scenario");
  if (!carriers.is_array()) fail("carriers must be an array");
  for (const auto& c : carriers) s.carriers.push_back(parse_carrier(c));

  std::sort(s.terminals.begin(), s.terminals.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(s.carriers.begin(), s.carriers.end(), [](const auto& a, const auto& b) { return a.id < b.id; });

  s.cost = parse_cost(require(root, "cost", "scenario"));
  s.game = parse_game(require(root, "game", "scenario"), s.terminal_count());
  validate(s);
  return s;
}

std::string dump_scenario(const Scenario& s) {
  json root;
  root["terminals"] = json::array();
  for (const Terminal& t : s.terminals) {
    json jt{{"id", t.id}};
    if (t.location) {
      jt["x"] = t.location->x;
      jt["y"] = t.location->y;
    }
    root["terminals"].push_back(jt);
  }
  root["carriers"] = json::array();
  for (const Carrier& c : s.carriers) {
    json jc{{"id", c.id}, {"fee", c.fee}, {"vehicles", json::array()}};
    if (c.depot) jc["depot"] = point_to_json(*c.depot);
    for (const Vehicle& v : c.vehicles) {
      jc["vehicles"].push_back(json{{"capacity", v.capacity}, {"initial_cost", v.initial_cost}});
    }
    if (c.distance_override) {
      const DistanceMatrix& m = *c.distance_override;
      json rows = json::array();
      for (std::size_t i = 0; i < m.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
      }
      jc["distance_matrix"] = rows;
    }
    root["carriers"].push_back(jc);
  }
  root["cost"] = json{{"price_per_km", s.cost.price_per_km},
                      {"misc_cost_per_visit", s.cost.misc_cost_per_visit},
                      {"speed_kmh", s.cost.speed_kmh},
                      {"unload_minutes_per_customer", s.cost.unload_minutes_per_customer}};
  root["game"] = json{{"num_customers", s.game.num_customers},
                      {"terminal_probs", s.game.terminal_probs},
                      {"decision_rate", s.game.decision_rate},
                      {"epsilon_sweep", s.game.epsilon_sweep},
                      {"stability_threshold", s.game.stability_threshold}};
  return root.dump(2);
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open scenario file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError(fmt::format("cannot read scenario file '{}'", path.string()));
  return parse_scenario(buffer.str());
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write scenario file '{}'", path.string()));
  out << dump_scenario(scenario) << '\n';
  if (!out) throw IoError(fmt::format("cannot write scenario file '{}'", path.string()));
}

DistanceMatrix distance_matrix(const Scenario& s, int carrier_id) {
  const Carrier& c = s.carrier(carrier_id);
  if (c.distance_override) return *c.distance_override;

  std::vector<Point> nodes;
  nodes.reserve(s.terminals.size() + 1);
  nodes.push_back(*c.depot);
  for (const Terminal& t : s.terminals) nodes.push_back(*t.location);

  DistanceMatrix m(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      double d = std::hypot(nodes[i].x - nodes[j].x, nodes[i].y - nodes[j].y);
      m(i, j) = d;
      m(j, i) = d;
    }
  }
  return m;
}

Scenario shift_carrier(const Scenario& scenario, int carrier_id, double dx) {
  const Carrier& c = scenario.carrier(carrier_id);
  if (c.distance_override || !c.depot) {
    throw ValidationError(fmt::format("carrier {} uses a distance matrix and cannot be shifted", carrier_id));
  }
  if (!std::isfinite(dx)) throw ValidationError("shift must be finite");
  Scenario shifted = scenario;
  shifted.carriers[static_cast<std::size_t>(carrier_id - 1)].depot->x += dx;
  return shifted;
}

}  // namespace fleetgame
