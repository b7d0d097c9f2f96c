#pragma once

// Domain model of a carrier-selection scenario: terminals, carriers and
// their fleets, routing cost parameters and the parameters of the
// customers' selection game.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fleetgame/error.hpp"

namespace fleetgame {

// Planar location in kilometers.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

struct Terminal {
  int id = 0;  // 1..T
  std::optional<Point> location;

  friend bool operator==(const Terminal&, const Terminal&) = default;
};

struct Vehicle {
  int capacity = 1;           // packages
  double initial_cost = 0.0;  // charged once when the vehicle is used

  friend bool operator==(const Vehicle&, const Vehicle&) = default;
};

// Dense square matrix of kilometers over nodes {0 = depot, 1..T}.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t nodes) : n_(nodes), data_(nodes * nodes, 0.0) {}

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct Carrier {
  int id = 0;  // 1..N
  std::optional<Point> depot;
  double fee = 0.0;
  std::vector<Vehicle> vehicles;
  std::optional<DistanceMatrix> distance_override;

  friend bool operator==(const Carrier&, const Carrier&) = default;
};

struct CostParams {
  double price_per_km = 0.0;
  double misc_cost_per_visit = 0.0;
  double speed_kmh = 40.0;
  double unload_minutes_per_customer = 0.0;

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

struct GameParams {
  int num_customers = 0;
  std::vector<double> terminal_probs;  // indexed by terminal id - 1
  double decision_rate = 1.0;
  std::vector<double> epsilon_sweep;  // strictly decreasing
  double stability_threshold = 0.01;

  friend bool operator==(const GameParams&, const GameParams&) = default;
};

inline const std::vector<double> kDefaultEpsilonSweep = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
inline constexpr double kDefaultStabilityThreshold = 0.01;

// Terminals and carriers are stored sorted by id, so terminal j lives at
// index j - 1 and carrier c at index c - 1.
struct Scenario {
  std::vector<Terminal> terminals;
  std::vector<Carrier> carriers;
  CostParams cost;
  GameParams game;

  int terminal_count() const { return static_cast<int>(terminals.size()); }
  int carrier_count() const { return static_cast<int>(carriers.size()); }

  const Carrier& carrier(int id) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Checks every invariant of the data model; throws ValidationError naming
// the first violation.
void validate(const Scenario& scenario);

// JSON text <-> Scenario. Parsing resolves defaults and validates.
Scenario parse_scenario(const std::string& json_text);
std::string dump_scenario(const Scenario& scenario);

Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// Override matrix when present, otherwise Euclidean distances between the
// depot and terminal locations.
DistanceMatrix distance_matrix(const Scenario& scenario, int carrier_id);

// Moves a coordinate-mode carrier's depot east by dx kilometers.
Scenario shift_carrier(const Scenario& scenario, int carrier_id, double dx);

}  // namespace fleetgame
