#pragma once

// Exact capacitated routing for a single carrier: every demanded terminal
// is served by exactly one closed tour depot -> terminals -> depot, each
// used vehicle runs at most one tour, and a tour's load never exceeds its
// vehicle's capacity.

#include <map>
#include <string>
#include <vector>

#include "fleetgame/scenario.hpp"

namespace fleetgame {

// terminal id -> packages, positive entries only.
using DemandVector = std::map<int, int>;

struct Route {
  int vehicle = 0;             // index into Carrier::vehicles
  std::vector<int> sequence;   // terminal ids in visit order
  int load = 0;

  friend bool operator==(const Route&, const Route&) = default;
};

// Routes are kept sorted by vehicle index.
struct RoutePlan {
  std::vector<Route> routes;
  double total_cost = 0.0;
  double total_delay = 0.0;  // minutes

  int vehicles_used() const { return static_cast<int>(routes.size()); }
};

// Deterministic tie-break between plans of equal cost: fewer vehicles,
// then the smaller (vehicle, sequence) route list.
bool canonical_less(const RoutePlan& a, const RoutePlan& b);

// Two plan costs are treated as equal when they differ by no more than this
// relative amount.
bool costs_tie(double a, double b);

// Throws ValidationError when a route names an unknown vehicle or terminal,
// repeats a terminal, or uses a vehicle twice.
void check_plan_structure(const RoutePlan& plan, const Carrier& carrier, const DistanceMatrix& dist);

double route_length(const std::vector<int>& sequence, const DistanceMatrix& dist);

double plan_cost(const RoutePlan& plan, const Carrier& carrier, const CostParams& cost,
                 const DistanceMatrix& dist);
double plan_delay(const RoutePlan& plan, const CostParams& cost, const DistanceMatrix& dist);

// Round-trip delay visiting the terminals exactly in the given order.
double fixed_order_delay(int carrier_id, const std::vector<int>& order, const Scenario& scenario);

// Exact bin-packing test: can every demand be placed on some vehicle with
// each vehicle's total load within its capacity?
bool fleet_can_carry(const DemandVector& demand, const std::vector<Vehicle>& vehicles);

// Minimum-cost plan via subset dynamic programming. Supports up to
// kMaxSolveTerminals demanded terminals.
inline constexpr int kMaxSolveTerminals = 16;
RoutePlan solve_vrp(int carrier_id, const DemandVector& demand, const Scenario& scenario);

// Exhaustive enumeration of assignments and visit orders; test oracle.
inline constexpr int kMaxBruteForceTerminals = 8;
RoutePlan brute_force_vrp(int carrier_id, const DemandVector& demand, const Scenario& scenario);

std::string plan_to_json(const RoutePlan& plan);

}  // namespace fleetgame
