#include "fleetgame/vrp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <tuple>

#include <fmt/core.h>
#include <json.hpp>

namespace fleetgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelativeTieTolerance = 1e-9;

// Demanded terminals in ascending id order; bit i of a mask is terms[i].
struct DemandSet {
  std::vector<int> terms;
  std::vector<int> demand;

  int size() const { return static_cast<int>(terms.size()); }
  std::uint32_t full_mask() const { return (std::uint32_t{1} << terms.size()) - 1; }

  std::vector<long long> subset_loads() const {
    std::vector<long long> load(std::size_t{1} << terms.size(), 0);
    for (std::uint32_t mask = 1; mask < load.size(); ++mask) {
      int low = std::countr_zero(mask);
      load[mask] = load[mask & (mask - 1)] + demand[static_cast<std::size_t>(low)];
    }
    return load;
  }
};

DemandSet collect_demand(const DemandVector& demand, int terminal_count) {
  DemandSet out;
  for (const auto& [terminal, packages] : demand) {
    if (terminal < 1 || terminal > terminal_count) {
      throw ValidationError(fmt::format("unknown terminal id {}", terminal));
    }
    if (packages < 1) throw ValidationError(fmt::format("demand at terminal {} must be at least 1", terminal));
    out.terms.push_back(terminal);
    out.demand.push_back(packages);
  }
  return out;
}

bool can_pack(const DemandSet& set, const std::vector<Vehicle>& vehicles) {
  if (set.size() == 0) return true;
  const int max_cap = std::max_element(vehicles.begin(), vehicles.end(), [](const auto& a, const auto& b) {
                        return a.capacity < b.capacity;
                      })->capacity;
  if (*std::max_element(set.demand.begin(), set.demand.end()) > max_cap) return false;
  const long long total = std::accumulate(set.demand.begin(), set.demand.end(), 0LL);
  if (total <= max_cap) return true;
  if (set.size() > kMaxSolveTerminals) {
    throw ValidationError(fmt::format("bin-packing check supports at most {} terminals", kMaxSolveTerminals));
  }

  const auto load = set.subset_loads();
  const std::uint32_t full = set.full_mask();
  std::vector<char> reachable(std::size_t{full} + 1, 0);
  reachable[0] = 1;
  for (const Vehicle& v : vehicles) {
    std::vector<char> next = reachable;
    for (std::uint32_t covered = 0; covered <= full; ++covered) {
      if (!reachable[covered]) continue;
      const std::uint32_t free = full & ~covered;
      for (std::uint32_t sub = free; sub != 0; sub = (sub - 1) & free) {
        if (load[sub] <= v.capacity) next[covered | sub] = 1;
      }
    }
    reachable.swap(next);
    if (reachable[full]) return true;
  }
  return reachable[full] != 0;
}

void require_carryable(const DemandSet& set, const Carrier& carrier) {
  if (!can_pack(set, carrier.vehicles)) {
    throw InfeasibleError(
        fmt::format("demand of carrier {} cannot be packed into its vehicle capacities", carrier.id));
  }
}

// Cheapest (cost, vehicles used) with tolerance-aware comparison.
struct Score {
  double cost = kInf;
  int vehicles = 0;
};

bool better(const Score& a, const Score& b) {
  if (!costs_tie(a.cost, b.cost)) return a.cost < b.cost;
  return a.vehicles < b.vehicles;
}

bool same(const Score& a, const Score& b) { return costs_tie(a.cost, b.cost) && a.vehicles == b.vehicles; }

// Shortest closed tours over every subset of the demanded terminals.
class TourTable {
 public:
  TourTable(const DemandSet& set, const DistanceMatrix& dist) : set_(set), dist_(dist) {
    const int k = set.size();
    const std::size_t masks = std::size_t{1} << k;
    to_depot_.assign(masks * static_cast<std::size_t>(std::max(k, 1)), kInf);
    tour_.assign(masks, kInf);
    tour_[0] = 0.0;
    for (std::uint32_t mask = 1; mask < masks; ++mask) {
      for (int j = 0; j < k; ++j) {
        if (!(mask & (1u << j))) continue;
        const std::uint32_t rest = mask & ~(1u << j);
        double best = kInf;
        if (rest == 0) {
          best = d(j, -1);
        } else {
          for (int i = 0; i < k; ++i) {
            if (rest & (1u << i)) best = std::min(best, d(j, i) + path(rest, i));
          }
        }
        path(mask, j) = best;
        tour_[mask] = std::min(tour_[mask], d(-1, j) + best);
      }
    }
  }

  double tour(std::uint32_t mask) const { return tour_[mask]; }

  // Lexicographically smallest visit order among the shortest tours.
  std::vector<int> sequence(std::uint32_t mask) const {
    std::vector<int> out;
    int at = -1;
    double remaining = tour_[mask];
    while (mask != 0) {
      for (int j = 0; j < set_.size(); ++j) {
        if (!(mask & (1u << j))) continue;
        const double via = d(at, j) + path(mask, j);
        if (costs_tie(via, remaining)) {
          out.push_back(set_.terms[static_cast<std::size_t>(j)]);
          remaining = path(mask, j);
          mask &= ~(1u << j);
          at = j;
          break;
        }
      }
    }
    return out;
  }

 private:
  // Index -1 is the depot.
  double d(int a, int b) const {
    const std::size_t na = a < 0 ? 0 : static_cast<std::size_t>(set_.terms[static_cast<std::size_t>(a)]);
    const std::size_t nb = b < 0 ? 0 : static_cast<std::size_t>(set_.terms[static_cast<std::size_t>(b)]);
    return dist_(na, nb);
  }
  double path(std::uint32_t mask, int j) const {
    return to_depot_[mask * static_cast<std::size_t>(set_.size()) + static_cast<std::size_t>(j)];
  }
  double& path(std::uint32_t mask, int j) {
    return to_depot_[mask * static_cast<std::size_t>(set_.size()) + static_cast<std::size_t>(j)];
  }

  const DemandSet& set_;
  const DistanceMatrix& dist_;
  std::vector<double> to_depot_;  // shortest path from j through all of mask, ending at the depot
  std::vector<double> tour_;
};

RoutePlan finish_plan(RoutePlan plan, const Carrier& carrier, const CostParams& cost, const DistanceMatrix& dist) {
  std::sort(plan.routes.begin(), plan.routes.end(),
            [](const Route& a, const Route& b) { return a.vehicle < b.vehicle; });
  plan.total_cost = plan_cost(plan, carrier, cost, dist);
  plan.total_delay = plan_delay(plan, cost, dist);
  return plan;
}

}  // namespace

bool costs_tie(double a, double b) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  const double scale = std::max({1.0, std::abs(a), std::abs(b)});
  return std::abs(a - b) <= kRelativeTieTolerance * scale;
}

bool canonical_less(const RoutePlan& a, const RoutePlan& b) {
  if (a.routes.size() != b.routes.size()) return a.routes.size() < b.routes.size();
  return std::lexicographical_compare(
      a.routes.begin(), a.routes.end(), b.routes.begin(), b.routes.end(),
      [](const Route& x, const Route& y) { return std::tie(x.vehicle, x.sequence) < std::tie(y.vehicle, y.sequence); });
}

void check_plan_structure(const RoutePlan& plan, const Carrier& carrier, const DistanceMatrix& dist) {
  const int terminal_count = static_cast<int>(dist.size()) - 1;
  std::set<int> vehicles;
  std::set<int> visited;
  for (const Route& r : plan.routes) {
    if (r.vehicle < 0 || r.vehicle >= static_cast<int>(carrier.vehicles.size())) {
      throw ValidationError(fmt::format("route references unknown vehicle {}", r.vehicle));
    }
    if (!vehicles.insert(r.vehicle).second) {
      throw ValidationError(fmt::format("vehicle {} has more than one route", r.vehicle));
    }
    if (r.sequence.empty()) throw ValidationError("route sequence must not be empty");
    for (int t : r.sequence) {
      if (t < 1 || t > terminal_count) throw ValidationError(fmt::format("route references unknown terminal {}", t));
      if (!visited.insert(t).second) throw ValidationError(fmt::format("terminal {} visited more than once", t));
    }
  }
}

double route_length(const std::vector<int>& sequence, const DistanceMatrix& dist) {
  if (sequence.empty()) return 0.0;
  double length = 0.0;
  std::size_t at = 0;
  for (int t : sequence) {
    length += dist(at, static_cast<std::size_t>(t));
    at = static_cast<std::size_t>(t);
  }
  return length + dist(at, 0);
}

double plan_cost(const RoutePlan& plan, const Carrier& carrier, const CostParams& cost, const DistanceMatrix& dist) {
  check_plan_structure(plan, carrier, dist);
  double initial = 0.0;
  double travel = 0.0;
  double misc = 0.0;
  for (const Route& r : plan.routes) {
    initial += carrier.vehicles[static_cast<std::size_t>(r.vehicle)].initial_cost;
    travel += cost.price_per_km * route_length(r.sequence, dist);
    misc += cost.misc_cost_per_visit * static_cast<double>(r.sequence.size());
  }
  return initial + travel + misc;
}

double plan_delay(const RoutePlan& plan, const CostParams& cost, const DistanceMatrix& dist) {
  double km = 0.0;
  for (const Route& r : plan.routes) {
    for (int t : r.sequence) {
      if (t < 1 || t >= static_cast<int>(dist.size())) {
        throw ValidationError(fmt::format("route references unknown terminal {}", t));
      }
    }
    km += route_length(r.sequence, dist);
  }
  return 60.0 * km / cost.speed_kmh;
}

double fixed_order_delay(int carrier_id, const std::vector<int>& order, const Scenario& scenario) {
  if (order.empty()) throw ValidationError("visit order must not be empty");
  std::set<int> seen;
  for (int t : order) {
    if (t < 1 || t > scenario.terminal_count()) throw ValidationError(fmt::format("unknown terminal id {}", t));
    if (!seen.insert(t).second) throw ValidationError(fmt::format("terminal {} repeated in visit order", t));
  }
  const DistanceMatrix dist = distance_matrix(scenario, carrier_id);
  return 60.0 * route_length(order, dist) / scenario.cost.speed_kmh;
}

bool fleet_can_carry(const DemandVector& demand, const std::vector<Vehicle>& vehicles) {
  if (vehicles.empty()) return demand.empty();
  DemandSet set;
  for (const auto& [terminal, packages] : demand) {
    set.terms.push_back(terminal);
    set.demand.push_back(packages);
  }
  return can_pack(set, vehicles);
}

RoutePlan solve_vrp(int carrier_id, const DemandVector& demand, const Scenario& scenario) {
  const Carrier& carrier = scenario.carrier(carrier_id);
  const DemandSet set = collect_demand(demand, scenario.terminal_count());
  const DistanceMatrix dist = distance_matrix(scenario, carrier_id);
  if (set.size() > kMaxSolveTerminals) {
    throw ValidationError(fmt::format("solver supports at most {} demanded terminals", kMaxSolveTerminals));
  }
  require_carryable(set, carrier);
  if (set.size() == 0) return finish_plan({}, carrier, scenario.cost, dist);

  const TourTable tours(set, dist);
  const auto load = set.subset_loads();
  const std::uint32_t full = set.full_mask();
  const std::size_t masks = std::size_t{full} + 1;
  const std::size_t fleet = carrier.vehicles.size();
  const CostParams& p = scenario.cost;

  auto route_cost = [&](std::size_t v, std::uint32_t mask) {
    const Vehicle& vehicle = carrier.vehicles[v];
    if (load[mask] > vehicle.capacity) return kInf;
    return vehicle.initial_cost + p.price_per_km * tours.tour(mask) +
           p.misc_cost_per_visit * static_cast<double>(std::popcount(mask));
  };

  // best[v][mask]: cheapest way to serve mask with vehicles v..fleet-1.
  std::vector<std::vector<Score>> best(fleet + 1, std::vector<Score>(masks));
  best[fleet][0] = Score{0.0, 0};
  for (std::size_t v = fleet; v-- > 0;) {
    for (std::uint32_t mask = 0; mask <= full; ++mask) {
      Score s = best[v + 1][mask];
      for (std::uint32_t sub = mask; sub != 0; sub = (sub - 1) & mask) {
        const Score& rest = best[v + 1][mask & ~sub];
        if (!std::isfinite(rest.cost)) continue;
        const double c = route_cost(v, sub);
        if (!std::isfinite(c)) continue;
        Score candidate{c + rest.cost, rest.vehicles + 1};
        if (better(candidate, s)) s = candidate;
      }
      best[v][mask] = s;
    }
  }
  if (!std::isfinite(best[0][full].cost)) {
    throw InfeasibleError(fmt::format("no feasible routing for carrier {}", carrier_id));
  }

  // Walk the vehicles in order. Using the current vehicle always yields a
  // smaller route list than leaving it idle, so take it whenever some
  // optimal completion exists, with the lexicographically smallest tour.
  RoutePlan plan;
  std::uint32_t remaining = full;
  Score target = best[0][full];
  for (std::size_t v = 0; v < fleet && remaining != 0; ++v) {
    std::vector<int> chosen_seq;
    std::uint32_t chosen = 0;
    for (std::uint32_t sub = remaining; sub != 0; sub = (sub - 1) & remaining) {
      const Score& rest = best[v + 1][remaining & ~sub];
      const double c = route_cost(v, sub);
      if (!std::isfinite(c) || !std::isfinite(rest.cost)) continue;
      if (!same(Score{c + rest.cost, rest.vehicles + 1}, target)) continue;
      std::vector<int> seq = tours.sequence(sub);
      if (chosen == 0 || seq < chosen_seq) {
        chosen = sub;
        chosen_seq = std::move(seq);
      }
    }
    if (chosen == 0) continue;
    plan.routes.push_back(Route{static_cast<int>(v), chosen_seq, static_cast<int>(load[chosen])});
    remaining &= ~chosen;
    target = best[v + 1][remaining];
  }
  return finish_plan(std::move(plan), carrier, scenario.cost, dist);
}

RoutePlan brute_force_vrp(int carrier_id, const DemandVector& demand, const Scenario& scenario) {
  const Carrier& carrier = scenario.carrier(carrier_id);
  const DemandSet set = collect_demand(demand, scenario.terminal_count());
  if (set.size() > kMaxBruteForceTerminals) {
    throw ValidationError(fmt::format("brute force supports at most {} demanded terminals", kMaxBruteForceTerminals));
  }
  const DistanceMatrix dist = distance_matrix(scenario, carrier_id);
  require_carryable(set, carrier);

  const std::size_t fleet = carrier.vehicles.size();
  const std::size_t k = set.terms.size();
  std::vector<std::size_t> owner(k, 0);
  std::optional<RoutePlan> best;

  auto consider = [&](const RoutePlan& candidate) {
    if (!best || (!costs_tie(candidate.total_cost, best->total_cost) && candidate.total_cost < best->total_cost) ||
        (costs_tie(candidate.total_cost, best->total_cost) && canonical_less(candidate, *best))) {
      best = candidate;
    }
  };

  // Enumerate every visit order of every vehicle's assigned terminals.
  auto enumerate_orders = [&](auto&& self, std::vector<Route>& routes, std::size_t index, RoutePlan& plan) -> void {
    if (index == routes.size()) {
      plan.routes = routes;
      plan.total_cost = plan_cost(plan, carrier, scenario.cost, dist);
      plan.total_delay = plan_delay(plan, scenario.cost, dist);
      consider(plan);
      return;
    }
    std::vector<int>& seq = routes[index].sequence;
    std::sort(seq.begin(), seq.end());
    do {
      self(self, routes, index + 1, plan);
    } while (std::next_permutation(seq.begin(), seq.end()));
  };

  while (true) {
    std::vector<Route> routes;
    bool fits = true;
    for (std::size_t v = 0; v < fleet && fits; ++v) {
      Route r{static_cast<int>(v), {}, 0};
      for (std::size_t i = 0; i < k; ++i) {
        if (owner[i] == v) {
          r.sequence.push_back(set.terms[i]);
          r.load += set.demand[i];
        }
      }
      if (r.load > carrier.vehicles[v].capacity) fits = false;
      if (!r.sequence.empty()) routes.push_back(std::move(r));
    }
    if (fits) {
      RoutePlan plan;
      enumerate_orders(enumerate_orders, routes, 0, plan);
    }

    std::size_t digit = 0;
    while (digit < k && ++owner[digit] == fleet) owner[digit++] = 0;
    if (digit == k) break;
  }

  if (!best) throw InfeasibleError(fmt::format("no feasible routing for carrier {}", carrier_id));
  return *best;
}

std::string plan_to_json(const RoutePlan& plan) {
  nlohmann::json routes = nlohmann::json::array();
  for (const Route& r : plan.routes) {
    routes.push_back({{"vehicle", r.vehicle}, {"sequence", r.sequence}, {"load", r.load}});
  }
  nlohmann::json root{{"routes", routes}, {"total_cost", plan.total_cost}, {"total_delay", plan.total_delay}};
  return root.dump();
}

}  // namespace fleetgame
