#include "fleetgame/expectation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include <fmt/core.h>

#include "fleetgame/vrp.hpp"

namespace fleetgame {

namespace {

void check_table_size(int terminal_count) {
  if (terminal_count < 1 || terminal_count > kMaxTableTerminals) {
    throw ValidationError(fmt::format("delay tables support 1..{} terminals", kMaxTableTerminals));
  }
}

void check_inputs(int customers, std::span<const double> probs, const DelayTable& table) {
  if (customers < 0) throw ValidationError("customer count must be nonnegative");
  if (static_cast<int>(probs.size()) != table.terminal_count) {
    throw ValidationError("probability vector length must equal the terminal count");
  }
}

DemandVector unit_demand(TerminalMask subset) {
  DemandVector demand;
  for (int j = 0; subset != 0; ++j, subset >>= 1) {
    if (subset & 1u) demand[j + 1] = 1;
  }
  return demand;
}

}  // namespace

DelayTable build_delay_table(int carrier_id, const Scenario& scenario) {
  check_table_size(scenario.terminal_count());
  const std::size_t masks = std::size_t{1} << scenario.terminal_count();
  DelayTable table{carrier_id, scenario.terminal_count(), std::vector<double>(masks, 0.0),
                   std::vector<double>(masks, 0.0)};
  for (TerminalMask subset = 1; subset < masks; ++subset) {
    const RoutePlan plan = solve_vrp(carrier_id, unit_demand(subset), scenario);
    table.delay[subset] = plan.total_delay;
    table.cost[subset] = plan.total_cost;
  }
  return table;
}

DelayTable build_fixed_order_table(int carrier_id, const Scenario& scenario) {
  check_table_size(scenario.terminal_count());
  const std::size_t masks = std::size_t{1} << scenario.terminal_count();
  DelayTable table{carrier_id, scenario.terminal_count(), std::vector<double>(masks, 0.0),
                   std::vector<double>(masks, 0.0)};
  for (TerminalMask subset = 1; subset < masks; ++subset) {
    std::vector<int> order;
    for (const auto& [terminal, packages] : unit_demand(subset)) order.push_back(terminal);
    table.delay[subset] = fixed_order_delay(carrier_id, order, scenario);
  }
  return table;
}

std::vector<double> visited_set_distribution(int customers, std::span<const double> probs) {
  if (customers < 0) throw ValidationError("customer count must be nonnegative");
  const int terminals = static_cast<int>(probs.size());
  check_table_size(terminals);
  const std::size_t masks = std::size_t{1} << terminals;

  // (mass of A)^n for every A, then Moebius inversion over subsets turns
  // Pr[visited within A] into Pr[visited exactly A].
  std::vector<double> mass(masks, 0.0);
  std::vector<double> dist(masks, 0.0);
  for (TerminalMask a = 0; a < masks; ++a) {
    if (a != 0) {
      mass[a] = mass[a & (a - 1)] + probs[static_cast<std::size_t>(std::countr_zero(a))];
    }
    dist[a] = std::pow(mass[a], customers);
  }
  for (int j = 0; j < terminals; ++j) {
    const TerminalMask bit = TerminalMask{1} << j;
    for (TerminalMask a = 0; a < masks; ++a) {
      if (a & bit) dist[a] -= dist[a ^ bit];
    }
  }
  return dist;
}

double expected_delay(int customers, std::span<const double> probs, const DelayTable& table,
                      double unload_minutes) {
  check_inputs(customers, probs, table);
  const auto dist = visited_set_distribution(customers, probs);
  double travel = 0.0;
  for (std::size_t subset = 1; subset < dist.size(); ++subset) travel += dist[subset] * table.delay[subset];
  return customers * unload_minutes + travel;
}

double expected_delay_naive(int customers, std::span<const double> probs, const DelayTable& table,
                            double unload_minutes) {
  check_inputs(customers, probs, table);
  const int terminals = table.terminal_count;
  if (std::pow(static_cast<double>(terminals), customers) > kNaiveEnumerationLimit) {
    throw ValidationError("naive enumeration would exceed the tuple limit");
  }

  std::vector<int> tuple(static_cast<std::size_t>(customers), 0);
  std::vector<int> count(static_cast<std::size_t>(terminals), 0);
  double travel = 0.0;
  while (true) {
    std::fill(count.begin(), count.end(), 0);
    for (int t : tuple) ++count[static_cast<std::size_t>(t)];
    double weight = 1.0;
    TerminalMask visited = 0;
    for (int j = 0; j < terminals; ++j) {
      weight *= std::pow(probs[static_cast<std::size_t>(j)], count[static_cast<std::size_t>(j)]);
      if (count[static_cast<std::size_t>(j)] > 0) visited |= TerminalMask{1} << j;
    }
    travel += weight * table.delay[visited];

    std::size_t pos = 0;
    while (pos < tuple.size() && ++tuple[pos] == terminals) tuple[pos++] = 0;
    if (pos == tuple.size()) break;
  }
  return customers * unload_minutes + travel;
}

double expected_cost(int customers, std::span<const double> probs, const DelayTable& table) {
  check_inputs(customers, probs, table);
  const auto dist = visited_set_distribution(customers, probs);
  double total = 0.0;
  for (std::size_t subset = 1; subset < dist.size(); ++subset) total += dist[subset] * table.cost[subset];
  return total;
}

std::string subset_label(TerminalMask subset) {
  std::string label;
  for (int j = 0; subset != 0; ++j, subset >>= 1) {
    if (!(subset & 1u)) continue;
    if (!label.empty()) label += '-';
    label += std::to_string(j + 1);
  }
  return label;
}

std::vector<TerminalMask> subsets_by_size(int terminal_count) {
  check_table_size(terminal_count);
  std::vector<TerminalMask> out;
  for (TerminalMask s = 1; s < (TerminalMask{1} << terminal_count); ++s) out.push_back(s);
  // Ascending masks read terminal 1 as the low bit, so compare by the sorted
  // id lists instead.
  std::stable_sort(out.begin(), out.end(), [](TerminalMask a, TerminalMask b) {
    const int pa = std::popcount(a);
    const int pb = std::popcount(b);
    if (pa != pb) return pa < pb;
    // lowest differing bit decides: the set holding it has the smaller id first
    const TerminalMask diff = a ^ b;
    return (a & diff & (~diff + 1)) != 0;
  });
  return out;
}

}  // namespace fleetgame
