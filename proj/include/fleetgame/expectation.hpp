#pragma once

// Expected delivery delay of a carrier serving n customers whose
// destinations are independent draws over the terminals.
//
// Subsets of terminals are bitmasks: bit j-1 stands for terminal j.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fleetgame/scenario.hpp"

namespace fleetgame {

using TerminalMask = std::uint32_t;

inline constexpr int kMaxTableTerminals = 16;

// Optimal traveling delay (and the matching routing cost) for every subset
// of terminals visited with one package each. Entry 0 is the empty set.
struct DelayTable {
  int carrier = 0;
  int terminal_count = 0;
  std::vector<double> delay;  // minutes
  std::vector<double> cost;   // currency

  double operator[](TerminalMask subset) const { return delay.at(subset); }
};

DelayTable build_delay_table(int carrier_id, const Scenario& scenario);

// Same layout, filled with round trips visiting the subset in ascending id
// order rather than the optimal order. Cost is left at zero.
DelayTable build_fixed_order_table(int carrier_id, const Scenario& scenario);

// Exact distribution of the set of visited terminals; index is the mask.
std::vector<double> visited_set_distribution(int customers, std::span<const double> probs);

// n * unload + sum over visited sets of Pr[set] * table[set].
double expected_delay(int customers, std::span<const double> probs, const DelayTable& table,
                      double unload_minutes);

// Same quantity by enumerating all T^n destination tuples.
inline constexpr double kNaiveEnumerationLimit = 1e7;
double expected_delay_naive(int customers, std::span<const double> probs, const DelayTable& table,
                            double unload_minutes);

// Expected routing cost of serving n customers (no unloading term).
double expected_cost(int customers, std::span<const double> probs, const DelayTable& table);

// "1-2-3" style label of a subset.
std::string subset_label(TerminalMask subset);

// Nonempty subsets of T terminals ordered by size, then lexicographically.
std::vector<TerminalMask> subsets_by_size(int terminal_count);

}  // namespace fleetgame
