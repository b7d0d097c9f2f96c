#pragma once

// Shared fixtures and independent oracles for the test binaries. Nothing
// here calls into the routines it is used to check.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fleetgame/scenario.hpp"

namespace fleetgame::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(FLEETGAME_DATA_DIR) / name;
}

inline std::filesystem::path table1_fixture() { return data_path("table1_reconstruction.json"); }
inline std::filesystem::path euclidean_fixture() { return data_path("euclidean_two_carriers.json"); }

// Published delays in minutes, rows 1, 2, 3, 1->2, 1->3, 2->3, 1->2->3.
inline constexpr std::array<std::array<double, 7>, 2> kTableOne = {{
    {2.400, 8.625, 9.450, 13.425, 14.250, 26.700, 31.500},
    {18.228, 17.376, 17.340, 29.253, 30.078, 35.415, 47.328},
}};
inline constexpr double kFixtureSpeedKmh = 40.0;

// One-way distances from the single-terminal and pair rows, assuming each
// row is a closed tour in the listed order:
//   d(0,j) = delay_j / 60 * v / 2
//   d(i,j) = delay_ij / 60 * v - d(0,i) - d(0,j)
inline std::array<std::array<double, 4>, 4> reconstruct_distances(int carrier) {
  const auto& row = kTableOne[static_cast<std::size_t>(carrier - 1)];
  std::array<std::array<double, 4>, 4> d{};
  for (int j = 1; j <= 3; ++j) {
    d[0][j] = d[j][0] = row[static_cast<std::size_t>(j - 1)] / 60.0 * kFixtureSpeedKmh / 2.0;
  }
  const int pairs[3][2] = {{1, 2}, {1, 3}, {2, 3}};
  for (int p = 0; p < 3; ++p) {
    const int a = pairs[p][0];
    const int b = pairs[p][1];
    d[a][b] = d[b][a] = row[static_cast<std::size_t>(3 + p)] / 60.0 * kFixtureSpeedKmh - d[0][a] - d[0][b];
  }
  return d;
}

// Closed-form stationary law of a birth-death chain on 0..m with
// up[k] = rate k -> k+1 and down[k] = rate k -> k-1:
//   beta_k proportional to prod_{i<k} up[i] / down[i+1].
inline std::vector<double> birth_death_stationary(const std::vector<double>& up, const std::vector<double>& down) {
  const std::size_t m = up.size();
  std::vector<double> log_w(m, 0.0);
  for (std::size_t k = 1; k < m; ++k) log_w[k] = log_w[k - 1] + std::log(up[k - 1]) - std::log(down[k]);
  double peak = log_w[0];
  for (double w : log_w) peak = std::max(peak, w);
  std::vector<double> beta(m);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) total += beta[k] = std::exp(log_w[k] - peak);
  for (double& b : beta) b /= total;
  return beta;
}

inline std::vector<double> random_probs(std::mt19937_64& rng, int terminals, bool allow_zero) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(static_cast<std::size_t>(terminals));
  double total = 0.0;
  for (auto& x : p) {
    x = (allow_zero && u(rng) < 0.2) ? 0.0 : u(rng) + 1e-3;
    total += x;
  }
  if (total == 0.0) {
    p[0] = 1.0;
    total = 1.0;
  }
  for (auto& x : p) x /= total;
  return p;
}

// A scenario with one coordinate-mode carrier per entry of `fleets`.
inline Scenario random_euclidean_scenario(std::mt19937_64& rng, int terminals, const std::vector<std::vector<Vehicle>>& fleets) {
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  Scenario s;
  for (int j = 1; j <= terminals; ++j) s.terminals.push_back({j, Point{coord(rng), coord(rng)}});
  for (std::size_t c = 0; c < fleets.size(); ++c) {
    s.carriers.push_back({static_cast<int>(c) + 1, Point{coord(rng), coord(rng)}, 0.0, fleets[c], std::nullopt});
  }
  s.cost = CostParams{1.0, 0.0, 40.0, 5.0};
  s.game.num_customers = 4;
  s.game.terminal_probs.assign(static_cast<std::size_t>(terminals), 1.0 / terminals);
  s.game.decision_rate = 1.0;
  s.game.epsilon_sweep = kDefaultEpsilonSweep;
  return s;
}

// Symmetric integer matrix with zero diagonal; integer data keeps every
// cost sum exact in floating point.
inline DistanceMatrix random_integer_matrix(std::mt19937_64& rng, int terminals) {
  std::uniform_int_distribution<int> len(1, 20);
  DistanceMatrix m(static_cast<std::size_t>(terminals) + 1);
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) m(i, j) = m(j, i) = len(rng);
  }
  return m;
}

}  // namespace fleetgame::testing
