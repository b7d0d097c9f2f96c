#pragma once

// Customers' carrier selection as a perturbed continuous-time Markov chain
// over population compositions.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fleetgame/expectation.hpp"
#include "fleetgame/scenario.hpp"

namespace fleetgame {

// Customers per carrier; entry c-1 belongs to carrier c.
using Occupancy = std::vector<int>;

inline constexpr std::size_t kDefaultStateCap = 100000;
// Rate matrices are dense; beyond this many states build_rate_matrix refuses.
inline constexpr std::size_t kMaxDenseStates = 4000;

class StateSpace {
 public:
  StateSpace(int carriers, int customers, std::vector<Occupancy> states);

  int carriers() const { return carriers_; }
  int customers() const { return customers_; }
  std::size_t size() const { return states_.size(); }
  const Occupancy& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<Occupancy>& states() const { return states_; }

  bool contains(const Occupancy& state) const { return index_.count(state) != 0; }
  // Throws ValidationError for states outside the space.
  std::size_t index_of(const Occupancy& state) const;

 private:
  int carriers_;
  int customers_;
  std::vector<Occupancy> states_;
  std::map<Occupancy, std::size_t> index_;
};

// All compositions of `customers` into `carriers` parts, first carrier's
// count descending: (S,0,..), (S-1,1,..), ..., (0,..,S).
StateSpace build_state_space(int carriers, int customers, std::size_t state_cap = kDefaultStateCap);

// Disutility fee + expected delay for every carrier at occupancy 0..S.
class DisutilityProfile {
 public:
  explicit DisutilityProfile(std::vector<std::vector<double>> values);

  int carriers() const { return static_cast<int>(values_.size()); }
  int max_occupancy() const;
  // carrier is 0-based here.
  double operator()(int carrier, int occupancy) const;
  DisutilityProfile shifted(double delta) const;

 private:
  std::vector<std::vector<double>> values_;
};

DisutilityProfile disutility_profile(const Scenario& scenario, std::span<const DelayTable> tables, int customers);

double transition_rate(const Occupancy& from, const Occupancy& to, const DisutilityProfile& profile,
                       double decision_rate, double epsilon);

struct RateMatrix {
  Eigen::MatrixXd q;
  double epsilon = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(q.rows()); }
  double norm_inf() const;
};

RateMatrix build_rate_matrix(const StateSpace& space, const DisutilityProfile& profile, double decision_rate,
                             double epsilon);

// Solves beta^T Q = 0 with the last balance equation replaced by sum(beta) = 1.
std::vector<double> stationary_distribution(const RateMatrix& rates);

// max_j |(beta^T Q)_j|
double stationary_residual(std::span<const double> beta, const RateMatrix& rates);

struct StabilityReport {
  StateSpace space;
  std::vector<double> epsilons;
  std::vector<std::vector<double>> beta;  // one vector per epsilon
  std::vector<Occupancy> stable_states;
};

// A state is stable when its probability is at least `threshold` at the two
// smallest epsilons of the sweep.
StabilityReport analyze_stability(const StateSpace& space, const DisutilityProfile& profile, double decision_rate,
                                  std::span<const double> epsilon_sweep, double threshold);

// Builds delay tables and disutilities from the scenario, then runs the sweep.
StabilityReport stable_states(const Scenario& scenario);

// Gillespie-style run of the chain; returns time-weighted state occupancy.
std::vector<double> simulate_chain(const RateMatrix& rates, std::size_t initial_state, std::uint64_t num_events,
                                   std::uint64_t seed);

std::vector<double> mean_occupancy(std::span<const double> beta, const StateSpace& space);

double total_variation(std::span<const double> a, std::span<const double> b);

}  // namespace fleetgame
