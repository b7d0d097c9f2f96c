#include "fleetgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include <fmt/core.h>

namespace fleetgame {

namespace {

constexpr double kResidualTolerance = 1e-10;

void check_state(const Occupancy& s, int carriers, int customers) {
  if (static_cast<int>(s.size()) != carriers) throw ValidationError("state has the wrong number of carriers");
  int total = 0;
  for (int n : s) {
    if (n < 0) throw ValidationError("state occupancies must be nonnegative");
    total += n;
  }
  if (total != customers) throw ValidationError("state occupancies must sum to the customer count");
}

void compositions(int carrier, int left, Occupancy& current, std::vector<Occupancy>& out) {
  if (carrier + 1 == static_cast<int>(current.size())) {
    current[static_cast<std::size_t>(carrier)] = left;
    out.push_back(current);
    return;
  }
  for (int n = left; n >= 0; --n) {
    current[static_cast<std::size_t>(carrier)] = n;
    compositions(carrier + 1, left - n, current, out);
  }
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

StateSpace::StateSpace(int carriers, int customers, std::vector<Occupancy> states)
    : carriers_(carriers), customers_(customers), states_(std::move(states)) {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    check_state(states_[i], carriers_, customers_);
    if (!index_.emplace(states_[i], i).second) throw ValidationError("duplicate state in state space");
  }
}

std::size_t StateSpace::index_of(const Occupancy& state) const {
  auto it = index_.find(state);
  if (it == index_.end()) throw ValidationError("state is not in the state space");
  return it->second;
}

StateSpace build_state_space(int carriers, int customers, std::size_t state_cap) {
  if (carriers < 1) throw ValidationError("at least one carrier is required");
  if (customers < 0) throw ValidationError("customer count must be nonnegative");
  const double count = binomial(customers + carriers - 1, carriers - 1);
  if (count > static_cast<double>(state_cap)) {
    throw ValidationError(fmt::format("state space of {:.0f} states exceeds the cap of {}", count, state_cap));
  }
  std::vector<Occupancy> states;
  states.reserve(static_cast<std::size_t>(count));
  Occupancy current(static_cast<std::size_t>(carriers), 0);
  compositions(0, customers, current, states);
  return StateSpace(carriers, customers, std::move(states));
}

DisutilityProfile::DisutilityProfile(std::vector<std::vector<double>> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("disutility profile needs at least one carrier");
  for (const auto& row : values_) {
    if (row.size() != values_.front().size() || row.empty()) {
      throw ValidationError("disutility profile must cover the same occupancies for every carrier");
    }
    for (double u : row) {
      if (!std::isfinite(u)) throw ValidationError("disutilities must be finite");
    }
  }
}

int DisutilityProfile::max_occupancy() const { return static_cast<int>(values_.front().size()) - 1; }

double DisutilityProfile::operator()(int carrier, int occupancy) const {
  if (carrier < 0 || carrier >= carriers() || occupancy < 0 || occupancy > max_occupancy()) {
    throw ValidationError("disutility requested outside the profile");
  }
  return values_[static_cast<std::size_t>(carrier)][static_cast<std::size_t>(occupancy)];
}

DisutilityProfile DisutilityProfile::shifted(double delta) const {
  auto values = values_;
  for (auto& row : values) {
    for (double& u : row) u += delta;
  }
  return DisutilityProfile(std::move(values));
}

DisutilityProfile disutility_profile(const Scenario& scenario, std::span<const DelayTable> tables, int customers) {
  if (static_cast<int>(tables.size()) != scenario.carrier_count()) {
    throw ValidationError("one delay table per carrier is required");
  }
  std::vector<std::vector<double>> values;
  for (const Carrier& c : scenario.carriers) {
    const DelayTable& table = tables[static_cast<std::size_t>(c.id - 1)];
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(customers) + 1);
    for (int n = 0; n <= customers; ++n) {
      row.push_back(c.fee + expected_delay(n, scenario.game.terminal_probs, table,
                                           scenario.cost.unload_minutes_per_customer));
    }
    values.push_back(std::move(row));
  }
  return DisutilityProfile(std::move(values));
}

double transition_rate(const Occupancy& from, const Occupancy& to, const DisutilityProfile& profile,
                       double decision_rate, double epsilon) {
  const int carriers = profile.carriers();
  const int customers = std::accumulate(from.begin(), from.end(), 0);
  check_state(from, carriers, customers);
  check_state(to, carriers, customers);
  if (customers > profile.max_occupancy()) throw ValidationError("profile does not cover the customer count");
  if (from == to) throw ValidationError("transition rate needs two distinct states");

  int source = -1;
  int dest = -1;
  for (int c = 0; c < carriers; ++c) {
    const int delta = to[static_cast<std::size_t>(c)] - from[static_cast<std::size_t>(c)];
    if (delta == 0) continue;
    if (delta == -1 && source < 0) {
      source = c;
    } else if (delta == 1 && dest < 0) {
      dest = c;
    } else {
      return 0.0;
    }
  }
  if (source < 0 || dest < 0) return 0.0;

  const int n_source = from[static_cast<std::size_t>(source)];
  const double u_source = profile(source, n_source);
  const double u_dest = profile(dest, from[static_cast<std::size_t>(dest)]);
  if (u_source > u_dest) return decision_rate * n_source * (u_source - u_dest);
  return epsilon;
}

double RateMatrix::norm_inf() const { return q.cwiseAbs().rowwise().sum().maxCoeff(); }

RateMatrix build_rate_matrix(const StateSpace& space, const DisutilityProfile& profile, double decision_rate,
                             double epsilon) {
  if (space.size() > kMaxDenseStates) {
    throw ValidationError(fmt::format("{} states exceed the dense limit of {}", space.size(), kMaxDenseStates));
  }
  if (profile.carriers() != space.carriers() || profile.max_occupancy() < space.customers()) {
    throw ValidationError("disutility profile does not match the state space");
  }
  if (!(decision_rate > 0.0)) throw ValidationError("decision rate must be positive");
  if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be nonnegative");

  const auto n = static_cast<Eigen::Index>(space.size());
  RateMatrix rates{Eigen::MatrixXd::Zero(n, n), epsilon};
  const int carriers = space.carriers();
  for (std::size_t i = 0; i < space.size(); ++i) {
    const Occupancy& from = space[i];
    double out = 0.0;
    for (int c = 0; c < carriers; ++c) {
      if (from[static_cast<std::size_t>(c)] == 0) continue;
      for (int d = 0; d < carriers; ++d) {
        if (d == c) continue;
        Occupancy to = from;
        --to[static_cast<std::size_t>(c)];
        ++to[static_cast<std::size_t>(d)];
        const double rate = transition_rate(from, to, profile, decision_rate, epsilon);
        rates.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(space.index_of(to))) = rate;
        out += rate;
      }
    }
    rates.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = -out;
  }
  return rates;
}

std::vector<double> stationary_distribution(const RateMatrix& rates) {
  const Eigen::Index n = rates.q.rows();
  if (n == 0 || rates.q.cols() != n) throw ValidationError("rate matrix must be square and nonempty");

  Eigen::MatrixXd a = rates.q.transpose();
  a.row(n - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    throw NumericalError("stationary system is singular; the chain is not irreducible (epsilon = 0?)");
  }
  Eigen::VectorXd solution = lu.solve(rhs);

  std::vector<double> beta(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) beta[static_cast<std::size_t>(i)] = std::max(0.0, solution(i));
  const double total = std::accumulate(beta.begin(), beta.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("stationary solve produced no probability mass");
  for (double& b : beta) b /= total;

  if (stationary_residual(beta, rates) > kResidualTolerance * std::max(rates.norm_inf(), 1e-300)) {
    throw NumericalError("stationary solve residual exceeds tolerance; the chain is likely reducible");
  }
  return beta;
}

double stationary_residual(std::span<const double> beta, const RateMatrix& rates) {
  const Eigen::Index n = rates.q.rows();
  if (static_cast<Eigen::Index>(beta.size()) != n) throw ValidationError("beta length must match the rate matrix");
  Eigen::Map<const Eigen::VectorXd> b(beta.data(), n);
  return (rates.q.transpose() * b).cwiseAbs().maxCoeff();
}

StabilityReport analyze_stability(const StateSpace& space, const DisutilityProfile& profile, double decision_rate,
                                  std::span<const double> epsilon_sweep, double threshold) {
  if (epsilon_sweep.empty()) throw ValidationError("epsilon sweep must not be empty");
  for (std::size_t i = 1; i < epsilon_sweep.size(); ++i) {
    if (!(epsilon_sweep[i] < epsilon_sweep[i - 1])) throw ValidationError("epsilon sweep must be strictly decreasing");
  }

  StabilityReport report{space, {epsilon_sweep.begin(), epsilon_sweep.end()}, {}, {}};
  for (double eps : epsilon_sweep) {
    report.beta.push_back(stationary_distribution(build_rate_matrix(space, profile, decision_rate, eps)));
  }

  const std::size_t last = report.beta.size() - 1;
  const std::size_t first_checked = last == 0 ? 0 : last - 1;
  for (std::size_t s = 0; s < space.size(); ++s) {
    bool persistent = true;
    for (std::size_t e = first_checked; e <= last; ++e) persistent = persistent && report.beta[e][s] >= threshold;
    if (persistent) report.stable_states.push_back(space[s]);
  }
  return report;
}

StabilityReport stable_states(const Scenario& scenario) {
  std::vector<DelayTable> tables;
  for (const Carrier& c : scenario.carriers) tables.push_back(build_delay_table(c.id, scenario));
  const int customers = scenario.game.num_customers;
  const auto space = build_state_space(scenario.carrier_count(), customers);
  const auto profile = disutility_profile(scenario, tables, customers);
  return analyze_stability(space, profile, scenario.game.decision_rate, scenario.game.epsilon_sweep,
                           scenario.game.stability_threshold);
}

std::vector<double> simulate_chain(const RateMatrix& rates, std::size_t initial_state, std::uint64_t num_events,
                                   std::uint64_t seed) {
  const std::size_t n = rates.size();
  if (initial_state >= n) throw ValidationError("initial state is outside the chain");
  if (num_events < 1) throw ValidationError("at least one event is required");
  if (n == 1) return {1.0};

  struct Jump {
    std::size_t to;
    double rate;
  };
  std::vector<std::vector<Jump>> jumps(n);
  std::vector<double> exit_rate(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double r = rates.q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (i != j && r > 0.0) {
        jumps[i].push_back({j, r});
        exit_rate[i] += r;
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> occupancy(n, 0.0);
  std::size_t state = initial_state;
  for (std::uint64_t event = 0; event < num_events; ++event) {
    const double total = exit_rate[state];
    if (!(total > 0.0)) throw NumericalError(fmt::format("absorbing state {} reached during simulation", state));
    occupancy[state] += std::exponential_distribution<double>(total)(rng);

    double pick = uniform(rng) * total;
    std::size_t next = jumps[state].back().to;
    for (const Jump& jump : jumps[state]) {
      if (pick < jump.rate) {
        next = jump.to;
        break;
      }
      pick -= jump.rate;
    }
    state = next;
  }

  const double elapsed = std::accumulate(occupancy.begin(), occupancy.end(), 0.0);
  for (double& o : occupancy) o /= elapsed;
  return occupancy;
}

std::vector<double> mean_occupancy(std::span<const double> beta, const StateSpace& space) {
  if (beta.size() != space.size()) throw ValidationError("beta length must match the state space");
  std::vector<double> mean(static_cast<std::size_t>(space.carriers()), 0.0);
  for (std::size_t s = 0; s < space.size(); ++s) {
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += beta[s] * space[s][c];
  }
  return mean;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ValidationError("distributions must have the same length");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

}  // namespace fleetgame
