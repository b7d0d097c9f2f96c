#include "fleetgame/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <json.hpp>

#include "fleetgame/expectation.hpp"
#include "fleetgame/game.hpp"
#include "fleetgame/vrp.hpp"

namespace fleetgame::cli {

namespace {

constexpr std::uint64_t kDefaultSimulationEvents = 1000000;

std::string cell_text(const Cell& cell) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&cell)) return format_number(*d);
  const std::string& s = std::get<std::string>(cell);
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  return quoted + '"';
}

std::vector<int> carrier_ids(const Scenario& scenario, int carrier_id) {
  if (carrier_id != 0) {
    scenario.carrier(carrier_id);
    return {carrier_id};
  }
  std::vector<int> ids;
  for (const Carrier& c : scenario.carriers) ids.push_back(c.id);
  return ids;
}

std::vector<DelayTable> all_tables(const Scenario& scenario) {
  std::vector<DelayTable> tables;
  for (const Carrier& c : scenario.carriers) tables.push_back(build_delay_table(c.id, scenario));
  return tables;
}

std::vector<std::string> state_columns(int carriers, const std::string& prefix) {
  std::vector<std::string> cols;
  for (int c = 1; c <= carriers; ++c) cols.push_back(fmt::format("{}{}", prefix, c));
  return cols;
}

void append_state(std::vector<Cell>& row, const Occupancy& state) {
  for (int n : state) row.emplace_back(std::int64_t{n});
}

// Stationary distribution at the smallest epsilon of the scenario's sweep.
std::pair<StateSpace, std::vector<double>> limiting_beta(const Scenario& scenario, std::span<const DelayTable> tables,
                                                         int customers) {
  auto space = build_state_space(scenario.carrier_count(), customers);
  const auto profile = disutility_profile(scenario, tables, customers);
  const auto rates =
      build_rate_matrix(space, profile, scenario.game.decision_rate, scenario.game.epsilon_sweep.back());
  auto beta = stationary_distribution(rates);
  return {std::move(space), std::move(beta)};
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
}

struct Options {
  std::string command;
  std::string scenario_path;
  int carrier = 0;
  bool fixed_order = false;
  bool all_on_one = false;
  std::string n_range;
  std::string dx_list;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::uint64_t sim_events = kDefaultSimulationEvents;
};

nlohmann::json echo_options(const Options& o, const Scenario& scenario) {
  nlohmann::json j{{"command", o.command},
                   {"scenario", o.scenario_path},
                   {"carrier", o.carrier},
                   {"fixed_order", o.fixed_order},
                   {"all_on_one", o.all_on_one},
                   {"out", o.out_dir},
                   {"carriers", scenario.carrier_count()},
                   {"terminals", scenario.terminal_count()},
                   {"customers", scenario.game.num_customers},
                   {"epsilon_sweep", scenario.game.epsilon_sweep},
                   {"stability_threshold", scenario.game.stability_threshold}};
  if (!o.n_range.empty()) {
    auto [a, b] = parse_range(o.n_range);
    j["n_range"] = {a, b};
  }
  j["dx_list"] = parse_list(o.dx_list);
  if (o.seed) {
    j["seed"] = *o.seed;
    j["sim_events"] = o.sim_events;
  } else {
    j["seed"] = nullptr;
  }
  return j;
}

void emit(const Options& o, const Scenario& scenario, const std::vector<ExperimentResult>& results,
          std::ostream& out) {
  if (o.out_dir.empty()) {
    for (std::size_t i = 0; i < results.size(); ++i) {
      if (i > 0) out << '\n';
      out << results[i].to_csv();
    }
    return;
  }
  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}'", o.out_dir));
  for (const ExperimentResult& r : results) {
    write_file(std::filesystem::path(o.out_dir) / (r.kind() + ".csv"), r.to_csv());
  }
  write_file(std::filesystem::path(o.out_dir) / "run.json", echo_options(o, scenario).dump(2) + "\n");
}

int dispatch(const Options& o, std::ostream& out) {
  const Scenario scenario = load_scenario(o.scenario_path);
  if (o.command == "validate") {
    out << validation_summary(scenario) << '\n';
    return kExitOk;
  }

  std::vector<ExperimentResult> results;
  if (o.command == "delay-table") {
    results.push_back(delay_table_csv(scenario, o.carrier, o.fixed_order));
  } else if (o.command == "expected-delay") {
    auto [from, to] = o.n_range.empty() ? std::pair{0, scenario.game.num_customers} : parse_range(o.n_range);
    results.push_back(expected_delay_csv(scenario, o.carrier, from, to, o.all_on_one));
  } else if (o.command == "game") {
    GameOutputs g = game_csv(scenario, o.seed ? &*o.seed : nullptr, o.sim_events);
    results = {g.beta, g.stable, g.mean};
    for (auto& r : g.extra) results.push_back(std::move(r));
  } else if (o.command == "sweep") {
    const int carrier = o.carrier != 0 ? o.carrier : scenario.carrier_count();
    results.push_back(sweep_csv(scenario, carrier, parse_list(o.dx_list)));
  } else if (o.command == "compare-baseline") {
    results.push_back(compare_baseline_csv(scenario, o.carrier != 0 ? o.carrier : 1));
  }
  emit(o, scenario, results, out);
  return kExitOk;
}

}  // namespace

ExperimentResult::ExperimentResult(std::string kind, std::vector<std::string> columns)
    : kind_(std::move(kind)), columns_(std::move(columns)) {}

void ExperimentResult::add_row(std::vector<Cell> row) {
  if (row.size() != columns_.size()) {
    throw ValidationError(fmt::format("{} row has {} cells, header has {}", kind_, row.size(), columns_.size()));
  }
  rows_.push_back(std::move(row));
}

std::string ExperimentResult::to_csv() const {
  std::string text;
  for (std::size_t i = 0; i < columns_.size(); ++i) text += (i ? "," : "") + cell_text(Cell{columns_[i]});
  text += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + cell_text(row[i]);
    text += '\n';
  }
  return text;
}

std::string format_number(double value) {
  std::string s = fmt::format("{:.6f}", value);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw ValidationError(fmt::format("range '{}' must look like a..b", text));
  try {
    std::size_t used_a = 0;
    std::size_t used_b = 0;
    const std::string a_text = text.substr(0, dots);
    const std::string b_text = text.substr(dots + 2);
    const int a = std::stoi(a_text, &used_a);
    const int b = std::stoi(b_text, &used_b);
    if (used_a != a_text.size() || used_b != b_text.size() || a < 0 || b < a) throw std::invalid_argument(text);
    return {a, b};
  } catch (const std::exception&) {
    throw ValidationError(fmt::format("range '{}' must be a..b with 0 <= a <= b", text));
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  if (text.empty()) return values;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("'{}' is not a number", item));
    }
  }
  return values;
}

std::string validation_summary(const Scenario& scenario) {
  const auto space = build_state_space(scenario.carrier_count(), scenario.game.num_customers);
  return fmt::format("{} carriers, {} terminals, {} customers, {} states", scenario.carrier_count(),
                     scenario.terminal_count(), scenario.game.num_customers, space.size());
}

ExperimentResult delay_table_csv(const Scenario& scenario, int carrier_id, bool fixed_order) {
  ExperimentResult result("delay-table", {"carrier", "subset", "delay_minutes"});
  const auto subsets = subsets_by_size(scenario.terminal_count());
  for (int id : carrier_ids(scenario, carrier_id)) {
    const DelayTable table = fixed_order ? build_fixed_order_table(id, scenario) : build_delay_table(id, scenario);
    for (TerminalMask s : subsets) result.add_row({std::int64_t{id}, subset_label(s), table[s]});
  }
  return result;
}

ExperimentResult expected_delay_csv(const Scenario& scenario, int carrier_id, int n_from, int n_to,
                                    bool all_on_one) {
  if (all_on_one) {
    n_from = 0;
    n_to = scenario.game.num_customers;
  }
  ExperimentResult result("expected-delay", {"carrier", all_on_one ? "customers" : "n", "expected_delay"});
  for (int id : carrier_ids(scenario, carrier_id)) {
    const DelayTable table = build_delay_table(id, scenario);
    for (int n = n_from; n <= n_to; ++n) {
      result.add_row({std::int64_t{id}, std::int64_t{n},
                      expected_delay(n, scenario.game.terminal_probs, table,
                                     scenario.cost.unload_minutes_per_customer)});
    }
  }
  return result;
}

GameOutputs game_csv(const Scenario& scenario, const std::uint64_t* seed, std::uint64_t sim_events) {
  const int carriers = scenario.carrier_count();
  const auto tables = all_tables(scenario);
  const int customers = scenario.game.num_customers;
  const auto space = build_state_space(carriers, customers);
  const auto profile = disutility_profile(scenario, tables, customers);
  const auto report = analyze_stability(space, profile, scenario.game.decision_rate, scenario.game.epsilon_sweep,
                                        scenario.game.stability_threshold);

  auto beta_cols = state_columns(carriers, "n_");
  beta_cols.insert(beta_cols.begin(), "epsilon");
  beta_cols.push_back("beta");
  auto mean_cols = state_columns(carriers, "mean_n_");
  mean_cols.insert(mean_cols.begin(), "epsilon");
  GameOutputs g{ExperimentResult("game", beta_cols), ExperimentResult("game_stable", state_columns(carriers, "n_")),
                ExperimentResult("game_mean", mean_cols), {}};

  for (std::size_t e = 0; e < report.epsilons.size(); ++e) {
    for (std::size_t s = 0; s < space.size(); ++s) {
      std::vector<Cell> row{report.epsilons[e]};
      append_state(row, space[s]);
      row.emplace_back(report.beta[e][s]);
      g.beta.add_row(std::move(row));
    }
    std::vector<Cell> row{report.epsilons[e]};
    for (double m : mean_occupancy(report.beta[e], space)) row.emplace_back(m);
    g.mean.add_row(std::move(row));
  }
  for (const Occupancy& state : report.stable_states) {
    std::vector<Cell> row;
    append_state(row, state);
    g.stable.add_row(std::move(row));
  }

  if (seed != nullptr) {
    const auto rates =
        build_rate_matrix(space, profile, scenario.game.decision_rate, scenario.game.epsilon_sweep.back());
    const auto& beta = report.beta.back();
    const std::size_t start = static_cast<std::size_t>(std::max_element(beta.begin(), beta.end()) - beta.begin());
    const auto empirical = simulate_chain(rates, start, sim_events, *seed);
    auto cols = state_columns(carriers, "n_");
    cols.push_back("beta");
    cols.push_back("empirical");
    ExperimentResult sim("game_simulation", cols);
    for (std::size_t s = 0; s < space.size(); ++s) {
      std::vector<Cell> row;
      append_state(row, space[s]);
      row.emplace_back(beta[s]);
      row.emplace_back(empirical[s]);
      sim.add_row(std::move(row));
    }
    g.extra.push_back(std::move(sim));
  }
  return g;
}

ExperimentResult sweep_csv(const Scenario& scenario, int carrier_id, const std::vector<double>& dx_list) {
  auto cols = state_columns(scenario.carrier_count(), "mean_n_");
  cols.insert(cols.begin(), "dx");
  ExperimentResult result("sweep", cols);
  // Reject override carriers even when the list is empty.
  shift_carrier(scenario, carrier_id, 0.0);
  for (double dx : dx_list) {
    const Scenario shifted = shift_carrier(scenario, carrier_id, dx);
    const auto tables = all_tables(shifted);
    const auto [space, beta] = limiting_beta(shifted, tables, shifted.game.num_customers);
    std::vector<Cell> row{dx};
    for (double m : mean_occupancy(beta, space)) row.emplace_back(m);
    result.add_row(std::move(row));
  }
  return result;
}

ExperimentResult compare_baseline_csv(const Scenario& scenario, int carrier_id) {
  scenario.carrier(carrier_id);
  ExperimentResult result("compare-baseline", {"customers", "cost_proposed", "cost_baseline"});
  const auto tables = all_tables(scenario);
  const auto& probs = scenario.game.terminal_probs;
  const DelayTable& own = tables[static_cast<std::size_t>(carrier_id - 1)];

  std::vector<double> cost_by_occupancy;
  for (int n = 0; n <= scenario.game.num_customers; ++n) cost_by_occupancy.push_back(expected_cost(n, probs, own));

  for (int customers = 0; customers <= scenario.game.num_customers; ++customers) {
    const auto [space, beta] = limiting_beta(scenario, tables, customers);
    double proposed = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s) {
      proposed += beta[s] * cost_by_occupancy[static_cast<std::size_t>(space[s][static_cast<std::size_t>(carrier_id - 1)])];
    }
    result.add_row({std::int64_t{customers}, proposed, cost_by_occupancy[static_cast<std::size_t>(customers)]});
  }
  return result;
}

int run(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
  CLI::App app{"Carrier routing and carrier-selection game experiments", "fleetgame"};
  app.require_subcommand(1);

  Options o;
  std::uint64_t seed_value = 0;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate", "Check a scenario file and print its size"},
      {"delay-table", "Traveling delay for every terminal subset"},
      {"expected-delay", "Expected delivery delay per customer count"},
      {"game", "Stationary distributions and stochastically stable states"},
      {"sweep", "Mean occupancy while shifting one carrier east"},
      {"compare-baseline", "Carrier cost under the game versus all customers on it"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--scenario", o.scenario_path, "Scenario JSON file")->required();
    sub->add_option("--carrier", o.carrier, "Carrier id (default: all, or per command)");
    sub->add_flag("--fixed-order", o.fixed_order, "Visit subsets in ascending id order");
    sub->add_flag("--all-on-one", o.all_on_one, "Every customer on one carrier, 0..S");
    sub->add_option("--n-range", o.n_range, "Customer counts a..b");
    sub->add_option("--dx-list", o.dx_list, "Comma-separated eastward shifts in km");
    sub->add_option("--out", o.out_dir, "Directory for <command>.csv and run.json");
    CLI::Option* seed = sub->add_option("--seed", seed_value, "Seed for the simulation cross-check");
    sub->add_option("--sim-events", o.sim_events, "Events for the simulation cross-check");
    sub->callback([&o, &seed_value, seed, name = name] {
      o.command = name;
      if (seed->count() > 0) o.seed = seed_value;
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }

  try {
    return dispatch(o, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("fleetgame");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fleetgame::cli
