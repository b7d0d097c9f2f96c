#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fleetgame/scenario.hpp"

namespace fleetgame::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitIo = 2;

using Cell = std::variant<std::int64_t, double, std::string>;

// A rectangular table of results, written as CSV with six decimals.
class ExperimentResult {
 public:
  ExperimentResult(std::string kind, std::vector<std::string> columns);

  const std::string& kind() const { return kind_; }
  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const { return rows_; }

  // Throws ValidationError when the row length differs from the header.
  void add_row(std::vector<Cell> row);

  std::string to_csv() const;

 private:
  std::string kind_;
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

std::string format_number(double value);

// Parses "a..b" into an inclusive range.
std::pair<int, int> parse_range(const std::string& text);
// Parses "v1,v2,..."; the empty string yields an empty list.
std::vector<double> parse_list(const std::string& text);

// Experiments behind the subcommands.
std::string validation_summary(const Scenario& scenario);
ExperimentResult delay_table_csv(const Scenario& scenario, int carrier_id, bool fixed_order);
ExperimentResult expected_delay_csv(const Scenario& scenario, int carrier_id, int n_from, int n_to,
                                    bool all_on_one);

struct GameOutputs {
  ExperimentResult beta;
  ExperimentResult stable;
  ExperimentResult mean;
  std::vector<ExperimentResult> extra;
};
GameOutputs game_csv(const Scenario& scenario, const std::uint64_t* seed, std::uint64_t sim_events);

ExperimentResult sweep_csv(const Scenario& scenario, int carrier_id, const std::vector<double>& dx_list);
ExperimentResult compare_baseline_csv(const Scenario& scenario, int carrier_id);

// Full command-line entry point; returns the process exit status.
int run(int argc, const char* const argv[], std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fleetgame::cli
