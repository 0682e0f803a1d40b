// Command layer behind the qdl executable: configuration from flags and an
// optional JSON file, validation, and the five commands producing tables.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdl/report.hpp"

namespace qdl {

struct RunConfig {
  std::string command;
  std::vector<double> X_ladder{1e3, 1e4, 1e5};
  std::string kernel = "fejer_squared";
  double sigma = 1.2;
  std::string weight = "gaussian";
  std::string family;   // empty: implied by the theorem
  std::string theorem;  // empty: implied by the family
  std::string convention = "kronecker_literal";
  int K = 1;
  double T_height = 0.0;  // density: > 0 adds the zero-based empirical column
  std::int64_t d_min = -20, d_max = 20;
  std::int64_t s_cutoff = 200000;
  std::int64_t prime_cutoff = 0;  // 0: sized from X and sigma
  int q = 3;
  std::vector<int> n_list{5, 7, 9};
  std::string cache_dir = "zero_cache";
  std::string output_path;  // empty: standard output
  std::string format = "table";
  std::string plot_script_path;  // empty: next to CSV output, if any
  std::string dump_prefix;       // ffield curve dump
  int threads = 0;               // 0: all hardware threads
  bool quiet = false;

  nlohmann::ordered_json to_json() const;
};

/// Flags override the JSON config (--config), which overrides the defaults.
/// Throws DomainError on unknown keys, malformed values or failed validation;
/// returns false with usage text in `message` for --help.
bool parse_run_config(int argc, const char* const* argv, RunConfig& cfg, std::string& message);

/// Applies config keys from a JSON object to cfg, skipping the keys in `skip`.
void apply_config_json(const nlohmann::json& j, RunConfig& cfg, const std::vector<std::string>& skip = {});

/// Checks every parameter against the preconditions of the command.
void validate(const RunConfig& cfg);

struct CommandResult {
  Table table;
  bool certified = true;  // every internal tolerance certificate met
  std::string plot_x;
  std::vector<std::string> plot_y;
  bool plot_log_x = false;
};

/// Runs one command. Errors after the first row are caught: the rows so far
/// are kept, a row starting with "FAILED" is appended and certified is false.
CommandResult run_command(const RunConfig& cfg);

/// Writes the rendered table (and the plot template for CSV files); returns
/// the process exit code.
int emit(const RunConfig& cfg, const CommandResult& result);

}  // namespace qdl
