#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace momentctl::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kInputError = 2, kSolverFailure = 3, kRejected = 4 };

/// Fully resolved settings of one run; echoed into manifest.json.
struct RunConfig {
  std::string command;
  std::filesystem::path problem;
  std::vector<int> orders;
  std::string backend = "internal";  // or "sdpa-file"
  std::string sdpa_command;          // template with {in} {out} {tol}
  double tol = 1e-8;
  int max_iter = 200;
  std::string direction = "nt";  // or "hkm"
  std::string equality_set = "degree-bound";  // or "exact"
  double dt = 1e-3;
  double tail_tol = 1e-4;
  double rho = 0.25;
  std::vector<int> ugrid;  // empty: default per input count
  std::filesystem::path out = "out";
  std::uint64_t seed = 0;  // recorded; no command samples randomly yet
  // certify
  std::filesystem::path phi_file;
  // synthesize
  std::string mu0 = "uniform-x";  // "uniform-x", "problem" or a measure JSON object
  bool iterative = false;
  int budget = 50;
  std::optional<double> jstar;
  int ref_order = 7;
  int record_stride = 1;

  nlohmann::json to_json() const;
};

/// Parses "3", "2..7" or "2,4,6" into orders; throws InputError.
std::vector<int> parse_orders(std::string_view text);

/// Writes via a temporary file in the same directory and a rename.
void write_atomic(const std::filesystem::path& path, std::string_view content);

int cmd_relax(const RunConfig& cfg);
int cmd_solve(const RunConfig& cfg);
int cmd_certify(const RunConfig& cfg);
int cmd_synthesize(const RunConfig& cfg);

/// Parses arguments, dispatches, and maps errors to exit codes.
int run(int argc, const char* const* argv);

}  // namespace momentctl::cli
