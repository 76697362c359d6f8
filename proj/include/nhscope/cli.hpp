#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nhscope/models.hpp"
#include "nhscope/petermann.hpp"

namespace nhscope::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalError = 3;

struct GridConfig {
  std::string axis;
  double lo = 0.0;
  double hi = 0.0;
  int steps = 0;
};

/// Fully resolved run description. Built from (in increasing priority) a named preset, a JSON config
/// file and command-line flags; see README for the JSON layout.
struct RunConfig {
  std::string command;  // sweep, spectrum, edge, finite-size, bloch, bound, verify-sl, check
  std::optional<ModelSpec> model;
  std::optional<GridConfig> grid;
  DetectorSettings detector;
  std::optional<std::string> output;
  std::string format = "csv";
  std::vector<int> blocks;
  std::vector<int> sizes;
  std::optional<std::string> matrix;
  std::optional<int> state;
  int threads = 0;
};

const std::vector<std::string>& commands();
const std::vector<std::string>& presets();

/// Parses and validates one JSON config document (throws Error{Config} naming the field).
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);

/// Executes a validated config. The artifact goes to config.output, or to `out` when unset; the
/// one-line summary goes to `out` when an output file was written and to `err` otherwise.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point: flag parsing, config layering, run, and exit-code mapping.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nhscope::cli
