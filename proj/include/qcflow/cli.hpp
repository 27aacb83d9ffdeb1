#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qcflow/field.hpp"

namespace qcflow::cli {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

/// One command invocation. `field` is unset when `all_builtin` is selected (verify only).
struct RunConfig {
    std::string command;
    std::optional<FieldDescriptor> field;
    bool all_builtin = false;
    /// Command-specific values: x0 [re, im], t [a, b], window [r, R], grid n, p, format, arc, svg.
    nlohmann::json params = nlohmann::json::object();
    std::uint64_t seed = 0;
    std::string output_path;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Throws QcError(ConfigParse) on unknown commands or malformed values.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Runs one already parsed configuration and returns the exit code.
int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command line entry point: parses flags (or --config file) and runs the command.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qcflow::cli
