#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace efgeo::cli {

enum class Command { verify_identity, verify_tensors, emit_figure, propagate };

Command parse_command(std::string_view name);
const char* name(Command c);

// Flat keys accepted by a subcommand, with their defaults. Keys that belong
// to another subcommand are ignored; keys no subcommand knows are an error.
nlohmann::json default_config(Command c);
std::vector<std::string> keys(Command c);

// Defaults, then the config file, then command-line overrides. Override
// values are read as JSON when they parse, as plain strings otherwise.
nlohmann::json resolve_config(Command c, const nlohmann::json& file,
                              const std::vector<std::pair<std::string, std::string>>& overrides);

enum ExitCode { kPass = 0, kFail = 1, kUsage = 2 };

// Runs a resolved config and writes report.json, manifest.json and the
// subcommand's CSV under out. Returns the exit code; errors propagate.
int execute(Command c, const nlohmann::json& cfg, const std::filesystem::path& out);

// Full command line: subcommand, --config, --out and per-key overrides.
int run(int argc, char** argv);

}  // namespace efgeo::cli
