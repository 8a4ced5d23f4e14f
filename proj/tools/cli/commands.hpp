#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "config.hpp"

namespace viscoctl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr int kExitNumerical = 4;

inline constexpr const char* kVersion = "0.1.0";

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

// Runs one subcommand ("check-geometry", "build-weights", "simulate",
// "control", "verify-carleman", "estimate-observability") and writes its
// outputs plus manifest.json into config.out. mode is "cascade" or "hum" for
// "control". Library errors are mapped onto exit codes and reported on err.
int run_command(const std::string& command, const RunConfig& config, const std::string& mode, std::ostream& err);

// Loads the file and runs the command; parse failures give kExitConfig.
int run_command_file(const std::string& command, const std::filesystem::path& config_path,
                     const std::string& mode, const std::optional<std::filesystem::path>& out,
                     const std::optional<unsigned long long>& seed, std::ostream& err);

}  // namespace viscoctl::cli
