#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "pqeig/config.hpp"

namespace pqeig {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// exit codes of the command runner
inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_stagnation = 3;
inline constexpr int exit_io = 4;

/// Runs the configured command and writes its artifacts (atomically: temp
/// file + rename) under the output directory.  Returns an exit code.
int run_command(RunConfig cfg, const std::optional<std::string>& out_override,
                const std::optional<std::uint64_t>& seed_override, bool quiet);

/// Convenience wrapper: parse + run + map parse failures to exit codes.
int run_from_text(const std::string& config_text, Command expected,
                  const std::optional<std::string>& out_override,
                  const std::optional<std::uint64_t>& seed_override, bool quiet);

void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string format17(double v); // %.17g, the round-trip-exact form

} // namespace pqeig
