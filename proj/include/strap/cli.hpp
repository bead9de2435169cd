#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace strap {

/// Exit codes of the `strap` tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // validation or data errors
inline constexpr int kExitUsage = 2;

/// Entry point of the `strap` tool; `args[0]` is the program name.
///
/// Subcommands: validate, segment, retrieve, export, report, synth, bench. `--config FILE`
/// loads a JSON object whose keys are long flag names; explicit flags override it.
/// STRAP_THREADS overrides --threads.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace strap
