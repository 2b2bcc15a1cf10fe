#pragma once

#include <atomic>
#include <functional>
#include <iosfwd>

#include "tdrepair/cli/config.hpp"
#include "tdrepair/pipeline/pipeline.hpp"

namespace tdrepair::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;      // eval mismatch, or every instance hit an infrastructure error
inline constexpr int kExitConfig = 2;       // bad settings or credentials
inline constexpr int kExitData = 3;         // unreadable or invalid corpus / run directory
inline constexpr int kExitInterrupted = 130;

// Each command prints its human-readable result to `out` and diagnostics
// through the logger. They throw tdrepair errors; run_command maps those to
// exit codes.
int cmd_run(const CliConfig& c, std::ostream& out, pipeline::StageSelection stages = pipeline::StageSelection::kBoth,
            const std::atomic<bool>* stop = nullptr);
int cmd_testgen(const CliConfig& c, std::ostream& out);
int cmd_augment(const CliConfig& c, std::ostream& out);
int cmd_eval(const CliConfig& c, std::ostream& out);
int cmd_report(const CliConfig& c, std::ostream& out);

// Runs fn, translating exceptions into an exit code and an error line on err.
int run_command(const std::function<int()>& fn, std::ostream& err);

}  // namespace tdrepair::cli
