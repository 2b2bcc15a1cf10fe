// tdrepair: command-line front end.
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "tdrepair/cli/commands.hpp"
#include "tdrepair/errors.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

const std::set<std::string> kBoolKeys = {"no_augment", "resume", "failing_tests_only"};

}  // namespace

int main(int argc, char** argv) {
  using namespace tdrepair::cli;

  CLI::App app{"tdrepair: generate Python solutions and repair them against unit tests"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  app.add_option("--config", config_file, "JSON settings file (flat object of setting keys)");

  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
  for (const auto& key : config_keys()) {
    const std::string help = "env " + env_name(key);
    if (kBoolKeys.count(key)) {
      options[key] = app.add_flag(flag_name(key), flags[key], help);
    } else {
      options[key] = app.add_option(flag_name(key), values[key], help);
    }
  }

  auto* run = app.add_subcommand("run", "Stage 1 then Stage 2 over a corpus");
  auto* stage1 = app.add_subcommand("stage1", "generation and testing only");
  auto* stage2 = app.add_subcommand("stage2", "repair the failures recorded in --run-dir");
  auto* testgen = app.add_subcommand("testgen", "grow each instance's test suite with generated tests");
  auto* augment = app.add_subcommand("augment", "merge external tests into a corpus");
  auto* eval = app.add_subcommand("eval", "recount Pass@1 from --run-dir by re-running final programs");
  auto* report = app.add_subcommand("report", "print the summary of --run-dir");

  CLI11_PARSE(app, argc, argv);

  std::map<std::string, std::string> given;
  for (const auto& [key, opt] : options) {
    if (opt->count() == 0) continue;
    given[key] = kBoolKeys.count(key) ? "true" : values[key];
  }

  auto logger = spdlog::stderr_color_mt("tdrepair");
  spdlog::set_default_logger(logger);

  return run_command(
      [&]() -> int {
        const CliConfig c = resolve_config(config_file.empty() ? std::nullopt : std::optional<std::filesystem::path>(config_file),
                                           process_env(), given);
        const auto level = spdlog::level::from_str(c.log_level);
        if (level == spdlog::level::off && c.log_level != "off") {
          throw tdrepair::ConfigError("log_level: unknown level '" + c.log_level + "'");
        }
        spdlog::set_level(level);

        std::signal(SIGINT, on_sigint);
        std::signal(SIGTERM, on_sigint);

        using tdrepair::pipeline::StageSelection;
        if (run->parsed()) return cmd_run(c, std::cout, StageSelection::kBoth, &g_stop);
        if (stage1->parsed()) return cmd_run(c, std::cout, StageSelection::kStage1, &g_stop);
        if (stage2->parsed()) return cmd_run(c, std::cout, StageSelection::kStage2, &g_stop);
        if (testgen->parsed()) return cmd_testgen(c, std::cout);
        if (augment->parsed()) return cmd_augment(c, std::cout);
        if (eval->parsed()) return cmd_eval(c, std::cout);
        if (report->parsed()) return cmd_report(c, std::cout);
        return kExitConfig;
      },
      std::cerr);
}
