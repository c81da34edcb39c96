#include <cstdio>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "run_config.hpp"
#include "stabopt/parallel.hpp"

namespace {

struct Cmd {
  const char* name;
  const char* desc;
  int (*fn)(const stabopt::cli::RunConfig&);
  bool needs_config;
};

constexpr Cmd kCommands[] = {
    {"solve", "Solve the value function on a grid and verify its a-priori bounds",
     stabopt::cli::cmd_solve, true},
    {"rollout", "Feedback rollout from each start point against a solved or loaded field",
     stabopt::cli::cmd_rollout, true},
    {"optimize", "Direct trajectory optimization with a certified suboptimality gap",
     stabopt::cli::cmd_optimize, true},
    {"measure", "Occupation measure, histogram, and variation checks for a stored trajectory",
     stabopt::cli::cmd_measure, true},
    {"check", "Certificate plus the full mass and entry-time check battery for a trajectory",
     stabopt::cli::cmd_check, true},
    {"scan", "Sweep a rate or horizon and compare occupation mass against its bound",
     stabopt::cli::cmd_scan, true},
    {"pipeline", "Solve, optimize, certify, measure, and check every start point",
     stabopt::cli::cmd_pipeline, true},
    {"bench", "Timed reference workloads with deterministic work counts", stabopt::cli::cmd_bench,
     false},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Global optimization of bounded landscapes through stabilizing control: grid value "
      "functions, certified near-optimal trajectories, occupation measures, and quantitative "
      "checks. Exit codes: 0 all checks pass, 2 a check failed, 3 configuration error, 4 solver "
      "failure."};
  app.require_subcommand(1);

  std::string config_path;
  stabopt::cli::Overrides ov;
  app.add_option("--config", config_path, "Run configuration file (JSON)");
  app.add_option("--output", ov.output, "Output directory (overrides the config)");
  app.add_option("--seed", ov.seed, "Sampling seed (overrides the config)");
  app.add_option("--threads", ov.threads, "Worker threads, 0 = hardware (overrides the config)");

  for (const Cmd& c : kCommands) app.add_subcommand(c.name, c.desc)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  for (const Cmd& c : kCommands) {
    if (!app.got_subcommand(c.name)) continue;
    try {
      stabopt::cli::RunConfig cfg;
      if (c.needs_config) {
        if (config_path.empty())
          throw stabopt::cli::ConfigError(std::string(c.name) + " needs --config <file>");
        cfg = stabopt::cli::load_config(config_path);
      }
      stabopt::cli::apply_overrides(cfg, ov);
      stabopt::set_thread_count(cfg.threads);
      return c.fn(cfg);
    } catch (const stabopt::cli::ConfigError& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 3;
    } catch (const std::invalid_argument& e) {
      std::fprintf(stderr, "config error: %s\n", e.what());
      return 3;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "solver error: %s\n", e.what());
      return 4;
    }
  }
  return 3;
}
