#include <cstdio>
#include <exception>
#include <string>

#include "CLI11.hpp"
#include "planner/errors.hpp"
#include "planner/scenario.hpp"
#include "planner/sim.hpp"
#include "planner/trace.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Corridor planner scenario runner"};
  app.require_subcommand(1);

  CLI::App* run = app.add_subcommand("run", "Simulate one scenario closed loop");
  std::string scenario_file;
  std::string variant_name;
  std::string out_dir;
  std::string emit_format = "csv";
  int ticks = 0;
  unsigned seed = 0;
  int iter_cap = 30;
  int homotopy_z = 20;
  bool aggregate = false;
  bool table = false;

  run->add_option("scenario", scenario_file, "Scenario JSON file")->required();
  run->add_option("--variant", variant_name, "Controller variant")
      ->check(CLI::IsMember({"mpc", "re", "hb", "su", "ss"}));
  run->add_option("--out", out_dir, "Output directory for the trace files")->required();
  run->add_option("--ticks", ticks, "Tick budget override")->check(CLI::NonNegativeNumber);
  run->add_option("--seed", seed, "Run seed, echoed into the artifacts");
  run->add_option("--iter-cap", iter_cap, "Solver iteration cap")->check(CLI::NonNegativeNumber);
  run->add_option("--homotopy-z", homotopy_z, "Relaxation stage count")
      ->check(CLI::PositiveNumber);
  run->add_option("--emit", emit_format, "Row file format")
      ->check(CLI::IsMember({"csv", "json"}));
  run->add_flag("--aggregate", aggregate, "Also write the union of accepted local plans");
  run->add_flag("--table", table, "Also write the solve-time summary table");

  CLI11_PARSE(app, argc, argv);

  try {
    planner::Scenario scenario = planner::load_scenario(scenario_file);

    planner::SimOptions options;
    options.variant =
        variant_name.empty() ? scenario.variant : planner::parse_variant(variant_name);
    options.max_ticks = ticks;
    options.seed = seed;
    // Explicit flags override scenario-level settings; absent flags leave them be.
    if (run->count("--iter-cap") > 0) options.iteration_cap = iter_cap;
    if (run->count("--homotopy-z") > 0) options.homotopy_stages = homotopy_z;

    planner::SimResult result = planner::run_simulation(scenario, options);

    planner::EmitOptions emit;
    emit.format = emit_format;
    emit.aggregate = aggregate;
    emit.table = table;
    planner::emit_traces(result, scenario, options, out_dir, emit);

    std::printf("%s [%s]: %s after %zu ticks, progress %.2f m, min speed %.2f m/s\n",
                scenario.name.c_str(), planner::to_string(options.variant),
                planner::to_string(result.outcome), result.trace.size(), result.final_progress,
                result.min_speed);
    if (result.collision) {
      std::printf("collision recorded at tick %d\n", result.collision_tick);
    }
    if (result.outcome == planner::Outcome::Failed) {
      std::printf("failure at s = %.2f m: %s\n", result.failure_location.s,
                  result.reason.c_str());
      return 2;
    }
    return 0;
  } catch (const planner::ScenarioError& e) {
    std::fprintf(stderr, "scenario error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
