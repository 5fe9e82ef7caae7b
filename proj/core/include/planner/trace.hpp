#pragma once

#include <string>

#include "planner/sim.hpp"

namespace planner {

struct EmitOptions {
  std::string format = "csv";  // csv or json row files
  bool aggregate = false;      // also union all accepted local plans
  bool table = false;          // also write the solve-time summary table
};

// Writes the run artifacts into out_dir (created if missing): the per-tick
// trajectory trace, the per-tick corridor snapshots, a run summary, and the
// optional aggregate and timing-table files. All floats are printed at nine
// significant digits. Throws std::runtime_error on I/O failures.
void emit_traces(const SimResult& result, const Scenario& scenario, const SimOptions& options,
                 const std::string& out_dir, const EmitOptions& emit);

}  // namespace planner
