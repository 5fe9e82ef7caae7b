#include "planner/trace.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

namespace planner {

namespace {

std::string fmt(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  return buffer;
}

std::ofstream open_file(const std::filesystem::path& path) {
  std::ofstream stream(path);
  if (!stream) throw std::runtime_error("cannot write " + path.string());
  return stream;
}

const std::vector<std::string> kTraceColumns = {
    "tick",   "time",   "u1",         "u2",     "x",
    "y",      "heading", "s",          "d",      "chi",
    "kappa",  "v",      "status",     "zeta",   "iterations",
    "solves", "wall_ms", "res_progress", "res_lateral", "res_velocity",
    "res_lat_accel", "res_control"};

// One trace row as ready-to-print cells, status already stringified.
std::vector<std::string> trace_cells(const TraceRow& row) {
  return {std::to_string(row.tick),
          fmt(row.time),
          fmt(row.applied.u1),
          fmt(row.applied.u2),
          fmt(row.position.x),
          fmt(row.position.y),
          fmt(row.heading),
          fmt(row.frenet.s),
          fmt(row.frenet.d),
          fmt(row.frenet.chi),
          fmt(row.frenet.kappa),
          fmt(row.frenet.v),
          to_string(row.status),
          fmt(row.zeta),
          std::to_string(row.iterations),
          std::to_string(row.solves),
          fmt(row.wall_ms),
          fmt(row.residuals[0]),
          fmt(row.residuals[1]),
          fmt(row.residuals[2]),
          fmt(row.residuals[3]),
          fmt(row.residuals[4])};
}

const std::vector<std::string> kSnapshotColumns = {
    "tick", "s_global", "d_lo_base", "d_hi_base", "d_lo_full", "d_hi_full", "v_cap"};

std::vector<std::string> snapshot_cells(const SnapshotRow& row) {
  return {std::to_string(row.tick), fmt(row.s_global),  fmt(row.d_lo_base), fmt(row.d_hi_base),
          fmt(row.d_lo_full),       fmt(row.d_hi_full), fmt(row.v_cap)};
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream stream = open_file(path);
  for (size_t i = 0; i < columns.size(); ++i) {
    stream << (i ? "," : "") << columns[i];
  }
  stream << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      stream << (i ? "," : "") << row[i];
    }
    stream << "\n";
  }
  if (!stream) throw std::runtime_error("write failed: " + path.string());
}

// Row files in JSON keep the same cells as the CSV: a columns list plus rows
// of values, numbers unquoted.
void write_json_rows(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const std::vector<std::vector<std::string>>& rows,
                     const std::vector<bool>& quoted) {
  std::ofstream stream = open_file(path);
  stream << "{\n  \"columns\": [";
  for (size_t i = 0; i < columns.size(); ++i) {
    stream << (i ? ", " : "") << '"' << columns[i] << '"';
  }
  stream << "],\n  \"rows\": [\n";
  for (size_t r = 0; r < rows.size(); ++r) {
    stream << "    [";
    for (size_t i = 0; i < rows[r].size(); ++i) {
      stream << (i ? ", " : "");
      if (quoted[i]) stream << '"' << rows[r][i] << '"';
      else stream << rows[r][i];
    }
    stream << (r + 1 < rows.size() ? "],\n" : "]\n");
  }
  stream << "  ]\n}\n";
  if (!stream) throw std::runtime_error("write failed: " + path.string());
}

void write_rows(const std::filesystem::path& path, const std::string& format,
                const std::vector<std::string>& columns,
                const std::vector<std::vector<std::string>>& rows,
                const std::vector<bool>& quoted) {
  if (format == "json") {
    write_json_rows(path, columns, rows, quoted);
  } else {
    write_csv(path, columns, rows);
  }
}

}  // namespace

void emit_traces(const SimResult& result, const Scenario& scenario, const SimOptions& options,
                 const std::string& out_dir, const EmitOptions& emit) {
  const std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  const std::string extension = emit.format == "json" ? ".json" : ".csv";

  std::vector<std::vector<std::string>> trace_rows;
  trace_rows.reserve(result.trace.size());
  for (const TraceRow& row : result.trace) trace_rows.push_back(trace_cells(row));
  std::vector<bool> trace_quoted(kTraceColumns.size(), false);
  trace_quoted[12] = true;  // status
  write_rows(dir / ("trace" + extension), emit.format, kTraceColumns, trace_rows, trace_quoted);

  std::vector<std::vector<std::string>> snapshot_rows;
  snapshot_rows.reserve(result.snapshots.size());
  for (const SnapshotRow& row : result.snapshots) snapshot_rows.push_back(snapshot_cells(row));
  write_rows(dir / ("constraints" + extension), emit.format, kSnapshotColumns, snapshot_rows,
             std::vector<bool>(kSnapshotColumns.size(), false));

  // The run summary is always JSON: a handful of scalars that tests and
  // tooling read back.
  {
    std::ofstream stream = open_file(dir / "summary.json");
    stream << "{\n";
    stream << "  \"scenario\": \"" << scenario.name << "\",\n";
    stream << "  \"variant\": \"" << to_string(options.variant) << "\",\n";
    stream << "  \"seed\": " << options.seed << ",\n";
    stream << "  \"outcome\": \"" << to_string(result.outcome) << "\",\n";
    stream << "  \"reason\": \"" << result.reason << "\",\n";
    stream << "  \"ticks\": " << result.trace.size() << ",\n";
    stream << "  \"final_progress\": " << fmt(result.final_progress) << ",\n";
    stream << "  \"min_speed\": " << fmt(result.min_speed) << ",\n";
    stream << "  \"collision\": " << (result.collision ? "true" : "false") << ",\n";
    stream << "  \"collision_tick\": " << result.collision_tick << ",\n";
    stream << "  \"failure_s\": " << fmt(result.failure_location.s) << ",\n";
    stream << "  \"mean_solve_ms\": " << fmt(result.mean_solve_ms) << ",\n";
    stream << "  \"max_solve_ms\": " << fmt(result.max_solve_ms) << "\n";
    stream << "}\n";
    if (!stream) throw std::runtime_error("write failed: summary.json");
  }

  if (emit.aggregate) {
    std::vector<std::vector<std::string>> rows;
    for (size_t tick = 0; tick < result.plan_paths.size(); ++tick) {
      const auto& path = result.plan_paths[tick];
      for (size_t node = 0; node < path.size(); ++node) {
        rows.push_back({std::to_string(tick), std::to_string(node), fmt(path[node].x),
                        fmt(path[node].y)});
      }
    }
    write_rows(dir / ("aggregate" + extension), emit.format, {"tick", "node", "x", "y"}, rows,
               std::vector<bool>(4, false));
  }

  if (emit.table) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({to_string(options.variant), std::to_string(result.trace.size()),
                    fmt(result.mean_solve_ms), fmt(result.max_solve_ms)});
    write_rows(dir / ("table" + extension), emit.format,
               {"variant", "ticks", "mean_solve_ms", "max_solve_ms"}, rows,
               std::vector<bool>{true, false, false, false});
  }
}

}  // namespace planner
