#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "rasql/experiment.hpp"
#include "rasql/learner.hpp"
#include "rasql/occupancy.hpp"
#include "rasql/qtable.hpp"

namespace rasql {

// Every file starts with "# rasql-<kind> v1" followed by optional
// "# key=value" lines and a column header. Numbers use the shortest
// round-trip decimal form.

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Columns phase,z,a,value.
void write_limit_csv(const std::filesystem::path& path, const std::vector<QTable>& limits);
std::vector<QTable> read_limit_csv(const std::filesystem::path& path);

/// Header block (config_digest, seed, steps, period, schedule, visits),
/// then columns t,phase,z,a,q_value.
void write_run_csv(const std::filesystem::path& path, const RunRecord& run);
RunRecord read_run_csv(const std::filesystem::path& path);

/// Columns phase,z,a,t,lower,median,upper,limit.
void write_trace_csv(const std::filesystem::path& path, const AggregateTrace& trace);

/// Columns s,y,z,a,mass in index order.
void write_distribution_csv(const std::filesystem::path& path, const JointDistribution& zeta);

nlohmann::json limit_diagnostics(const LimitReport& report);
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

}  // namespace rasql
