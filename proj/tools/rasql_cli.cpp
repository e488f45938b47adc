// rasql: command-line front end for limit computation, multi-seed learning
// runs, and comparison of learned tables against the predicted limit.
//
// Exit codes: 0 success/pass, 1 other error, 2 assumption violation
// (non-ergodic behavior chain or unvisited (z, a)), 3 comparison failed.

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "rasql/config.hpp"
#include "rasql/csv_io.hpp"
#include "rasql/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rasql;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitAssumption = 2;
constexpr int kExitCompareFail = 3;

struct Source {
  std::string config_path;
  std::string preset;
};

struct Overrides {
  std::optional<std::size_t> num_seeds;
  std::vector<std::uint64_t> seed_list;
  std::optional<std::uint64_t> steps;
  std::optional<std::uint64_t> log_every;
  std::optional<std::string> out;
  std::optional<std::string> schedule;
  bool allow_partial = false;
};

void add_source(CLI::App* cmd, Source& src) {
  auto* cfg = cmd->add_option("--config", src.config_path, "Experiment config file (JSON)");
  auto* pre = cmd->add_option("--preset", src.preset, "Bundled preset name (see preset-list)");
  cfg->excludes(pre);
}

ExperimentConfig resolve(const Source& src, const Overrides& ov) {
  json doc;
  fs::path base = ".";
  if (!src.config_path.empty()) {
    std::ifstream in(src.config_path);
    if (!in) throw ConfigError("cannot open '" + src.config_path + "'");
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("'" + src.config_path + "': " + e.what());
    }
    base = fs::path(src.config_path).parent_path();
  } else if (!src.preset.empty()) {
    doc = preset_document(src.preset);
  } else {
    throw ConfigError("one of --config or --preset is required");
  }
  if (ov.num_seeds) {
    doc.erase("seeds");
    doc["num_seeds"] = *ov.num_seeds;
  }
  if (!ov.seed_list.empty()) doc["seeds"] = ov.seed_list;
  if (ov.steps) doc["steps"] = *ov.steps;
  if (ov.log_every) doc["log_every"] = *ov.log_every;
  if (ov.out) doc["out"] = *ov.out;
  if (ov.schedule) doc["schedule"] = *ov.schedule;
  if (ov.allow_partial) doc["allow_partial"] = true;
  return config_from_json(doc, base);
}

void print_tables(const std::vector<QTable>& tables, const char* label) {
  std::cout << std::setprecision(10);
  for (std::size_t l = 0; l < tables.size(); ++l) {
    std::cout << label;
    if (tables.size() > 1) std::cout << " (phase " << l << ")";
    std::cout << ":\n";
    for (std::size_t z = 0; z < tables[l].num_states(); ++z) {
      std::cout << "  z=" << z << ":";
      for (std::size_t a = 0; a < tables[l].num_actions(); ++a) std::cout << "  " << tables[l](z, a);
      std::cout << '\n';
    }
  }
}

LimitReport write_limit(const ExperimentConfig& cfg, const fs::path& out) {
  LimitReport report = solve_limit(cfg);
  write_limit_csv(out / "limit.csv", report.limits);
  for (std::size_t l = 0; l < report.zetas.size(); ++l)
    write_distribution_csv(out / ("zeta_phase" + std::to_string(l) + ".csv"), report.zetas[l]);
  json diag = limit_diagnostics(report);
  diag["config_digest"] = cfg.digest();
  diag["regularizer"] = make_regularizer(cfg.regularizer)->describe();
  write_json(out / "limit_diagnostics.json", diag);
  return report;
}

int cmd_solve_limit(const Source& src, const Overrides& ov) {
  const auto cfg = resolve(src, ov);
  const fs::path out = cfg.out_dir;
  const auto report = write_limit(cfg, out);
  print_tables(report.limits, "Q limit");
  for (std::size_t l = 0; l < report.period; ++l)
    std::cout << "phase " << l << ": stationarity residual " << report.zetas[l].residual
              << ", fixed-point residual " << report.fixed_point_residuals[l]
              << ", contraction factor " << report.contraction_factors[l] << '\n';
  if (report.partial) std::cout << "warning: limit is partial (unvisited (z, a) pinned at 0)\n";
  std::cout << "wrote " << (out / "limit.csv").string() << '\n';
  return kExitOk;
}

json trend_json(const CompareResult& cmp) {
  json trend = json::array();
  for (const auto& [t, e] : cmp.trend) trend.push_back({{"t", t}, {"median_error", e}});
  return trend;
}

int cmd_learn(const Source& src, const Overrides& ov) {
  const auto cfg = resolve(src, ov);
  const fs::path out = cfg.out_dir;
  const auto report = write_limit(cfg, out);
  const auto runs = run_seeds(cfg);
  for (const auto& run : runs)
    write_run_csv(out / "runs" / ("run_seed" + std::to_string(run.seed) + ".csv"), run);
  const auto trace = aggregate(runs, report.limits);
  write_trace_csv(out / "trace.csv", trace);

  const double tol = default_tolerance(report.limits);
  const auto cmp = compare(report.limits, runs, tol);
  json summary = {{"name", cfg.name},
                  {"config_digest", cfg.digest()},
                  {"schedule", cfg.schedule.describe()},
                  {"regularizer", make_regularizer(cfg.regularizer)->describe()},
                  {"steps", cfg.steps},
                  {"seeds", cfg.seeds},
                  {"period", cfg.period()},
                  {"median_final_error", trace.summary.median},
                  {"final_error_iqr", {trace.summary.lower, trace.summary.upper}},
                  {"phase_median_final_errors", trace.summary.phase_medians},
                  {"default_tolerance", tol},
                  {"trend", trend_json(cmp)}};
  write_json(out / "summary.json", summary);

  print_tables(report.limits, "Q limit");
  std::vector<QTable> medians = report.limits;
  for (const auto& s : trace.series) medians[s.phase](s.z, s.a) = s.median.back();
  print_tables(medians, "median final Q");
  std::cout << "median final sup-norm error " << trace.summary.median << " (IQR "
            << trace.summary.lower << " .. " << trace.summary.upper << ") over " << runs.size()
            << " seeds, schedule " << cfg.schedule.describe() << '\n';
  std::cout << "wrote " << (out / "trace.csv").string() << '\n';
  return kExitOk;
}

int cmd_compare(const std::string& out_dir, std::string limit_path, std::string runs_dir,
                std::optional<double> tolerance) {
  if (limit_path.empty()) limit_path = (fs::path(out_dir) / "limit.csv").string();
  if (runs_dir.empty()) runs_dir = (fs::path(out_dir) / "runs").string();
  const auto limits = read_limit_csv(limit_path);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(runs_dir))
    if (entry.path().extension() == ".csv") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no run files in '" + runs_dir + "'");
  std::vector<RunRecord> runs;
  for (const auto& f : files) runs.push_back(read_run_csv(f));

  const double tol = tolerance ? *tolerance : default_tolerance(limits);
  const auto cmp = compare(limits, runs, tol);
  std::cout << std::setprecision(6);
  std::cout << "phase  median ||Q_final - Q_limit||_inf\n";
  for (std::size_t l = 0; l < cmp.phase_median_errors.size(); ++l)
    std::cout << std::setw(5) << l << "  " << cmp.phase_median_errors[l] << '\n';
  std::cout << "median over seeds of max-phase error: " << cmp.median_error << " (tolerance "
            << tol << ")\n";
  for (const auto& [t, e] : cmp.trend) std::cout << "  t=" << t << "  median error " << e << '\n';
  std::cout << "trend " << (cmp.trend_ok ? "decreasing" : "NOT decreasing") << '\n';
  std::cout << (cmp.pass ? "PASS" : "FAIL") << '\n';
  return cmp.pass ? kExitOk : kExitCompareFail;
}

int cmd_eval_return(const Source& src, const Overrides& ov, const std::string& which,
                    std::size_t episodes, std::size_t horizon) {
  const auto cfg = resolve(src, ov);
  const auto reg = make_regularizer(cfg.regularizer);
  std::optional<PeriodicPolicy> policy;
  if (which == "behavior") {
    policy = cfg.behavior;
  } else if (which == "uniform") {
    policy = PeriodicPolicy(
        {Policy::uniform(cfg.machine.num_agent_states(), cfg.model.num_actions)});
  } else if (which == "greedy") {
    const auto report = solve_limit(cfg);
    std::vector<Policy> phases;
    for (const auto& q : report.limits) phases.push_back(greedy_policy(q, *reg));
    policy = PeriodicPolicy(std::move(phases));
  } else {
    throw ConfigError("--policy must be greedy, behavior or uniform");
  }
  const auto est = evaluate_return(cfg.model, cfg.machine, *policy, *reg, cfg.seeds, episodes, horizon);
  std::cout << std::setprecision(8);
  std::cout << "policy " << which << ", " << est.episodes << " episodes, horizon " << est.horizon
            << " (truncation <= " << est.truncation_bound << ")\n";
  std::cout << "J       = " << est.mean << " +- " << est.stderr_ << '\n';
  std::cout << "J^Omega = " << est.regularized_mean << " +- " << est.regularized_stderr << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized agent-state Q-learning laboratory"};
  app.require_subcommand(1);

  Source src;
  Overrides ov;
  std::optional<std::size_t> num_seeds;
  std::optional<std::uint64_t> steps, log_every;
  std::optional<std::string> out, schedule;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seeds", num_seeds, "Number of seeds (1..N offset by first_seed)");
    cmd->add_option("--seed-list", ov.seed_list, "Explicit seeds")->delimiter(',');
    cmd->add_option("--steps", steps, "Learner steps per seed");
    cmd->add_option("--log-every", log_every, "Snapshot cadence");
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--schedule", schedule, "inverse-visit | polynomial:<w> | constant:<c>");
    cmd->add_flag("--allow-partial", ov.allow_partial, "Pin unvisited (z, a) instead of failing");
  };

  auto* list = app.add_subcommand("preset-list", "List bundled presets");

  auto* solve = app.add_subcommand("solve-limit", "Compute the predicted limit Q-table(s)");
  add_source(solve, src);
  add_overrides(solve);

  auto* learn = app.add_subcommand("learn", "Run the learner over all seeds and aggregate");
  add_source(learn, src);
  add_overrides(learn);

  auto* cmp = app.add_subcommand("compare", "Compare run artifacts against a limit");
  std::string cmp_out = "out", cmp_limit, cmp_runs;
  std::optional<double> tolerance;
  cmp->add_option("--out", cmp_out, "Directory holding limit.csv and runs/");
  cmp->add_option("--limit", cmp_limit, "Limit CSV (default <out>/limit.csv)");
  cmp->add_option("--runs", cmp_runs, "Directory of run CSVs (default <out>/runs)");
  cmp->add_option("--tolerance", tolerance, "Absolute tolerance (default 0.05 (1 + ||Q||))");

  auto* eval = app.add_subcommand("eval-return", "Monte-Carlo return of a policy");
  add_source(eval, src);
  add_overrides(eval);
  std::string which = "greedy";
  std::size_t episodes = 1000, horizon = 0;
  eval->add_option("--policy", which, "greedy | behavior | uniform");
  eval->add_option("--episodes", episodes, "Episodes per seed");
  eval->add_option("--horizon", horizon, "Episode length (0: automatic)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  ov.num_seeds = num_seeds;
  ov.steps = steps;
  ov.log_every = log_every;
  ov.out = out;
  ov.schedule = schedule;

  try {
    if (list->parsed()) {
      for (const auto& name : preset_names()) std::cout << name << '\n';
      return kExitOk;
    }
    if (solve->parsed()) return cmd_solve_limit(src, ov);
    if (learn->parsed()) return cmd_learn(src, ov);
    if (cmp->parsed()) return cmd_compare(cmp_out, cmp_limit, cmp_runs, tolerance);
    if (eval->parsed()) return cmd_eval_return(src, ov, which, episodes, horizon);
  } catch (const NonErgodicError& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const ZeroVisitError& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return kExitAssumption;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
