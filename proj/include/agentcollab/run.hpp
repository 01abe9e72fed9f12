#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentcollab/agent_graph.hpp"
#include "agentcollab/harness.hpp"
#include "agentcollab/judge.hpp"
#include "agentcollab/metrics.hpp"
#include "agentcollab/routing.hpp"

namespace agentcollab {

enum class RunMode { coordination, routing, single_agent };

std::string_view to_string(RunMode mode) noexcept;
RunMode run_mode_from_string(std::string_view s);

struct RunConfig {
  RunMode mode = RunMode::coordination;
  std::filesystem::path scenarios;
  std::filesystem::path profiles;
  // "scripted:<dir>" (one <scenario_id>.json script per scenario) or
  // "openai:<model>" (base url and key from AGENTCOLLAB_BASE_URL and
  // AGENTCOLLAB_API_KEY).
  std::string backend;
  bool payload_referencing = true;
  double routing_threshold = kDefaultRoutingThreshold;
  std::uint64_t seed = 0;
  int parallelism = 1;
  std::filesystem::path out;
  // "oracle" or "model".
  std::string judge = "oracle";
  // "rule" or "model".
  std::string classifier = "rule";
  std::int64_t classify_latency_ms = 0;
  std::optional<std::filesystem::path> routing_gold;
};

/// InvalidConfig / Io on bad combinations or missing paths.
void validate_config(const RunConfig& config);

/// Model backend and tool fixtures for one scenario.
struct SessionBackend {
  std::unique_ptr<ModelBackend> model;
  // Tool fixtures from a scripted backend's "actions" key.
  std::optional<Json> actions;
};

SessionBackend make_backend(const std::string& spec, const std::string& scenario_id);

struct ValidationRow {
  std::string path;
  std::string kind;
  bool ok = true;
  std::string detail;
};

/// Schema-checks scenario and profile files (directories are walked).
std::vector<ValidationRow> cmd_validate(const std::vector<std::filesystem::path>& paths);
std::string format_validation(const std::vector<ValidationRow>& rows);

/// Everything a report needs from one run directory.
struct RunData {
  std::string label;
  Json info;
  AgentId root;
  std::vector<Trajectory> trajectories;
  std::vector<SessionVerdicts> verdicts;
  std::optional<std::vector<RoutingGoldLabel>> gold;
};

struct RunMetrics {
  GsrReport gsr;
  LatencyReport latency;
  std::int64_t routing_decisions = 0;
  std::optional<RoutingMetricsReport> routing;
};

RunMetrics compute_run_metrics(const RunData& run);
Json report_json(const RunData& run, const RunMetrics& metrics);
std::string report_text(const RunData& run, const RunMetrics& metrics);

/// Runs every scenario, judges it and writes the run directory:
///   run.json, report.json, report.txt,
///   sessions/<scenario_id>/{trajectory.jsonl, verdicts.jsonl, session.json}
/// Per-session failures are recorded and the run continues.
RunData cmd_run(const RunConfig& config);

RunData read_run(const std::filesystem::path& dir);

/// Side-by-side metrics for one or more run directories, with relative
/// change against the first. Differing scenario sets are intersected and
/// reported in `warnings` (IncompatibleRuns if nothing is shared).
std::string cmd_report(const std::vector<std::filesystem::path>& run_dirs,
                       std::vector<std::string>* warnings = nullptr);

}  // namespace agentcollab
