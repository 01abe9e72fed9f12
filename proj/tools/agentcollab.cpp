#include <CLI11.hpp>
#include <iostream>

#include "agentcollab/error.hpp"
#include "agentcollab/run.hpp"

using namespace agentcollab;

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent collaboration harness: run scenarios, judge them, report metrics"};
  app.require_subcommand(1);

  std::vector<std::filesystem::path> validate_paths;
  auto* validate = app.add_subcommand("validate", "Schema-check scenario, profile and script files");
  validate->add_option("paths", validate_paths, "Files or directories")->required();

  RunConfig config;
  std::string mode = "coordination";
  std::string referencing = "on";
  std::string gold;
  auto* run = app.add_subcommand("run", "Run every scenario and write a run directory");
  run->add_option("--mode", mode, "coordination, routing or single-agent")
      ->check(CLI::IsMember({"coordination", "routing", "single-agent"}));
  run->add_option("--scenarios", config.scenarios, "Scenario file or directory")->required();
  run->add_option("--profiles", config.profiles, "Agent profile file")->required();
  run->add_option("--backend", config.backend, "scripted:<dir> or openai:<model>")->required();
  run->add_option("--payload-referencing", referencing, "on or off")
      ->check(CLI::IsMember({"on", "off"}));
  run->add_option("--routing-threshold", config.routing_threshold, "Minimum confidence to route")
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--seed", config.seed, "Seed passed to every model call");
  run->add_option("--parallelism", config.parallelism, "Sessions run at once")
      ->check(CLI::PositiveNumber);
  run->add_option("--out", config.out, "Output directory")->required();
  run->add_option("--judge", config.judge, "oracle or model")->check(CLI::IsMember({"oracle", "model"}));
  run->add_option("--classifier", config.classifier, "rule or model")
      ->check(CLI::IsMember({"rule", "model"}));
  run->add_option("--classify-latency-ms", config.classify_latency_ms,
                  "Virtual latency charged per rule-based classification");
  run->add_option("--routing-gold", gold, "Gold routing labels for accuracy metrics");

  std::vector<std::filesystem::path> run_dirs;
  auto* report = app.add_subcommand("report", "Print metrics for one or more run directories");
  report->add_option("runs", run_dirs, "Run directories; the first is the baseline")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) {
      auto rows = cmd_validate(validate_paths);
      std::cout << format_validation(rows);
      for (const auto& r : rows) {
        if (!r.ok) return 1;
      }
      return 0;
    }
    if (*run) {
      config.mode = run_mode_from_string(mode);
      config.payload_referencing = referencing == "on";
      if (!gold.empty()) config.routing_gold = gold;
      cmd_run(config);
      std::cout << read_text_file(config.out / "report.txt");
      return 0;
    }
    if (*report) {
      std::vector<std::string> warnings;
      auto text = cmd_report(run_dirs, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      std::cout << text;
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
