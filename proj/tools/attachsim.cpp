// attachsim: simulate attach logs, run the latency detector, dump distributions.
//
// Exit status: 0 clean, 2 at least one device flagged, 1 on any error.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "attachsim/attach_step.hpp"
#include "attachsim/checksum.hpp"
#include "attachsim/device_fleet.hpp"
#include "attachsim/errors.hpp"
#include "attachsim/scenario.hpp"
#include "attachsim/scenario_config.hpp"

namespace fs = std::filesystem;
using namespace attachsim;

namespace {

int cmd_simulate(const fs::path& config, std::optional<std::uint64_t> seed, const std::optional<fs::path>& out) {
  ScenarioConfig cfg = load_scenario_config(config);
  if (seed) cfg.seed = *seed;
  if (out) cfg.output_dir = *out;
  const auto art = run_scenario(cfg);
  fmt::print("{} records, {} devices\n", art.record_count, cfg.device_count());
  fmt::print("logs     {}  {}\n", art.logs.string(), checksum_hex(art.logs_checksum));
  fmt::print("records  {}\n", art.records.string());
  fmt::print("table    {}\n", art.table.string());
  return 0;
}

int cmd_detect(const fs::path& logs, const fs::path& baseline, const std::optional<fs::path>& policy_file,
               const fs::path& report) {
  const DetectPolicy policy = policy_file ? load_policy(*policy_file) : DetectPolicy{};
  const auto rep = run_detection(logs, baseline, policy, report);
  fmt::print("baseline n={} mean={:.1f} median={:.1f}\n", rep.baseline.n, rep.baseline.mean, rep.baseline.median);
  for (const auto& v : rep.verdicts) {
    fmt::print("{:<24} n={:<4} median={:>8.1f}  t={:>10.2f}  {}\n", v.device_id, v.stats.n, v.stats.median,
               v.test.t, to_string(v.decision));
  }
  fmt::print("{} of {} devices flagged\n", rep.flagged(), rep.verdicts.size());
  return rep.exit_code();
}

int cmd_distribution(const fs::path& logs, const std::string& step_name, const fs::path& out, std::size_t bins) {
  const auto step = parse_step(step_name);
  if (!step) throw ConfigError("unknown step '" + step_name + "'");
  emit_distribution(logs, *step, out, bins);
  fmt::print("{}\n", out.string());
  return 0;
}

int cmd_profiles() {
  fmt::print("{:<16} {:<13} {:<16} {:>6} {:>9}\n", "model", "class", "channel", "rsrp", "total_ms");
  for (const auto& p : builtin_profiles().all()) {
    fmt::print("{:<16} {:<13} {:<16} {:>6.0f} {:>9.1f}\n", p.model_name, to_string(p.device_class), p.channel,
               p.sensitivity_rsrp, p.mean_total());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LTE attach latency simulator and SIMBox detector"};
  app.require_subcommand(1);

  fs::path config, out_dir;
  std::uint64_t seed = 0;
  auto* sim = app.add_subcommand("simulate", "Run a scenario and write logs, records and the step table");
  sim->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  auto* seed_opt = sim->add_option("--seed", seed, "Override the scenario seed");
  auto* out_opt = sim->add_option("--out", out_dir, "Output directory (overrides the config)");

  fs::path logs, baseline, policy, report;
  auto* det = app.add_subcommand("detect", "Classify devices in a log against a baseline log");
  det->add_option("--logs", logs, "JSONL signaling log")->required()->check(CLI::ExistingFile);
  det->add_option("--baseline", baseline, "JSONL log of coupled devices")->required()->check(CLI::ExistingFile);
  auto* policy_opt = det->add_option("--policy", policy, "Policy JSON")->check(CLI::ExistingFile);
  det->add_option("--report", report, "Report JSON; a CSV is written next to it")->required();

  fs::path dist_logs, dist_out;
  std::string step = "AuthenticationResponse";
  std::size_t bins = 100;
  auto* dist = app.add_subcommand("distribution", "Histogram and kernel density of one step's latency");
  dist->add_option("--logs", dist_logs, "JSONL signaling log")->required()->check(CLI::ExistingFile);
  dist->add_option("--step", step, "Step name or index")->capture_default_str();
  dist->add_option("--out", dist_out, "Output CSV")->required();
  dist->add_option("--bins", bins, "Histogram bins")->capture_default_str()->check(CLI::Range(1, 100000));

  auto* prof = app.add_subcommand("profiles", "Show the built-in device profiles");
  prof->add_flag("--list", "List profiles (default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) {
      return cmd_simulate(config, *seed_opt ? std::optional(seed) : std::nullopt,
                          *out_opt ? std::optional(out_dir) : std::nullopt);
    }
    if (det->parsed()) {
      return cmd_detect(logs, baseline, *policy_opt ? std::optional(policy) : std::nullopt, report);
    }
    if (dist->parsed()) return cmd_distribution(dist_logs, step, dist_out, bins);
    if (prof->parsed()) return cmd_profiles();
  } catch (const std::exception& e) {
    fmt::print(stderr, "attachsim: {}\n", e.what());
    return 1;
  }
  return 1;
}
