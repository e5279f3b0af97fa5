#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "attachsim/attach_protocol.hpp"
#include "attachsim/edge_monitor.hpp"
#include "attachsim/scenario_config.hpp"

namespace attachsim {

struct SimulationResult {
  // Sorted by device id, then attach sequence.
  std::vector<AttachRecord> records;
  // device id -> model name, same order as records' devices.
  std::vector<std::pair<std::string, std::string>> devices;
  // Column order for tables: first appearance in the fleet.
  std::vector<std::string> models;

  const std::string& model_of(std::string_view device_id) const;
};

// Runs every device of the fleet in memory. Each device draws from
// substream(device index) of the scenario seed, so the result does not depend
// on the thread count.
SimulationResult simulate(const ScenarioConfig& cfg);

// Per-model statistics of every step gap plus the record span ("Total").
struct ModelTable {
  std::string model;
  std::array<std::optional<LatencyStats>, kStepCount> steps{};
  std::optional<LatencyStats> total;
};
std::vector<ModelTable> step_table(const SimulationResult& sim);

struct ScenarioArtifacts {
  std::filesystem::path logs;     // JSONL signaling messages
  std::filesystem::path records;  // one CSV row per attach
  std::filesystem::path table;    // rows = steps, columns = models, "mean±std"
  std::uint64_t logs_checksum = 0;
  std::size_t record_count = 0;
};

// simulate() and write the artifacts into cfg.output_dir (created if needed).
ScenarioArtifacts run_scenario(const ScenarioConfig& cfg);
ScenarioArtifacts write_artifacts(const SimulationResult& sim, const std::filesystem::path& dir);

struct DetectionReport {
  LatencyStats baseline;
  std::vector<Verdict> verdicts;  // sorted by device id
  std::size_t flagged() const;
  // 0 when every device is clear, 2 when any is flagged.
  int exit_code() const { return flagged() > 0 ? 2 : 0; }
};

// Baseline: every authentication sample in `baseline` records. Devices: per
// device id in `records`. Throws EmptyWindow / DegenerateInput.
DetectionReport detect(const std::vector<AttachRecord>& records, const std::vector<AttachRecord>& baseline,
                       const DetectPolicy& policy);

// File-level pipeline. Writes `report` (JSON) and the same path with a .csv
// extension. ParseError carries the offending line number.
DetectionReport run_detection(const std::filesystem::path& logs, const std::filesystem::path& baseline_logs,
                              const DetectPolicy& policy, const std::filesystem::path& report);

struct DistributionPoint {
  double lo_ms = 0.0;
  double hi_ms = 0.0;
  std::size_t count = 0;
  double density = 0.0;  // histogram, per ms
  double kde = 0.0;      // Gaussian kernel estimate at the bin centre
};

// Fixed-width histogram of one step's gaps with a kernel density overlay.
// Throws EmptyWindow when the step never occurs.
std::vector<DistributionPoint> distribution(const std::vector<AttachRecord>& records, AttachStep step,
                                            std::size_t bins = 100);
void emit_distribution(const std::filesystem::path& logs, AttachStep step, const std::filesystem::path& out,
                       std::size_t bins = 100);

}  // namespace attachsim
