#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attachsim/attach_protocol.hpp"
#include "attachsim/device_fleet.hpp"
#include "attachsim/edge_monitor.hpp"
#include "attachsim/sim_channel.hpp"

namespace attachsim {

inline constexpr std::string_view kScenarioSchema = "attachsim-scenario/1";
inline constexpr std::string_view kPolicySchema = "attachsim-policy/1";

struct FleetEntry {
  DeviceProfile profile;  // profile.channel already resolved against overrides
  int count = 1;
  std::optional<RadioEnvironment> environment;  // overrides the scenario's
  std::string id_prefix;                        // defaults to the model name
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  int attaches_per_device = 50;
  std::vector<FleetEntry> fleet;
  RadioEnvironment environment{};
  NetworkConfig network{};
  ChannelCatalog channels = builtin_channels();
  DetectPolicy detect{};
  std::optional<ReauthPolicy> reauth;
  Duration attach_gap = Duration::from_ms(1000.0);  // idle time between attaches
  std::filesystem::path output_dir;
  unsigned threads = 0;  // 0: hardware concurrency

  std::size_t device_count() const;
};

// JSON text. Relative paths inside resolve against `base_dir`. Throws
// ConfigError naming the offending key; unknown keys are errors.
ScenarioConfig parse_scenario_config(std::string_view text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

// Checks counts, ids and bindings. Called by the parsers and run_scenario.
void validate_scenario(const ScenarioConfig& cfg);

DetectPolicy parse_policy(std::string_view text);
DetectPolicy load_policy(const std::filesystem::path& path);

// Device id of the i-th device (0-based) of an entry.
std::string device_id(const FleetEntry& e, int i);

}  // namespace attachsim
