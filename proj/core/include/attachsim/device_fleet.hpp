#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attachsim/attach_step.hpp"
#include "attachsim/distributions.hpp"
#include "attachsim/rng.hpp"

namespace attachsim {

enum class DeviceClass { Phone, SimboxLocal, SimboxRemote };

std::string_view to_string(DeviceClass c);
DeviceClass parse_device_class(std::string_view s);  // throws ConfigError

// Latency model of one device type. `step_latency` holds the mean and std of
// the gap before each message as seen at the base station; steps the device
// never performs are empty.
struct DeviceProfile {
  std::string model_name;
  DeviceClass device_class = DeviceClass::Phone;
  std::array<std::optional<LatencyMoments>, kStepCount> step_latency{};
  OptionalSteps optional_steps{};
  std::string channel = "coupled_serial";
  double sensitivity_rsrp = -120.0;
  std::string auth_alg = "XorTest";
  // true: step cells include the SIM channel, and a remote channel's processing
  // is scaled to hit the authentication cell. false: cells are device-side
  // only and channel time is added on top.
  bool calibrate_auth = true;
  std::optional<LatencyMoments> reported_total;

  bool coupled() const { return device_class != DeviceClass::SimboxRemote; }
  bool performs(AttachStep s) const { return optional_steps.enabled(s); }
  // Throws ConfigError if the step has no latency entry.
  LatencyMoments step(AttachStep s) const;
  // Sum of per-step means over the steps the device performs.
  double mean_total() const;
};

// Throws ConfigError on missing step entries or out-of-range sensitivity.
void validate_profile(const DeviceProfile& p);

enum class RadioLabel { Excellent, Medium, Poor, CellEdge };
std::string_view to_string(RadioLabel l);

struct RadioEnvironment {
  double rsrp = -71.0;

  RadioLabel label() const;

  static RadioEnvironment excellent() { return {-71.0}; }
  static RadioEnvironment medium() { return {-90.0}; }
  static RadioEnvironment poor() { return {-100.0}; }
  static RadioEnvironment cell_edge() { return {-110.0}; }
};

// Throws ConfigError unless rsrp is within [-130, -40] dBm.
void validate_environment(const RadioEnvironment& env);

enum class CampDecision { Proceed, CampRefused };

CampDecision attempt_camp(const DeviceProfile& profile, const RadioEnvironment& env);

// Over-the-air share of the authentication exchange: lognormal body plus rare
// large outliers. Independent of RSRP by construction.
struct TransmissionModel {
  double median_ms = 2.0;
  double sigma_ln = 0.4;
  double outlier_prob = 0.01;
  double outlier_min_ms = 20.0;
  double outlier_max_ms = 200.0;
};

double transmission_latency(const RadioEnvironment& env, RngStream& rng,
                            const TransmissionModel& model = {});

class ProfileCatalog {
public:
  void add(DeviceProfile p);
  bool contains(std::string_view name) const;
  const DeviceProfile& get(std::string_view name) const;  // throws ConfigError
  const std::vector<DeviceProfile>& all() const { return profiles_; }
  std::vector<const DeviceProfile*> of_class(DeviceClass c) const;

private:
  std::vector<DeviceProfile> profiles_;
};

// The thirteen measured device configurations (nine phones, SIMBoxes with
// local and remote SIM association).
const ProfileCatalog& builtin_profiles();

}  // namespace attachsim
