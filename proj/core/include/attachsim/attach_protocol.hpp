#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attachsim/aka.hpp"
#include "attachsim/attach_step.hpp"
#include "attachsim/device_fleet.hpp"
#include "attachsim/event_clock.hpp"
#include "attachsim/rng.hpp"
#include "attachsim/sim_channel.hpp"
#include "attachsim/time.hpp"

namespace attachsim {

// One NAS log line captured at the base station.
struct SignalingMessage {
  static constexpr std::string_view kLayer = "NAS";

  SimTime time;
  Direction direction = Direction::Uplink;
  std::string device_id;
  AttachStep message = AttachStep::AttachRequest;

  bool operator==(const SignalingMessage&) const = default;
};

enum class AttachOutcome { Completed, AuthTimeout, CampRefused, AuthReject };

std::string_view to_string(AttachOutcome o);

struct AttachRecord {
  std::string device_id;
  int attach_seq = 0;
  std::vector<SignalingMessage> messages;
  AttachOutcome outcome = AttachOutcome::Completed;
  // SIM-side split of the authentication response (empty if never reached).
  std::optional<ChannelBreakdown> auth_breakdown;

  // Gap between `s` and the message before it; nullopt if `s` is absent or first.
  std::optional<Duration> latency(AttachStep s) const;
  Duration span() const;
};

struct NetworkConfig {
  Duration auth_timer = Duration::from_us(6'000'000);
  // Add over-the-air transmission latency to the authentication response.
  bool outdoor_transmission = false;
  TransmissionModel transmission{};
  RadioEnvironment environment{};
};

// The authentication supervision timer. Throws ConfigError unless positive.
Duration network_auth_timer(const NetworkConfig& cfg = {});

// Keys held by the SIM and by the home network for one subscriber.
struct Subscriber {
  SubscriberKey sim_key;
  SubscriberKey network_key;

  static Subscriber matching(const SubscriberKey& k) { return {k, k}; }
};

// A profile bound to its SIM channel and auth algorithm, with every sampler
// precomputed. Construction validates all three and throws ConfigError.
class DeviceModel {
public:
  DeviceModel(DeviceProfile profile, const SimChannel& channel, AuthAlgorithm alg);

  const DeviceProfile& profile() const { return profile_; }
  const SimChannel& channel() const { return sampler_.channel(); }
  const AuthAlgorithm& algorithm() const { return alg_; }
  const AuthCalibration& calibration() const { return calibration_; }

  // Device-side processing before an uplink step (not AuthenticationResponse).
  double sample_uplink(AttachStep s, RngStream& rng) const;
  // Network-side gap before a downlink step.
  double sample_downlink(AttachStep s, RngStream& rng) const;

  struct AuthDraw {
    double latency_ms = 0.0;
    ChannelBreakdown breakdown;
  };
  AuthDraw sample_auth(RngStream& rng) const;

private:
  DeviceProfile profile_;
  AuthAlgorithm alg_;
  AuthCalibration calibration_;
  ChannelSampler sampler_;
  std::array<TruncatedNormal, kStepCount> steps_{};
  TruncatedNormal auth_residual_;
  bool residual_is_jitter_ = false;
  TruncatedNormal attach_complete_residual_;
  TruncatedNormal alg_latency_;
};

// Runs one attach on `clock`, starting at its current time.
AttachRecord run_attach(const DeviceModel& device, const NetworkConfig& network, EventClock& clock,
                        RngStream& rng, std::string_view device_id, const Subscriber& subscriber = {},
                        int attach_seq = 0);

// Convenience overload: binds the profile to `channel` and its named algorithm
// from the default registry, uses the model name as device id.
AttachRecord run_attach(const DeviceProfile& profile, const SimChannel& channel,
                        const NetworkConfig& network, EventClock& clock, RngStream& rng);

enum class ViolationKind {
  OrderViolation,
  DirectionViolation,
  TimeViolation,
  MissingStep,
  OptionalStepViolation,
  UnexpectedStep,
  ForeignMessage,
};

std::string_view to_string(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::size_t index;  // position in record.messages
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool pass() const { return violations.empty(); }
  bool has(ViolationKind k) const;
};

ValidationReport validate_sequence(const AttachRecord& record, const DeviceProfile& profile);

}  // namespace attachsim
