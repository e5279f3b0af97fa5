#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace attachsim {

enum class Direction { Uplink, Downlink };

// The eleven NAS messages of an LTE attach, in protocol order. The enumerator
// value is the step index used in logs and latency tables.
enum class AttachStep : int {
  AttachRequest = 0,
  IdentityRequest = 1,
  IdentityResponse = 2,
  AuthenticationRequest = 3,
  AuthenticationResponse = 4,
  SecurityModeCommand = 5,
  SecurityModeComplete = 6,
  EsmInfoRequest = 7,
  EsmInfoResponse = 8,
  AttachAccept = 9,
  AttachComplete = 10,
};

inline constexpr std::size_t kStepCount = 11;

inline constexpr std::array<AttachStep, kStepCount> kAllSteps = {
    AttachStep::AttachRequest,         AttachStep::IdentityRequest,
    AttachStep::IdentityResponse,      AttachStep::AuthenticationRequest,
    AttachStep::AuthenticationResponse, AttachStep::SecurityModeCommand,
    AttachStep::SecurityModeComplete,  AttachStep::EsmInfoRequest,
    AttachStep::EsmInfoResponse,       AttachStep::AttachAccept,
    AttachStep::AttachComplete,
};

constexpr int index_of(AttachStep s) { return static_cast<int>(s); }

// Even steps originate at the device, odd steps at the network.
constexpr Direction direction_of(AttachStep s) {
  return index_of(s) % 2 == 0 ? Direction::Uplink : Direction::Downlink;
}

// Identity and ESM-information exchanges are skipped by some devices.
constexpr bool is_optional(AttachStep s) {
  switch (s) {
    case AttachStep::IdentityRequest:
    case AttachStep::IdentityResponse:
    case AttachStep::EsmInfoRequest:
    case AttachStep::EsmInfoResponse:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(AttachStep s);
std::string_view to_string(Direction d);
std::optional<AttachStep> parse_step(std::string_view name);
std::optional<Direction> parse_direction(std::string_view name);

// Which optional exchanges a device performs.
struct OptionalSteps {
  bool identity = true;
  bool esm_info = true;

  bool enabled(AttachStep s) const;
  bool operator==(const OptionalSteps&) const = default;
};

}  // namespace attachsim
