#include "attachsim/attach_step.hpp"

#include <charconv>

namespace attachsim {

namespace {

constexpr std::array<std::string_view, kStepCount> kNames = {
    "AttachRequest",         "IdentityRequest",     "IdentityResponse",
    "AuthenticationRequest", "AuthenticationResponse", "SecurityModeCommand",
    "SecurityModeComplete",  "EsmInfoRequest",      "EsmInfoResponse",
    "AttachAccept",          "AttachComplete",
};

}  // namespace

std::string_view to_string(AttachStep s) { return kNames[static_cast<std::size_t>(index_of(s))]; }

std::string_view to_string(Direction d) { return d == Direction::Uplink ? "Uplink" : "Downlink"; }

std::optional<AttachStep> parse_step(std::string_view name) {
  for (std::size_t i = 0; i < kStepCount; ++i) {
    if (kNames[i] == name) return kAllSteps[i];
  }
  int idx = -1;
  const auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
  if (ec == std::errc{} && ptr == name.data() + name.size() && idx >= 0 &&
      idx < static_cast<int>(kStepCount)) {
    return kAllSteps[static_cast<std::size_t>(idx)];
  }
  return std::nullopt;
}

std::optional<Direction> parse_direction(std::string_view name) {
  if (name == "Uplink") return Direction::Uplink;
  if (name == "Downlink") return Direction::Downlink;
  return std::nullopt;
}

bool OptionalSteps::enabled(AttachStep s) const {
  switch (s) {
    case AttachStep::IdentityRequest:
    case AttachStep::IdentityResponse:
      return identity;
    case AttachStep::EsmInfoRequest:
    case AttachStep::EsmInfoResponse:
      return esm_info;
    default:
      return true;
  }
}

}  // namespace attachsim
