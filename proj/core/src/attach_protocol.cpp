#include "attachsim/attach_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <variant>

#include "attachsim/errors.hpp"

namespace attachsim {

namespace {

constexpr double kStepFloorMs = 0.1;
// Fires after any message that lands on the same microsecond as the expiry.
constexpr int kTimerOrderKey = static_cast<int>(kStepCount);

// Calibrated: the profile's cells are what the base station sees, channel
// included. Otherwise they are device-side only and channel time adds on top.
AuthCalibration bind_channel(const DeviceProfile& p, const SimChannel& ch) {
  const LatencyMoments target = p.step(AttachStep::AuthenticationResponse);
  if (!p.calibrate_auth) {
    validate_channel(ch);
    return AuthCalibration{ch, 1.0, target};
  }
  return calibrate_auth(ch, target, ch.remote());
}

}  // namespace

std::string_view to_string(AttachOutcome o) {
  switch (o) {
    case AttachOutcome::Completed: return "Completed";
    case AttachOutcome::AuthTimeout: return "AuthTimeout";
    case AttachOutcome::CampRefused: return "CampRefused";
    case AttachOutcome::AuthReject: return "AuthReject";
  }
  return "Completed";
}

std::optional<Duration> AttachRecord::latency(AttachStep s) const {
  for (std::size_t i = 1; i < messages.size(); ++i) {
    if (messages[i].message == s) return messages[i].time - messages[i - 1].time;
  }
  return std::nullopt;
}

Duration AttachRecord::span() const {
  if (messages.empty()) return {};
  return messages.back().time - messages.front().time;
}

Duration network_auth_timer(const NetworkConfig& cfg) {
  if (cfg.auth_timer <= Duration{}) throw ConfigError("authentication timer must be positive");
  return cfg.auth_timer;
}

// --- DeviceModel --------------------------------------------------------------

DeviceModel::DeviceModel(DeviceProfile profile, const SimChannel& channel, AuthAlgorithm alg)
    : profile_(std::move(profile)),
      alg_(std::move(alg)),
      calibration_(bind_channel(profile_, channel)),
      sampler_(calibration_.channel) {
  validate_profile(profile_);
  if (!alg_.compute) throw ConfigError("auth algorithm '" + alg_.name + "' has no compute function");

  for (AttachStep s : kAllSteps) {
    if (!profile_.performs(s)) continue;
    steps_[static_cast<std::size_t>(index_of(s))] = TruncatedNormal(profile_.step(s), kStepFloorMs);
  }

  const LatencyMoments residual = calibration_.residual;
  residual_is_jitter_ = residual.mean_ms <= kStepFloorMs;
  if (!residual_is_jitter_) auth_residual_ = TruncatedNormal(residual, kStepFloorMs);

  const LatencyMoments complete = profile_.step(AttachStep::AttachComplete);
  const LatencyMoments relay = profile_.calibrate_auth ? attach_complete_moments(channel) : LatencyMoments{};
  attach_complete_residual_ = TruncatedNormal(
      {complete.mean_ms - relay.mean_ms,
       std::sqrt(std::max(0.0, complete.std_ms * complete.std_ms - relay.std_ms * relay.std_ms))},
      kStepFloorMs);

  alg_latency_ = TruncatedNormal(alg_.latency, 0.0);
}

double DeviceModel::sample_uplink(AttachStep s, RngStream& rng) const {
  if (s == AttachStep::AttachComplete) {
    return attach_complete_residual_.sample(rng) + sampler_.attach_complete(rng);
  }
  return steps_[static_cast<std::size_t>(index_of(s))].sample(rng);
}

double DeviceModel::sample_downlink(AttachStep s, RngStream& rng) const {
  if (s == AttachStep::AttachAccept) return steps_[static_cast<std::size_t>(index_of(s))].sample(rng);
  // Short network turnarounds are modelled as their mean.
  return profile_.step(s).mean_ms;
}

DeviceModel::AuthDraw DeviceModel::sample_auth(RngStream& rng) const {
  AuthDraw d;
  d.breakdown = sampler_.auth_elapsed(rng);
  double residual = 0.0;
  if (residual_is_jitter_) {
    residual = rng.normal(calibration_.residual.mean_ms, calibration_.residual.std_ms);
  } else {
    residual = auth_residual_.sample(rng);
  }
  const double total = d.breakdown.total() + residual + alg_latency_.sample(rng);
  // An all-zero model stays at zero; anything else respects the step floor.
  d.latency_ms = total == 0.0 ? 0.0 : std::max(kStepFloorMs, total);
  return d;
}

// --- attach state machines ------------------------------------------------------

namespace {

// Payload carried with a message from device to network or back.
struct Payload {
  std::optional<AuthChallenge> challenge;
  std::variant<std::monostate, AuthResponse, AuthFailure> auth;
};

class AttachRun {
public:
  AttachRun(const DeviceModel& dev, const NetworkConfig& net, EventClock& clock, RngStream& rng,
            std::string_view device_id, const Subscriber& sub)
      : dev_(dev), net_(net), clock_(clock), rng_(rng), sub_(sub), timer_(network_auth_timer(net)) {
    record_.device_id = std::string(device_id);
  }

  AttachRecord run() {
    if (attempt_camp(dev_.profile(), net_.environment) == CampDecision::CampRefused) {
      record_.outcome = AttachOutcome::CampRefused;
      return std::move(record_);
    }
    send(AttachStep::AttachRequest, 0.0, {});
    clock_.run();
    if (mme_ != MmeState::Done && mme_ != MmeState::Aborted) {
      throw std::logic_error("attach ended with the network in an intermediate state");
    }
    return std::move(record_);
  }

private:
  enum class UeState { Deregistered, Attaching, Registered };
  enum class MmeState { Idle, WaitIdentity, WaitAuth, WaitSecurity, WaitEsm, WaitComplete, Done, Aborted };

  void send(AttachStep step, double delay_ms, Payload payload) {
    clock_.schedule_in(Duration::from_ms(delay_ms), index_of(step),
                       [this, step, p = std::move(payload)]() mutable { deliver(step, std::move(p)); });
  }

  // Arrival at the base station: log, then hand to the receiving side.
  void deliver(AttachStep step, Payload p) {
    record_.messages.push_back(
        SignalingMessage{clock_.now(), direction_of(step), record_.device_id, step});
    if (step == AttachStep::AuthenticationRequest) arm_auth_timer();
    if (direction_of(step) == Direction::Uplink) {
      on_network(step, std::move(p));
    } else {
      on_device(step, std::move(p));
    }
  }

  // Device side.
  void on_device(AttachStep step, Payload p) {
    switch (step) {
      case AttachStep::IdentityRequest:
        send(AttachStep::IdentityResponse, dev_.sample_uplink(AttachStep::IdentityResponse, rng_), {});
        break;
      case AttachStep::AuthenticationRequest: {
        const AuthChallenge& c = *p.challenge;
        Payload reply;
        std::visit([&](auto&& r) { reply.auth = r; },
                   compute_response(sub_.sim_key, c.rand, c.autn, dev_.algorithm()));
        auto draw = dev_.sample_auth(rng_);
        double latency = draw.latency_ms;
        if (net_.outdoor_transmission) {
          latency += transmission_latency(net_.environment, rng_, net_.transmission);
        }
        record_.auth_breakdown = draw.breakdown;
        send(AttachStep::AuthenticationResponse, latency, std::move(reply));
        break;
      }
      case AttachStep::SecurityModeCommand:
        send(AttachStep::SecurityModeComplete, dev_.sample_uplink(AttachStep::SecurityModeComplete, rng_), {});
        break;
      case AttachStep::EsmInfoRequest:
        send(AttachStep::EsmInfoResponse, dev_.sample_uplink(AttachStep::EsmInfoResponse, rng_), {});
        break;
      case AttachStep::AttachAccept:
        send(AttachStep::AttachComplete, dev_.sample_uplink(AttachStep::AttachComplete, rng_), {});
        ue_ = UeState::Registered;
        break;
      default:
        break;
    }
  }

  void to_device(AttachStep step) {
    Payload p;
    if (step == AttachStep::AuthenticationRequest) {
      challenge_ = generate_challenge(sub_.network_key, rng_, dev_.algorithm());
      p.challenge = challenge_;
    }
    send(step, dev_.sample_downlink(step, rng_), std::move(p));
  }

  // Network side.
  void on_network(AttachStep step, Payload p) {
    if (mme_ == MmeState::Aborted || mme_ == MmeState::Done) return;
    switch (step) {
      case AttachStep::AttachRequest:
        ue_ = UeState::Attaching;
        // Unknown GUTI -> ask for the permanent identity first.
        if (dev_.profile().performs(AttachStep::IdentityRequest)) {
          mme_ = MmeState::WaitIdentity;
          to_device(AttachStep::IdentityRequest);
        } else {
          start_authentication();
        }
        break;
      case AttachStep::IdentityResponse:
        start_authentication();
        break;
      case AttachStep::AuthenticationResponse: {
        if (mme_ != MmeState::WaitAuth) return;
        clock_.cancel(*auth_timer_);
        auth_timer_.reset();
        const auto* resp = std::get_if<AuthResponse>(&p.auth);
        if (resp == nullptr || !verify(challenge_.xres, resp->res)) {
          finish(MmeState::Aborted, AttachOutcome::AuthReject);
          return;
        }
        mme_ = MmeState::WaitSecurity;
        to_device(AttachStep::SecurityModeCommand);
        break;
      }
      case AttachStep::SecurityModeComplete:
        if (dev_.profile().performs(AttachStep::EsmInfoRequest)) {
          mme_ = MmeState::WaitEsm;
          to_device(AttachStep::EsmInfoRequest);
        } else {
          mme_ = MmeState::WaitComplete;
          to_device(AttachStep::AttachAccept);
        }
        break;
      case AttachStep::EsmInfoResponse:
        mme_ = MmeState::WaitComplete;
        to_device(AttachStep::AttachAccept);
        break;
      case AttachStep::AttachComplete:
        finish(MmeState::Done, AttachOutcome::Completed);
        break;
      default:
        break;
    }
  }

  void start_authentication() {
    mme_ = MmeState::WaitAuth;
    to_device(AttachStep::AuthenticationRequest);
  }

  // Supervision runs from the logged request, so AuthTimeout <=> logged latency > timer.
  void arm_auth_timer() {
    auth_timer_ = clock_.schedule_in(timer_, kTimerOrderKey, [this] {
      auth_timer_.reset();
      if (mme_ == MmeState::WaitAuth) finish(MmeState::Aborted, AttachOutcome::AuthTimeout);
    });
  }

  void finish(MmeState state, AttachOutcome outcome) {
    if (auth_timer_) clock_.cancel(*auth_timer_);
    mme_ = state;
    record_.outcome = outcome;
  }

  const DeviceModel& dev_;
  const NetworkConfig& net_;
  EventClock& clock_;
  RngStream& rng_;
  const Subscriber& sub_;
  Duration timer_;
  AttachRecord record_;
  AuthChallenge challenge_;
  UeState ue_ = UeState::Deregistered;
  MmeState mme_ = MmeState::Idle;
  std::optional<EventClock::EventId> auth_timer_;
};

}  // namespace

AttachRecord run_attach(const DeviceModel& device, const NetworkConfig& network, EventClock& clock,
                        RngStream& rng, std::string_view device_id, const Subscriber& subscriber,
                        int attach_seq) {
  AttachRun run(device, network, clock, rng, device_id, subscriber);
  AttachRecord rec = run.run();
  rec.attach_seq = attach_seq;
  return rec;
}

AttachRecord run_attach(const DeviceProfile& profile, const SimChannel& channel,
                        const NetworkConfig& network, EventClock& clock, RngStream& rng) {
  static const AlgorithmRegistry registry;
  const DeviceModel model(profile, channel, registry.get(profile.auth_alg));
  return run_attach(model, network, clock, rng, profile.model_name);
}

// --- validation -------------------------------------------------------------------

std::string_view to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::OrderViolation: return "OrderViolation";
    case ViolationKind::DirectionViolation: return "DirectionViolation";
    case ViolationKind::TimeViolation: return "TimeViolation";
    case ViolationKind::MissingStep: return "MissingStep";
    case ViolationKind::OptionalStepViolation: return "OptionalStepViolation";
    case ViolationKind::UnexpectedStep: return "UnexpectedStep";
    case ViolationKind::ForeignMessage: return "ForeignMessage";
  }
  return "OrderViolation";
}

bool ValidationReport::has(ViolationKind k) const {
  return std::any_of(violations.begin(), violations.end(),
                     [k](const Violation& v) { return v.kind == k; });
}

ValidationReport validate_sequence(const AttachRecord& record, const DeviceProfile& profile) {
  ValidationReport rep;
  const auto add = [&](ViolationKind k, std::size_t i, std::string detail) {
    rep.violations.push_back(Violation{k, i, std::move(detail)});
  };
  const auto& msgs = record.messages;

  if (record.outcome == AttachOutcome::CampRefused) {
    if (!msgs.empty()) add(ViolationKind::UnexpectedStep, 0, "camp-refused record carries messages");
    return rep;
  }

  std::array<int, kStepCount> seen{};
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    const auto& m = msgs[i];
    const std::string name(to_string(m.message));
    seen[static_cast<std::size_t>(index_of(m.message))]++;
    if (m.device_id != record.device_id) add(ViolationKind::ForeignMessage, i, name + " from " + m.device_id);
    if (m.direction != direction_of(m.message)) add(ViolationKind::DirectionViolation, i, name);
    if (!profile.performs(m.message)) add(ViolationKind::OptionalStepViolation, i, name + " not enabled");
    if (i > 0) {
      if (index_of(m.message) <= index_of(msgs[i - 1].message)) {
        add(ViolationKind::OrderViolation, i, name + " after " + std::string(to_string(msgs[i - 1].message)));
      }
      if (m.time < msgs[i - 1].time) add(ViolationKind::TimeViolation, i, name);
    }
  }

  // Last step the outcome implies the record reaches.
  const AttachStep last = record.outcome == AttachOutcome::Completed
                              ? AttachStep::AttachComplete
                              : AttachStep::AuthenticationResponse;
  for (AttachStep s : kAllSteps) {
    const int n = seen[static_cast<std::size_t>(index_of(s))];
    if (index_of(s) > index_of(last)) {
      if (n > 0) add(ViolationKind::UnexpectedStep, msgs.size(), std::string(to_string(s)) + " after terminal step");
      continue;
    }
    if (!profile.performs(s) || n > 0) continue;
    add(is_optional(s) ? ViolationKind::OptionalStepViolation : ViolationKind::MissingStep, msgs.size(),
        std::string(to_string(s)) + " missing");
  }
  return rep;
}

}  // namespace attachsim
