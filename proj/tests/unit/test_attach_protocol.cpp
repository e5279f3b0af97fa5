#include <gtest/gtest.h>

#include <cmath>

#include "attachsim/attach_protocol.hpp"
#include "attachsim/errors.hpp"

using namespace attachsim;

namespace {

const ChannelCatalog& channels() {
  static const ChannelCatalog c = builtin_channels();
  return c;
}

DeviceModel model_for(const std::string& name, LatencyMoments alg_latency = {}) {
  const auto& p = builtin_profiles().get(name);
  return DeviceModel(p, channels().get(p.channel), xor_test_algorithm(alg_latency));
}

AttachRecord one(const DeviceModel& m, std::uint64_t seed, const NetworkConfig& net = {},
                 Subscriber sub = {}) {
  EventClock clock;
  RngStream rng(seed);
  return run_attach(m, net, clock, rng, "dev-01", sub);
}

double mean_auth(const DeviceModel& m, int n, std::uint64_t seed) {
  double s = 0;
  RngStream rng(seed);
  for (int i = 0; i < n; ++i) {
    EventClock clock;
    s += run_attach(m, {}, clock, rng, "d").latency(AttachStep::AuthenticationResponse)->ms();
  }
  return s / n;
}

}  // namespace

TEST(AttachStep, DirectionsAlternate) {
  for (AttachStep s : kAllSteps) {
    EXPECT_EQ(direction_of(s), index_of(s) % 2 == 0 ? Direction::Uplink : Direction::Downlink);
    EXPECT_EQ(parse_step(to_string(s)), s);
  }
  EXPECT_EQ(parse_step("4"), AttachStep::AuthenticationResponse);
  EXPECT_FALSE(parse_step("Detach").has_value());
}

TEST(AuthTimer, DefaultsAndOverride) {
  EXPECT_EQ(network_auth_timer().us(), 6'000'000);
  NetworkConfig n;
  n.auth_timer = Duration::from_ms(3000);
  EXPECT_EQ(network_auth_timer(n).ms(), 3000.0);
  n.auth_timer = Duration{};
  EXPECT_THROW(network_auth_timer(n), ConfigError);
}

TEST(RunAttach, FullSequenceForEveryProfile) {
  for (const auto& p : builtin_profiles().all()) {
    const DeviceModel m(p, channels().get(p.channel), xor_test_algorithm());
    const auto r = one(m, 5);
    EXPECT_EQ(r.outcome, AttachOutcome::Completed) << p.model_name;
    const auto rep = validate_sequence(r, p);
    EXPECT_TRUE(rep.pass()) << p.model_name << ": "
                            << (rep.violations.empty() ? "" : rep.violations[0].detail);
    std::size_t expected = 11;
    if (!p.optional_steps.identity) expected -= 2;
    if (!p.optional_steps.esm_info) expected -= 2;
    EXPECT_EQ(r.messages.size(), expected) << p.model_name;
    ASSERT_TRUE(r.auth_breakdown.has_value());
  }
}

TEST(RunAttach, ConservationIsExact) {
  const auto m = model_for("SMBHyb_rem");
  RngStream rng(8);
  EventClock clock(SimTime::from_us(123'456'789));
  for (int i = 0; i < 200; ++i) {
    const auto r = run_attach(m, {}, clock, rng, "x");
    std::int64_t sum = 0;
    for (AttachStep s : kAllSteps) {
      if (auto l = r.latency(s)) sum += l->us();
    }
    ASSERT_EQ(sum, r.span().us());
    clock.advance_to(clock.now() + Duration::from_ms(1000));
  }
}

TEST(RunAttach, Deterministic) {
  const auto m = model_for("SMBPor_rem");
  const auto a = one(m, 42);
  const auto b = one(m, 42);
  EXPECT_EQ(a.messages, b.messages);
  const auto c = one(m, 43);
  EXPECT_NE(a.messages, c.messages);
}

TEST(RunAttach, TimerCancelledAfterCompletion) {
  const auto m = model_for("FairPhone5G");
  EventClock clock;
  RngStream rng(1);
  const auto r = run_attach(m, {}, clock, rng, "d");
  EXPECT_EQ(clock.now(), r.messages.back().time);
  EXPECT_TRUE(clock.idle());
}

TEST(RunAttach, LongRunMeans) {
  // Loose bands here; the acceptance suite checks the whole table.
  const auto note = model_for("GalaxyNote4");
  RngStream rng(3);
  double total = 0;
  for (int i = 0; i < 2000; ++i) {
    EventClock clock;
    total += run_attach(note, {}, clock, rng, "n").span().ms();
  }
  EXPECT_NEAR(total / 2000, 316.8, 316.8 * 0.05);
  EXPECT_NEAR(mean_auth(model_for("SMBHyb_rem"), 2000, 4), 2122.7, 2122.7 * 0.05);
}

TEST(RunAttach, AllZeroProfileGivesZeroTotal) {
  DeviceProfile p;
  p.model_name = "Zero";
  for (auto& c : p.step_latency) c = LatencyMoments{0.0, 0.0};
  SimChannel ch;
  ch.name = "none";
  ch.kind = ChannelKind::RemoteTcp;
  ch.rtt = RttDistribution::constant(0.0);
  p.channel = ch.name;
  p.device_class = DeviceClass::SimboxRemote;
  const DeviceModel m(p, ch, xor_test_algorithm());
  // Floors are 0.1 ms per step and 0.1 ms for the auth total; zero means
  // collapse onto those floors only through the degenerate constant path.
  const auto r = one(m, 1);
  EXPECT_EQ(r.outcome, AttachOutcome::Completed);
  EXPECT_EQ(r.span().us(), 0);
}

TEST(RunAttach, AuthTimeout) {
  const auto m = model_for("SMBHyb_rem");
  NetworkConfig net;
  net.auth_timer = Duration::from_ms(1000);
  const auto r = one(m, 9, net);
  EXPECT_EQ(r.outcome, AttachOutcome::AuthTimeout);
  EXPECT_EQ(r.messages.back().message, AttachStep::AuthenticationResponse);
  EXPECT_GT(*r.latency(AttachStep::AuthenticationResponse), net.auth_timer);
  EXPECT_TRUE(validate_sequence(r, m.profile()).pass());
}

TEST(RunAttach, TimeoutImpliesLatencyAboveTimer) {
  const auto m = model_for("SMBHyb_rem");
  NetworkConfig net;
  net.auth_timer = Duration::from_ms(2122.7);  // about half the attempts time out
  RngStream rng(10);
  int timeouts = 0;
  for (int i = 0; i < 400; ++i) {
    EventClock clock;
    const auto r = run_attach(m, net, clock, rng, "t");
    const auto auth = *r.latency(AttachStep::AuthenticationResponse);
    if (r.outcome == AttachOutcome::AuthTimeout) {
      ++timeouts;
      ASSERT_GT(auth, net.auth_timer);
    } else {
      ASSERT_LE(auth, net.auth_timer);
    }
  }
  EXPECT_GT(timeouts, 100);
  EXPECT_LT(timeouts, 300);
}

TEST(RunAttach, WrongKeyIsRejected) {
  const auto m = model_for("FairPhone5G");
  RngStream keys(2);
  const Subscriber sub{SubscriberKey::random(keys), SubscriberKey::random(keys)};
  const auto r = one(m, 2, {}, sub);
  EXPECT_EQ(r.outcome, AttachOutcome::AuthReject);
  EXPECT_EQ(r.messages.back().message, AttachStep::AuthenticationResponse);
  EXPECT_TRUE(validate_sequence(r, m.profile()).pass());
}

TEST(RunAttach, CampRefusedHasNoMessages) {
  const auto m = model_for("FairPhone5G");
  NetworkConfig net;
  net.environment = RadioEnvironment::poor();
  const auto r = one(m, 2, net);
  EXPECT_EQ(r.outcome, AttachOutcome::CampRefused);
  EXPECT_TRUE(r.messages.empty());
  EXPECT_TRUE(validate_sequence(r, m.profile()).pass());
}

TEST(RunAttach, AlgorithmLatencyShiftsAuthMean) {
  const double a = mean_auth(model_for("FairPhone5G", {30.0, 2.0}), 4000, 5);
  const double b = mean_auth(model_for("FairPhone5G", {5.0, 2.0}), 4000, 5);
  EXPECT_NEAR(a - b, 25.0, 1.0);
}

TEST(RunAttach, OutdoorTransmissionAddsToAuth) {
  const auto m = model_for("GalaxyNote4");
  NetworkConfig net;
  net.outdoor_transmission = true;
  net.transmission.outlier_prob = 0.0;
  net.transmission.sigma_ln = 0.0;  // exactly 2 ms
  EventClock c1, c2;
  RngStream r1(6), r2(6);
  const auto plain = run_attach(m, {}, c1, r1, "d");
  const auto outdoor = run_attach(m, net, c2, r2, "d");
  // Same draws up to the auth step; the transmission draw shifts later ones.
  EXPECT_EQ(outdoor.latency(AttachStep::AuthenticationResponse)->us() -
                plain.latency(AttachStep::AuthenticationResponse)->us(),
            2000);
}

TEST(Validate, OrderViolation) {
  const auto m = model_for("FairPhone5G");
  auto r = one(m, 3);
  std::swap(r.messages[3].message, r.messages[4].message);
  std::swap(r.messages[3].direction, r.messages[4].direction);
  EXPECT_TRUE(validate_sequence(r, m.profile()).has(ViolationKind::OrderViolation));
}

TEST(Validate, DirectionViolation) {
  const auto m = model_for("FairPhone5G");
  auto r = one(m, 3);
  r.messages[2].direction = Direction::Downlink;
  EXPECT_TRUE(validate_sequence(r, m.profile()).has(ViolationKind::DirectionViolation));
}

TEST(Validate, TimeViolation) {
  const auto m = model_for("FairPhone5G");
  auto r = one(m, 3);
  r.messages[5].time = r.messages[4].time - Duration::from_us(1);
  EXPECT_TRUE(validate_sequence(r, m.profile()).has(ViolationKind::TimeViolation));
}

TEST(Validate, EsmInPortechRecordIsOptionalStepViolation) {
  const auto& por = builtin_profiles().get("SMBPor_rem");
  const auto m = model_for("SMBPor_rem");
  auto r = one(m, 3);
  ASSERT_EQ(r.outcome, AttachOutcome::Completed);
  // Insert an ESM request before AttachAccept.
  auto it = std::find_if(r.messages.begin(), r.messages.end(),
                         [](const auto& x) { return x.message == AttachStep::AttachAccept; });
  SignalingMessage esm = *std::prev(it);
  esm.message = AttachStep::EsmInfoRequest;
  esm.direction = Direction::Downlink;
  r.messages.insert(it, esm);
  EXPECT_TRUE(validate_sequence(r, por).has(ViolationKind::OptionalStepViolation));
}

TEST(Validate, MissingMandatoryStep) {
  const auto m = model_for("FairPhone5G");
  auto r = one(m, 3);
  r.messages.erase(r.messages.begin() + 5);  // SecurityModeCommand
  EXPECT_TRUE(validate_sequence(r, m.profile()).has(ViolationKind::MissingStep));
}

TEST(Validate, MissingEnabledOptionalStep) {
  const auto m = model_for("FairPhone5G");
  auto r = one(m, 3);
  r.messages.erase(r.messages.begin() + 7, r.messages.begin() + 9);  // ESM pair
  EXPECT_TRUE(validate_sequence(r, m.profile()).has(ViolationKind::OptionalStepViolation));
}

TEST(Validate, ForeignMessage) {
  const auto m = model_for("FairPhone5G");
  auto r = one(m, 3);
  r.messages[6].device_id = "someone-else";
  EXPECT_TRUE(validate_sequence(r, m.profile()).has(ViolationKind::ForeignMessage));
}

TEST(Validate, StepsAfterTimeoutAreUnexpected) {
  const auto m = model_for("FairPhone5G");
  auto r = one(m, 3);
  r.outcome = AttachOutcome::AuthTimeout;
  EXPECT_TRUE(validate_sequence(r, m.profile()).has(ViolationKind::UnexpectedStep));
}
