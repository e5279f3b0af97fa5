#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "attachsim/distributions.hpp"
#include "attachsim/rng.hpp"

namespace attachsim {

enum class ChannelKind { CoupledSerial, RemoteTcp, RemoteUdp };
enum class ProcessingSite { SimBank, Gateway, SimCard, Me };

std::string_view to_string(ChannelKind k);
std::string_view to_string(ProcessingSite s);
ChannelKind parse_channel_kind(std::string_view s);      // throws ConfigError
ProcessingSite parse_processing_site(std::string_view s);  // throws ConfigError

// Round-trip time of one IP hop between gateway, control server and SIM bank.
class RttDistribution {
public:
  enum class Kind { Constant, Empirical, Lognormal };

  static RttDistribution constant(double ms);
  static RttDistribution lognormal(Lognormal ln);
  static RttDistribution empirical(std::vector<double> samples_ms, std::uint64_t checksum = 0,
                                   std::string source = {});
  // One decimal millisecond value per line. Throws IoError / ParseError.
  static RttDistribution load_empirical(const std::filesystem::path& path);

  Kind kind() const { return kind_; }
  double sample(RngStream& rng) const;
  double median() const;
  double mean() const;
  double variance() const;

  const std::vector<double>& samples() const { return sorted_; }
  std::uint64_t checksum() const { return checksum_; }
  const std::string& source() const { return source_; }
  const Lognormal& lognormal_params() const { return ln_; }
  double constant_ms() const { return constant_; }

private:
  Kind kind_ = Kind::Constant;
  double constant_ = 0.0;
  Lognormal ln_{};
  std::vector<double> sorted_;
  std::uint64_t checksum_ = 0;
  std::string source_;
};

struct ProcessingPhase {
  ProcessingSite site = ProcessingSite::SimCard;
  double mean_ms = 0.0;
  double std_ms = 0.0;
};

// Extra latency when the SIMBox control server sits on the Internet rather
// than the local network. Applied once per attach.
struct OnlineServerPenalty {
  bool enabled = false;
  double mean_ms = 460.0;
  double std_ms = 0.0;
};

struct SimChannel {
  std::string name;
  ChannelKind kind = ChannelKind::CoupledSerial;
  RttDistribution rtt = RttDistribution::constant(0.0);
  double loss_prob = 0.0;                  // RemoteUdp only
  double retransmit_timeout_ms = 100.0;    // RemoteUdp only
  double backoff_factor = 2.0;
  double backoff_cap = 8.0;                // multiple of the base timeout
  int sessions_auth = 4;
  int packets_per_session = 2;
  int extra_attach_complete_packets = 0;
  LatencyMoments serial_transfer{0.12, 0.15};  // CoupledSerial per-transfer
  std::vector<ProcessingPhase> processing_phases;
  OnlineServerPenalty online_server;

  bool remote() const { return kind != ChannelKind::CoupledSerial; }
};

// Throws ConfigError when a field is out of range.
void validate_channel(const SimChannel& ch);

struct ChannelBreakdown {
  double transfer_total_ms = 0.0;
  double processing_total_ms = 0.0;
  double total() const { return transfer_total_ms + processing_total_ms; }
};

// Precomputed sampler for one channel; the free functions below build one per
// call, long-running simulations should keep one around.
class ChannelSampler {
public:
  explicit ChannelSampler(SimChannel ch);

  const SimChannel& channel() const { return ch_; }
  ChannelBreakdown auth_elapsed(RngStream& rng) const;
  double attach_complete(RngStream& rng) const;

private:
  SimChannel ch_;
  std::vector<TruncatedNormal> phases_;
  TruncatedNormal penalty_;
};

// Elapsed time of one ME-to-SIM transfer session.
double transfer_session(const SimChannel& ch, RngStream& rng);
// Same, for a session of an explicit packet count.
double transfer_session(const SimChannel& ch, int packets, RngStream& rng);

// All SIM interactions of the authentication step.
ChannelBreakdown auth_channel_elapsed(const SimChannel& ch, RngStream& rng);

// SIM traffic that remote channels carry while sending AttachComplete.
double attach_complete_elapsed(const SimChannel& ch, RngStream& rng);

// Two round trips are unavoidable for a remote SIM: 2 x median RTT.
// Throws ConfigError for CoupledSerial.
double min_transfer_floor(const SimChannel& ch);

// Distribution added to transfer_total when the control server is online;
// zero when disabled.
LatencyMoments online_server_penalty(const OnlineServerPenalty& p);
inline LatencyMoments online_server_penalty(bool enabled) {
  return online_server_penalty(OnlineServerPenalty{enabled});
}

// Analytic first and second moments of auth_channel_elapsed, excluding the
// online-server penalty.
struct ChannelMoments {
  double transfer_mean = 0.0;
  double transfer_var = 0.0;
  double processing_mean = 0.0;
  double processing_var = 0.0;
  double mean() const { return transfer_mean + processing_mean; }
  double var() const { return transfer_var + processing_var; }
};
ChannelMoments channel_moments(const SimChannel& ch);
LatencyMoments attach_complete_moments(const SimChannel& ch);

SimChannel scale_processing(SimChannel ch, double factor);

// Binding of a channel to a target authentication latency (mean, std).
//
// With `scale_to_target`, processing phases are scaled so the channel alone
// reproduces the target mean and the residual is zero-mean jitter carrying the
// remaining variance. Otherwise the channel is used as is and the residual
// carries whatever mean and variance the channel does not.
struct AuthCalibration {
  SimChannel channel;
  double processing_scale = 1.0;
  LatencyMoments residual{};
};
AuthCalibration calibrate_auth(const SimChannel& ch, LatencyMoments target, bool scale_to_target);

class ChannelCatalog {
public:
  void add(SimChannel ch);
  bool contains(std::string_view name) const;
  const SimChannel& get(std::string_view name) const;  // throws ConfigError
  std::vector<std::string> names() const;

private:
  std::map<std::string, SimChannel, std::less<>> channels_;
};

// LAN round-trip model of the testbed relay: mean session time 4.7 ms.
RttDistribution lan_rtt();

ChannelCatalog builtin_channels();

// Path of the bundled 1000-sample Internet RTT fixture (median 57.4 ms).
std::filesystem::path default_rtt_fixture_path();

}  // namespace attachsim
