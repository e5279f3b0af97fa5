#include "attachsim/sim_channel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "attachsim/checksum.hpp"
#include "attachsim/errors.hpp"

#ifndef ATTACHSIM_DATA_DIR
#define ATTACHSIM_DATA_DIR "."
#endif

namespace attachsim {

namespace {

constexpr double kProcessingFloorMs = 1.0;

// Per-session multiplier on the sampled RTT. TCP carries a request leg, a
// response leg and half an RTT per acknowledgement packet; UDP pays one RTT
// per packet.
double rtt_multiplier(ChannelKind kind, int packets) {
  if (kind == ChannelKind::RemoteTcp) return 2.0 + 0.5 * std::max(0, packets - 2);
  return static_cast<double>(packets);
}

// Waiting time of one UDP packet until delivery. Each attempt is lost with
// probability p; the k-th loss costs timeout * min(factor^k, cap).
double udp_retransmission_delay(const SimChannel& ch, RngStream& rng) {
  double delay = 0.0;
  double backoff = 1.0;
  while (ch.loss_prob > 0.0 && rng.bernoulli(ch.loss_prob)) {
    delay += ch.retransmit_timeout_ms * backoff;
    backoff = std::min(backoff * ch.backoff_factor, ch.backoff_cap);
  }
  return delay;
}

// Mean and variance of udp_retransmission_delay by summing the geometric series.
LatencyMoments udp_retransmission_moments(const SimChannel& ch) {
  const double p = ch.loss_prob;
  if (p <= 0.0) return {};
  double mean = 0.0;
  double second = 0.0;
  double g = 0.0;          // delay accumulated after k losses
  double backoff = 1.0;
  double pk = 1.0;         // p^k
  for (int k = 0; k < 100000 && pk > 1e-300; ++k) {
    const double prob = pk * (1.0 - p);
    mean += prob * g;
    second += prob * g * g;
    g += ch.retransmit_timeout_ms * backoff;
    backoff = std::min(backoff * ch.backoff_factor, ch.backoff_cap);
    pk *= p;
  }
  return {mean, std::sqrt(std::max(0.0, second - mean * mean))};
}

}  // namespace

std::string_view to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::CoupledSerial: return "CoupledSerial";
    case ChannelKind::RemoteTcp: return "RemoteTcp";
    case ChannelKind::RemoteUdp: return "RemoteUdp";
  }
  return "CoupledSerial";
}

std::string_view to_string(ProcessingSite s) {
  switch (s) {
    case ProcessingSite::SimBank: return "SimBank";
    case ProcessingSite::Gateway: return "Gateway";
    case ProcessingSite::SimCard: return "SimCard";
    case ProcessingSite::Me: return "Me";
  }
  return "SimCard";
}

ChannelKind parse_channel_kind(std::string_view s) {
  if (s == "CoupledSerial") return ChannelKind::CoupledSerial;
  if (s == "RemoteTcp") return ChannelKind::RemoteTcp;
  if (s == "RemoteUdp") return ChannelKind::RemoteUdp;
  throw ConfigError("unknown channel kind '" + std::string(s) + "'");
}

ProcessingSite parse_processing_site(std::string_view s) {
  if (s == "SimBank") return ProcessingSite::SimBank;
  if (s == "Gateway") return ProcessingSite::Gateway;
  if (s == "SimCard") return ProcessingSite::SimCard;
  if (s == "Me") return ProcessingSite::Me;
  throw ConfigError("unknown processing site '" + std::string(s) + "'");
}

// --- RttDistribution --------------------------------------------------------

RttDistribution RttDistribution::constant(double ms) {
  if (!(ms >= 0.0)) throw ConfigError("constant RTT must be >= 0");
  RttDistribution d;
  d.kind_ = Kind::Constant;
  d.constant_ = ms;
  return d;
}

RttDistribution RttDistribution::lognormal(Lognormal ln) {
  if (!(ln.median_ms > 0.0) || !(ln.sigma_ln >= 0.0)) {
    throw ConfigError("lognormal RTT needs median > 0 and sigma >= 0");
  }
  RttDistribution d;
  d.kind_ = Kind::Lognormal;
  d.ln_ = ln;
  return d;
}

RttDistribution RttDistribution::empirical(std::vector<double> samples_ms, std::uint64_t checksum,
                                           std::string source) {
  if (samples_ms.empty()) throw ConfigError("empirical RTT needs at least one sample");
  for (double v : samples_ms) {
    if (!(v >= 0.0)) throw ConfigError("empirical RTT samples must be >= 0");
  }
  std::sort(samples_ms.begin(), samples_ms.end());
  RttDistribution d;
  d.kind_ = Kind::Empirical;
  d.sorted_ = std::move(samples_ms);
  d.checksum_ = checksum;
  d.source_ = std::move(source);
  return d;
}

RttDistribution RttDistribution::load_empirical(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open RTT fixture " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::vector<double> values;
  std::istringstream lines(bytes);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(line, &used);
    } catch (const std::exception&) {
      throw ParseError(lineno, "not a decimal RTT value");
    }
    if (line.find_first_not_of(" \t", used) != std::string::npos) {
      throw ParseError(lineno, "trailing characters after RTT value");
    }
    if (v < 0.0) throw ParseError(lineno, "negative RTT");
    values.push_back(v);
  }
  return empirical(std::move(values), fnv1a64(bytes), path.string());
}

double RttDistribution::sample(RngStream& rng) const {
  switch (kind_) {
    case Kind::Constant:
      return constant_;
    case Kind::Lognormal:
      return ln_.sample(rng);
    case Kind::Empirical: {
      const auto n = static_cast<std::uint64_t>(sorted_.size());
      return sorted_[static_cast<std::size_t>(rng.next_u64() % n)];
    }
  }
  return 0.0;
}

double RttDistribution::median() const {
  switch (kind_) {
    case Kind::Constant:
      return constant_;
    case Kind::Lognormal:
      return ln_.median_ms;
    case Kind::Empirical: {
      const std::size_t n = sorted_.size();
      return n % 2 == 1 ? sorted_[n / 2] : 0.5 * (sorted_[n / 2 - 1] + sorted_[n / 2]);
    }
  }
  return 0.0;
}

double RttDistribution::mean() const {
  switch (kind_) {
    case Kind::Constant:
      return constant_;
    case Kind::Lognormal:
      return ln_.mean();
    case Kind::Empirical: {
      double s = 0.0;
      for (double v : sorted_) s += v;
      return s / static_cast<double>(sorted_.size());
    }
  }
  return 0.0;
}

double RttDistribution::variance() const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::Lognormal:
      return ln_.variance();
    case Kind::Empirical: {
      const double m = mean();
      double s = 0.0;
      for (double v : sorted_) s += (v - m) * (v - m);
      return s / static_cast<double>(sorted_.size());
    }
  }
  return 0.0;
}

// --- channel operations -----------------------------------------------------

void validate_channel(const SimChannel& ch) {
  const auto fail = [&](const std::string& what) {
    throw ConfigError("channel '" + ch.name + "': " + what);
  };
  switch (ch.kind) {
    case ChannelKind::CoupledSerial:
    case ChannelKind::RemoteTcp:
    case ChannelKind::RemoteUdp:
      break;
    default:
      fail("unknown channel kind");
  }
  if (ch.sessions_auth < 0) fail("sessions_auth must be >= 0");
  if (ch.packets_per_session < 1) fail("packets_per_session must be >= 1");
  if (ch.extra_attach_complete_packets < 0) fail("extra_attach_complete_packets must be >= 0");
  if (!(ch.loss_prob >= 0.0 && ch.loss_prob < 1.0)) fail("loss_prob must be in [0, 1)");
  if (ch.loss_prob > 0.0 && ch.kind != ChannelKind::RemoteUdp) fail("loss_prob applies to RemoteUdp only");
  if (!(ch.retransmit_timeout_ms >= 0.0)) fail("retransmit_timeout must be >= 0");
  if (!(ch.backoff_factor >= 1.0) || !(ch.backoff_cap >= 1.0)) fail("backoff factor and cap must be >= 1");
  if (!(ch.serial_transfer.std_ms >= 0.0)) fail("serial transfer std must be >= 0");
  for (const auto& ph : ch.processing_phases) {
    if (!(ph.mean_ms >= 0.0) || !(ph.std_ms >= 0.0)) fail("processing phase moments must be >= 0");
  }
  if (!(ch.online_server.mean_ms >= 0.0) || !(ch.online_server.std_ms >= 0.0)) {
    fail("online server penalty moments must be >= 0");
  }
}

double transfer_session(const SimChannel& ch, int packets, RngStream& rng) {
  switch (ch.kind) {
    case ChannelKind::CoupledSerial:
      return std::max(0.0, rng.normal(ch.serial_transfer.mean_ms, ch.serial_transfer.std_ms));
    case ChannelKind::RemoteTcp:
      return rtt_multiplier(ch.kind, packets) * ch.rtt.sample(rng);
    case ChannelKind::RemoteUdp: {
      const double rtt = ch.rtt.sample(rng);
      // Loss draws use one substream per packet, so raising loss_prob can only
      // add retransmissions to a given seed's path.
      const std::uint64_t key = rng.next_u64();
      double elapsed = rtt_multiplier(ch.kind, packets) * rtt;
      for (int j = 0; j < packets; ++j) {
        RngStream loss(mix_seed(key, static_cast<std::uint64_t>(j)));
        elapsed += udp_retransmission_delay(ch, loss);
      }
      return elapsed;
    }
  }
  return 0.0;
}

double transfer_session(const SimChannel& ch, RngStream& rng) {
  return transfer_session(ch, ch.packets_per_session, rng);
}

ChannelSampler::ChannelSampler(SimChannel ch)
    : ch_(std::move(ch)),
      penalty_({ch_.online_server.mean_ms, ch_.online_server.std_ms}, 0.0) {
  validate_channel(ch_);
  phases_.reserve(ch_.processing_phases.size());
  for (const auto& ph : ch_.processing_phases) {
    phases_.emplace_back(LatencyMoments{ph.mean_ms, ph.std_ms}, kProcessingFloorMs);
  }
}

ChannelBreakdown ChannelSampler::auth_elapsed(RngStream& rng) const {
  ChannelBreakdown b;
  for (int s = 0; s < ch_.sessions_auth; ++s) b.transfer_total_ms += transfer_session(ch_, rng);
  if (ch_.remote() && ch_.online_server.enabled) b.transfer_total_ms += penalty_.sample(rng);
  for (const auto& tn : phases_) b.processing_total_ms += tn.sample(rng);
  return b;
}

double ChannelSampler::attach_complete(RngStream& rng) const {
  if (!ch_.remote() || ch_.extra_attach_complete_packets == 0) return 0.0;
  return transfer_session(ch_, ch_.extra_attach_complete_packets, rng);
}

ChannelBreakdown auth_channel_elapsed(const SimChannel& ch, RngStream& rng) {
  return ChannelSampler(ch).auth_elapsed(rng);
}

double attach_complete_elapsed(const SimChannel& ch, RngStream& rng) {
  return ChannelSampler(ch).attach_complete(rng);
}

double min_transfer_floor(const SimChannel& ch) {
  if (!ch.remote()) throw ConfigError("min_transfer_floor is defined for remote channels only");
  return 2.0 * ch.rtt.median();
}

LatencyMoments online_server_penalty(const OnlineServerPenalty& p) {
  if (!p.enabled) return {};
  return {p.mean_ms, p.std_ms};
}

namespace {

LatencyMoments session_moments(const SimChannel& ch, int packets) {
  switch (ch.kind) {
    case ChannelKind::CoupledSerial:
      return clamped_normal_moments(ch.serial_transfer.mean_ms, ch.serial_transfer.std_ms);
    case ChannelKind::RemoteTcp: {
      const double f = rtt_multiplier(ch.kind, packets);
      return {f * ch.rtt.mean(), f * std::sqrt(ch.rtt.variance())};
    }
    case ChannelKind::RemoteUdp: {
      const double f = rtt_multiplier(ch.kind, packets);
      const auto r = udp_retransmission_moments(ch);
      const double mean = f * ch.rtt.mean() + packets * r.mean_ms;
      const double var = f * f * ch.rtt.variance() + packets * r.std_ms * r.std_ms;
      return {mean, std::sqrt(var)};
    }
  }
  return {};
}

}  // namespace

ChannelMoments channel_moments(const SimChannel& ch) {
  ChannelMoments m;
  const auto s = session_moments(ch, ch.packets_per_session);
  m.transfer_mean = ch.sessions_auth * s.mean_ms;
  m.transfer_var = ch.sessions_auth * s.std_ms * s.std_ms;
  for (const auto& ph : ch.processing_phases) {
    const TruncatedNormal tn({ph.mean_ms, ph.std_ms}, kProcessingFloorMs);
    m.processing_mean += tn.mean();
    m.processing_var += tn.stddev() * tn.stddev();
  }
  return m;
}

LatencyMoments attach_complete_moments(const SimChannel& ch) {
  if (!ch.remote() || ch.extra_attach_complete_packets == 0) return {};
  return session_moments(ch, ch.extra_attach_complete_packets);
}

SimChannel scale_processing(SimChannel ch, double factor) {
  for (auto& ph : ch.processing_phases) {
    ph.mean_ms *= factor;
    ph.std_ms *= factor;
  }
  return ch;
}

AuthCalibration calibrate_auth(const SimChannel& ch, LatencyMoments target, bool scale_to_target) {
  validate_channel(ch);
  const ChannelMoments m = channel_moments(ch);
  AuthCalibration cal{ch, 1.0, {}};

  if (scale_to_target && m.processing_mean > 0.0) {
    const double scale = (target.mean_ms - m.transfer_mean) / m.processing_mean;
    if (!(scale > 0.0)) {
      throw ConfigError("channel '" + ch.name + "' transfers alone exceed the target auth latency");
    }
    cal.channel = scale_processing(ch, scale);
    cal.processing_scale = scale;
  }
  const ChannelMoments scaled = channel_moments(cal.channel);
  cal.residual.mean_ms = target.mean_ms - scaled.mean();
  if (std::abs(cal.residual.mean_ms) < 1e-9) cal.residual.mean_ms = 0.0;
  cal.residual.std_ms =
      std::sqrt(std::max(0.0, target.std_ms * target.std_ms - scaled.var()));
  return cal;
}

// --- catalog ------------------------------------------------------------------

void ChannelCatalog::add(SimChannel ch) {
  validate_channel(ch);
  channels_[ch.name] = std::move(ch);
}

bool ChannelCatalog::contains(std::string_view name) const { return channels_.contains(name); }

const SimChannel& ChannelCatalog::get(std::string_view name) const {
  const auto it = channels_.find(name);
  if (it == channels_.end()) throw ConfigError("unknown SIM channel '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> ChannelCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : channels_) out.push_back(name);
  return out;
}

RttDistribution lan_rtt() {
  // 15 TCP sessions of three RTTs each average 4.7 +- 9.2 ms on the testbed LAN.
  return RttDistribution::lognormal(Lognormal::from_mean_cv(4.7 / 3.0, 9.2 / 4.7));
}

namespace {

std::vector<ProcessingPhase> phases(ProcessingSite site, int count, double total_ms, double std_ms) {
  return std::vector<ProcessingPhase>(static_cast<std::size_t>(count),
                                      ProcessingPhase{site, total_ms / count, std_ms});
}

template <typename... Vs>
std::vector<ProcessingPhase> concat(Vs... parts) {
  std::vector<ProcessingPhase> out;
  (out.insert(out.end(), parts.begin(), parts.end()), ...);
  return out;
}

}  // namespace

ChannelCatalog builtin_channels() {
  ChannelCatalog cat;

  SimChannel coupled;
  coupled.name = "coupled_serial";
  coupled.kind = ChannelKind::CoupledSerial;
  coupled.sessions_auth = 4;
  cat.add(coupled);

  // Softphone with a card reader: SIM and ME processing visible separately.
  SimChannel softphone = coupled;
  softphone.name = "srsue_softphone";
  softphone.processing_phases = concat(phases(ProcessingSite::SimCard, 2, 31.1, 14.5),
                                       phases(ProcessingSite::Me, 3, 28.1, 10.8));
  cat.add(softphone);

  SimChannel tcp;
  tcp.name = "hybertone_tcp";
  tcp.kind = ChannelKind::RemoteTcp;
  tcp.rtt = lan_rtt();
  tcp.sessions_auth = 15;
  tcp.packets_per_session = 4;
  tcp.extra_attach_complete_packets = 4;
  tcp.processing_phases = concat(phases(ProcessingSite::SimBank, 8, 1744.3, 8.0),
                                 phases(ProcessingSite::Gateway, 6, 1265.8, 6.0));
  cat.add(tcp);

  SimChannel udp;
  udp.name = "hybertone_udp";
  udp.kind = ChannelKind::RemoteUdp;
  udp.rtt = lan_rtt();
  udp.loss_prob = 0.01;
  udp.retransmit_timeout_ms = 100.0;
  udp.sessions_auth = 18;
  udp.packets_per_session = 2;
  udp.extra_attach_complete_packets = 2;
  udp.processing_phases = concat(phases(ProcessingSite::SimBank, 6, 1416.4, 116.3),
                                 phases(ProcessingSite::Gateway, 6, 835.9, 73.6));
  cat.add(udp);

  // Portech relays the whole exchange in one session, with long processing
  // before and after the transfer.
  SimChannel portech = udp;
  portech.name = "portech_udp";
  portech.sessions_auth = 1;
  portech.extra_attach_complete_packets = 0;
  portech.processing_phases = {ProcessingPhase{ProcessingSite::Gateway, 774.4, 0.0},
                               ProcessingPhase{ProcessingSite::SimBank, 420.4, 0.0}};
  cat.add(portech);

  // Best case for a fraudster: one request/response over a 57.4 ms median
  // Internet path and no processing overhead at all.
  SimChannel optimized;
  optimized.name = "optimized_remote";
  optimized.kind = ChannelKind::RemoteUdp;
  optimized.rtt = RttDistribution::constant(57.4);
  optimized.sessions_auth = 1;
  optimized.packets_per_session = 2;
  cat.add(optimized);

  return cat;
}

std::filesystem::path default_rtt_fixture_path() {
  return std::filesystem::path(ATTACHSIM_DATA_DIR) / "rtt_internet_1000.txt";
}

}  // namespace attachsim
