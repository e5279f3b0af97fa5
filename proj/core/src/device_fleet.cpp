#include "attachsim/device_fleet.hpp"

#include <algorithm>
#include <cmath>

#include "attachsim/errors.hpp"

namespace attachsim {

std::string_view to_string(DeviceClass c) {
  switch (c) {
    case DeviceClass::Phone: return "Phone";
    case DeviceClass::SimboxLocal: return "SimboxLocal";
    case DeviceClass::SimboxRemote: return "SimboxRemote";
  }
  return "Phone";
}

DeviceClass parse_device_class(std::string_view s) {
  if (s == "Phone") return DeviceClass::Phone;
  if (s == "SimboxLocal") return DeviceClass::SimboxLocal;
  if (s == "SimboxRemote") return DeviceClass::SimboxRemote;
  throw ConfigError("unknown device class '" + std::string(s) + "'");
}

LatencyMoments DeviceProfile::step(AttachStep s) const {
  const auto& m = step_latency[static_cast<std::size_t>(index_of(s))];
  if (!m) {
    throw ConfigError("profile '" + model_name + "' has no latency for " + std::string(to_string(s)));
  }
  return *m;
}

double DeviceProfile::mean_total() const {
  double total = 0.0;
  for (AttachStep s : kAllSteps) {
    if (performs(s)) total += step(s).mean_ms;
  }
  return total;
}

void validate_profile(const DeviceProfile& p) {
  if (p.model_name.empty()) throw ConfigError("profile without model_name");
  for (AttachStep s : kAllSteps) {
    if (!p.performs(s)) continue;
    const auto& m = p.step_latency[static_cast<std::size_t>(index_of(s))];
    if (!m) {
      throw ConfigError("profile '" + p.model_name + "' enables " + std::string(to_string(s)) +
                        " but gives no latency for it");
    }
    if (!(m->mean_ms >= 0.0) || !(m->std_ms >= 0.0)) {
      throw ConfigError("profile '" + p.model_name + "' has a negative latency moment");
    }
  }
  if (!(p.sensitivity_rsrp >= -130.0 && p.sensitivity_rsrp <= -60.0)) {
    throw ConfigError("profile '" + p.model_name + "' sensitivity must be within [-130, -60] dBm");
  }
}

std::string_view to_string(RadioLabel l) {
  switch (l) {
    case RadioLabel::Excellent: return "Excellent";
    case RadioLabel::Medium: return "Medium";
    case RadioLabel::Poor: return "Poor";
    case RadioLabel::CellEdge: return "CellEdge";
  }
  return "Excellent";
}

RadioLabel RadioEnvironment::label() const {
  if (rsrp > -80.0) return RadioLabel::Excellent;
  if (rsrp > -95.0) return RadioLabel::Medium;
  if (rsrp > -110.0) return RadioLabel::Poor;
  return RadioLabel::CellEdge;
}

void validate_environment(const RadioEnvironment& env) {
  if (!(env.rsrp >= -130.0 && env.rsrp <= -40.0)) {
    throw ConfigError("rsrp must be within [-130, -40] dBm");
  }
}

CampDecision attempt_camp(const DeviceProfile& profile, const RadioEnvironment& env) {
  return env.rsrp < profile.sensitivity_rsrp ? CampDecision::CampRefused : CampDecision::Proceed;
}

double transmission_latency(const RadioEnvironment& env, RngStream& rng,
                            const TransmissionModel& model) {
  validate_environment(env);
  // Always three draws, whatever the outlier probability.
  const double body = Lognormal{model.median_ms, model.sigma_ln}.sample(rng);
  const bool outlier = rng.uniform() < model.outlier_prob;
  const double magnitude = rng.uniform(model.outlier_min_ms, model.outlier_max_ms);
  return outlier ? std::max(body, magnitude) : body;
}

void ProfileCatalog::add(DeviceProfile p) {
  validate_profile(p);
  const auto it = std::find_if(profiles_.begin(), profiles_.end(),
                               [&](const DeviceProfile& q) { return q.model_name == p.model_name; });
  if (it != profiles_.end()) {
    *it = std::move(p);
  } else {
    profiles_.push_back(std::move(p));
  }
}

bool ProfileCatalog::contains(std::string_view name) const {
  return std::any_of(profiles_.begin(), profiles_.end(),
                     [&](const DeviceProfile& p) { return p.model_name == name; });
}

const DeviceProfile& ProfileCatalog::get(std::string_view name) const {
  for (const auto& p : profiles_) {
    if (p.model_name == name) return p;
  }
  throw ConfigError("unknown device profile '" + std::string(name) + "'");
}

std::vector<const DeviceProfile*> ProfileCatalog::of_class(DeviceClass c) const {
  std::vector<const DeviceProfile*> out;
  for (const auto& p : profiles_) {
    if (p.device_class == c) out.push_back(&p);
  }
  return out;
}

namespace {

using Cell = std::optional<LatencyMoments>;

constexpr std::size_t kColumns = 13;

struct Column {
  const char* name;
  DeviceClass cls;
  const char* channel;
  double sensitivity;
};

// Column order of the measurement table.
constexpr std::array<Column, kColumns> kColumnsMeta = {{
    {"FairPhone5G", DeviceClass::Phone, "coupled_serial", -85.0},
    {"GalaxyA90", DeviceClass::Phone, "coupled_serial", -85.0},
    {"GalaxyNote4", DeviceClass::Phone, "coupled_serial", -120.0},
    {"GalaxyS3", DeviceClass::Phone, "coupled_serial", -120.0},
    {"GalaxyZFold5G", DeviceClass::Phone, "coupled_serial", -120.0},
    {"OnePlusNord", DeviceClass::Phone, "coupled_serial", -85.0},
    {"SonyXperia", DeviceClass::Phone, "coupled_serial", -85.0},
    {"Xiaomi10Lite5G", DeviceClass::Phone, "coupled_serial", -85.0},
    {"Xiaomi9Pro5G", DeviceClass::Phone, "coupled_serial", -85.0},
    {"SMBHyb_loc", DeviceClass::SimboxLocal, "coupled_serial", -110.0},
    {"SMBHyb_rem", DeviceClass::SimboxRemote, "hybertone_tcp", -110.0},
    {"SMBPor_loc", DeviceClass::SimboxLocal, "coupled_serial", -110.0},
    {"SMBPor_rem", DeviceClass::SimboxRemote, "portech_udp", -110.0},
}};

constexpr Cell c(double mean, double sd) { return LatencyMoments{mean, sd}; }
constexpr Cell kNone = std::nullopt;

// Rows are attach steps 0..10, then the reported total. Values in ms.
const std::array<std::array<Cell, kColumns>, kStepCount + 1> kTable = {{
    // 0 AttachRequest
    {c(0, 0), c(0, 0), c(0, 0), c(0, 0), c(0, 0), c(0, 0), c(0, 0), c(0, 0), c(0, 0), c(0, 0),
     c(0, 0), c(0, 0), c(0, 0)},
    // 1 IdentityRequest
    {c(1, 0), c(1, 0), c(1, 0), c(0.9, 0.3), c(1, 0), c(1, 0), c(1, 0), c(1, 0), c(1, 0),
     c(1, 0), c(0.9, 0.2), kNone, kNone},
    // 2 IdentityResponse
    {c(31, 0), c(27, 6), c(38.3, 2.3), c(31.0, 10.4), c(31, 0), c(31.8, 2.4), c(25.0, 6.4),
     c(31, 0), c(31, 0), c(31.8, 3.5), c(31.0, 4.3), kNone, kNone},
    // 3 AuthenticationRequest
    {c(1, 0), c(1, 0), c(1.0, 0.3), c(1, 0), c(1, 0), c(1, 0), c(1, 0), c(1, 0), c(1, 0),
     c(1, 0), c(0.9, 0.3), c(0.9, 0.1), c(1, 0)},
    // 4 AuthenticationResponse
    {c(57.6, 11.4), c(74.1, 22.1), c(84.5, 36.5), c(67.9, 12.2), c(70.2, 18.2), c(69.8, 10.0),
     c(69.1, 5.9), c(69.9, 8.2), c(67.9, 16.2), c(71.7, 10.8), c(2122.7, 309.9), c(71.2, 10.7),
     c(1640.2, 286.7)},
    // 5 SecurityModeCommand
    {c(1, 0), c(1, 0), c(1, 0), c(1, 0.1), c(1, 0.1), c(1, 0), c(1, 0), c(1, 0), c(1, 0),
     c(1, 0), c(0.9, 0.3), c(1, 0), c(1, 0)},
    // 6 SecurityModeComplete
    {c(20.5, 3.2), c(19.3, 1.6), c(37.0, 6.3), c(33.0, 9.5), c(21.8, 14.3), c(31.3, 12.5),
     c(19.6, 2.6), c(21.9, 4.6), c(21.8, 10.5), c(22.4, 5.9), c(20.1, 3.7), c(19.7, 2.7),
     c(21.1, 5.8)},
    // 7 EsmInfoRequest
    {c(1, 0), c(1, 0), c(0.9, 0.2), kNone, c(1, 0), c(1, 0), c(1, 0), c(1, 0), c(0.9, 0.1),
     c(1, 0), c(1.0, 0), kNone, kNone},
    // 8 EsmInfoResponse
    {c(19, 0), c(19.7, 2.6), c(37.3, 5.5), kNone, c(22.8, 21.4), c(26.2, 9.3), c(19.6, 2.3),
     c(22.6, 5.6), c(20.7, 4.2), c(22.9, 5.8), c(20.6, 3.9), kNone, kNone},
    // 9 AttachAccept
    {c(50.4, 4.8), c(48.7, 2.5), c(66.2, 6.8), c(56.9, 8.7), c(50.0, 4.4), c(66.5, 14.3),
     c(50.9, 5.9), c(48.8, 3.9), c(49.3, 4.3), c(46.9, 10.3), c(43.7, 9.3), c(50.7, 6.8),
     c(57.9, 26.1)},
    // 10 AttachComplete
    {c(32.4, 1.9), c(32.8, 3.4), c(49.7, 7.1), c(60.1, 1.1), c(34.3, 6.0), c(35.5, 8.2),
     c(54.5, 6.4), c(38.8, 3.9), c(33.5, 4.1), c(57.3, 10.1), c(53.2, 9.5), c(78.5, 6.8),
     c(52.2, 4.7)},
    // Total
    {c(215.0, 21.3), c(225.6, 38.2), c(316.8, 65.5), c(251.9, 42.4), c(234.2, 64.6),
     c(265.1, 56.9), c(242.8, 29.5), c(237.1, 33.5), c(228.2, 38.5), c(257.1, 42.7),
     c(2295.5, 341.7), c(253.9, 31.3), c(1773.5, 323.3)},
}};

ProfileCatalog make_builtin() {
  ProfileCatalog cat;
  for (std::size_t col = 0; col < kColumns; ++col) {
    const Column& meta = kColumnsMeta[col];
    DeviceProfile p;
    p.model_name = meta.name;
    p.device_class = meta.cls;
    p.channel = meta.channel;
    p.sensitivity_rsrp = meta.sensitivity;
    for (std::size_t row = 0; row < kStepCount; ++row) p.step_latency[row] = kTable[row][col];
    p.optional_steps.identity = p.step_latency[index_of(AttachStep::IdentityRequest)].has_value();
    p.optional_steps.esm_info = p.step_latency[index_of(AttachStep::EsmInfoRequest)].has_value();
    p.reported_total = kTable[kStepCount][col];
    cat.add(std::move(p));
  }
  return cat;
}

}  // namespace

const ProfileCatalog& builtin_profiles() {
  static const ProfileCatalog catalog = make_builtin();
  return catalog;
}

}  // namespace attachsim
