#include "attachsim/scenario_config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attachsim/errors.hpp"

namespace attachsim {

using nlohmann::json;

namespace {

// Walks a JSON object, remembering its location for error messages.
class Node {
public:
  Node(const json& j, std::string where) : j_(j), where_(std::move(where)) {}

  const std::string& where() const { return where_; }
  const json& raw() const { return j_; }

  void require_object() const {
    if (!j_.is_object()) fail("expected an object");
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    require_object();
    for (const auto& [k, v] : j_.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw ConfigError(fmt::format("{}: unknown key '{}'", where_, k));
      }
    }
  }

  bool has(std::string_view k) const { return j_.contains(std::string(k)); }

  Node at(std::string_view k) const {
    if (!has(k)) throw ConfigError(fmt::format("{}: missing key '{}'", where_, k));
    return Node(j_.at(std::string(k)), child(k));
  }

  std::string child(std::string_view k) const { return where_.empty() ? std::string(k) : where_ + "." + std::string(k); }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  std::int64_t integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_unsigned()) fail("expected a non-negative integer");
    return j_.get<std::uint64_t>();
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  double number(std::string_view k, double dflt) const { return has(k) ? at(k).number() : dflt; }
  bool boolean(std::string_view k, bool dflt) const { return has(k) ? at(k).boolean() : dflt; }

  [[noreturn]] void fail(std::string_view msg) const { throw ConfigError(fmt::format("{}: {}", where_, msg)); }

private:
  const json& j_;
  std::string where_;
};

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}: invalid JSON: {}", what, e.what()));
  }
}

void check_schema(const Node& root, std::string_view expected) {
  const std::string s = root.at("schema").string();
  if (s != expected) root.fail(fmt::format("unsupported schema '{}' (expected '{}')", s, expected));
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

LatencyMoments moments(const Node& n) {
  const json& j = n.raw();
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    n.fail("expected [mean_ms, std_ms]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

int count(const Node& n, int min) {
  const auto v = n.integer();
  if (v < min || v > 1'000'000) n.fail(fmt::format("must be between {} and 1000000", min));
  return static_cast<int>(v);
}

RttDistribution parse_rtt(const Node& n, const std::filesystem::path& base) {
  const std::string kind = n.at("kind").string();
  if (kind == "constant") {
    n.allow_only({"kind", "ms"});
    return RttDistribution::constant(n.at("ms").number());
  }
  if (kind == "lognormal") {
    n.allow_only({"kind", "median_ms", "sigma_ln"});
    return RttDistribution::lognormal(Lognormal{n.at("median_ms").number(), n.at("sigma_ln").number()});
  }
  if (kind == "lan") {
    n.allow_only({"kind"});
    return lan_rtt();
  }
  if (kind == "empirical") {
    n.allow_only({"kind", "file"});
    const std::string f = n.has("file") ? n.at("file").string() : std::string("builtin");
    return RttDistribution::load_empirical(f == "builtin" ? default_rtt_fixture_path() : resolve(base, f));
  }
  n.at("kind").fail("expected constant, lognormal, lan or empirical");
}

SimChannel parse_channel(const Node& n, const ChannelCatalog& known, const std::filesystem::path& base) {
  n.allow_only({"name", "base", "kind", "rtt", "loss_prob", "retransmit_timeout_ms", "backoff_factor",
                "backoff_cap", "sessions_auth", "packets_per_session", "extra_attach_complete_packets",
                "serial_transfer", "processing", "online_server"});
  SimChannel ch;
  if (n.has("base")) ch = known.get(n.at("base").string());
  ch.name = n.at("name").string();
  if (n.has("kind")) ch.kind = parse_channel_kind(n.at("kind").string());
  if (n.has("rtt")) ch.rtt = parse_rtt(n.at("rtt"), base);
  ch.loss_prob = n.number("loss_prob", ch.loss_prob);
  ch.retransmit_timeout_ms = n.number("retransmit_timeout_ms", ch.retransmit_timeout_ms);
  ch.backoff_factor = n.number("backoff_factor", ch.backoff_factor);
  ch.backoff_cap = n.number("backoff_cap", ch.backoff_cap);
  if (n.has("sessions_auth")) ch.sessions_auth = count(n.at("sessions_auth"), 0);
  if (n.has("packets_per_session")) ch.packets_per_session = count(n.at("packets_per_session"), 1);
  if (n.has("extra_attach_complete_packets")) {
    ch.extra_attach_complete_packets = count(n.at("extra_attach_complete_packets"), 0);
  }
  if (n.has("serial_transfer")) ch.serial_transfer = moments(n.at("serial_transfer"));
  if (n.has("processing")) {
    const Node list = n.at("processing");
    if (!list.raw().is_array()) list.fail("expected an array");
    ch.processing_phases.clear();
    for (std::size_t i = 0; i < list.raw().size(); ++i) {
      const Node p(list.raw()[i], fmt::format("{}[{}]", list.where(), i));
      p.allow_only({"site", "mean_ms", "std_ms"});
      ch.processing_phases.push_back(ProcessingPhase{parse_processing_site(p.at("site").string()),
                                                     p.at("mean_ms").number(), p.number("std_ms", 0.0)});
    }
  }
  if (n.has("online_server")) {
    const Node o = n.at("online_server");
    o.allow_only({"enabled", "mean_ms", "std_ms"});
    ch.online_server.enabled = o.boolean("enabled", true);
    ch.online_server.mean_ms = o.number("mean_ms", ch.online_server.mean_ms);
    ch.online_server.std_ms = o.number("std_ms", ch.online_server.std_ms);
  }
  try {
    validate_channel(ch);
  } catch (const ConfigError& e) {
    n.fail(e.what());
  }
  return ch;
}

DeviceProfile parse_inline_profile(const Node& n) {
  n.allow_only({"name", "base", "class", "channel", "sensitivity_rsrp", "auth_alg", "calibrate_auth", "steps",
                "total"});
  DeviceProfile p;
  if (n.has("base")) {
    p = builtin_profiles().get(n.at("base").string());
    p.reported_total.reset();
  }
  p.model_name = n.at("name").string();
  if (n.has("class")) p.device_class = parse_device_class(n.at("class").string());
  if (n.has("channel")) p.channel = n.at("channel").string();
  p.sensitivity_rsrp = n.number("sensitivity_rsrp", p.sensitivity_rsrp);
  if (n.has("auth_alg")) p.auth_alg = n.at("auth_alg").string();
  p.calibrate_auth = n.boolean("calibrate_auth", p.calibrate_auth);
  if (n.has("steps")) {
    const Node steps = n.at("steps");
    steps.require_object();
    for (const auto& [k, v] : steps.raw().items()) {
      const auto s = parse_step(k);
      if (!s) throw ConfigError(fmt::format("{}: unknown step '{}'", steps.where(), k));
      const Node cell(v, steps.child(k));
      auto& slot = p.step_latency[static_cast<std::size_t>(index_of(*s))];
      if (v.is_null()) {
        slot.reset();
      } else {
        slot = moments(cell);
      }
    }
  }
  if (n.has("total")) p.reported_total = moments(n.at("total"));
  p.optional_steps.identity = p.step_latency[index_of(AttachStep::IdentityRequest)].has_value();
  p.optional_steps.esm_info = p.step_latency[index_of(AttachStep::EsmInfoRequest)].has_value();
  try {
    validate_profile(p);
  } catch (const ConfigError& e) {
    n.fail(e.what());
  }
  return p;
}

RadioEnvironment parse_environment(const Node& n) {
  n.allow_only({"rsrp"});
  RadioEnvironment env{n.at("rsrp").number()};
  try {
    validate_environment(env);
  } catch (const ConfigError& e) {
    n.fail(e.what());
  }
  return env;
}

NetworkConfig parse_network(const Node& n) {
  n.allow_only({"auth_timer_ms", "outdoor_transmission", "transmission"});
  NetworkConfig net;
  if (n.has("auth_timer_ms")) net.auth_timer = Duration::from_ms(n.at("auth_timer_ms").number());
  net.outdoor_transmission = n.boolean("outdoor_transmission", net.outdoor_transmission);
  if (n.has("transmission")) {
    const Node t = n.at("transmission");
    t.allow_only({"median_ms", "sigma_ln", "outlier_prob", "outlier_min_ms", "outlier_max_ms"});
    auto& m = net.transmission;
    m.median_ms = t.number("median_ms", m.median_ms);
    m.sigma_ln = t.number("sigma_ln", m.sigma_ln);
    m.outlier_prob = t.number("outlier_prob", m.outlier_prob);
    m.outlier_min_ms = t.number("outlier_min_ms", m.outlier_min_ms);
    m.outlier_max_ms = t.number("outlier_max_ms", m.outlier_max_ms);
    if (!(m.median_ms > 0) || !(m.sigma_ln >= 0) || !(m.outlier_prob >= 0 && m.outlier_prob <= 1) ||
        !(m.outlier_min_ms <= m.outlier_max_ms)) {
      t.fail("transmission parameters out of range");
    }
  }
  try {
    network_auth_timer(net);
  } catch (const ConfigError& e) {
    n.fail(e.what());
  }
  return net;
}

DetectPolicy parse_policy_node(const Node& n, bool top_level) {
  if (top_level) {
    n.allow_only({"schema", "critical", "form", "window"});
    check_schema(n, kPolicySchema);
  } else {
    n.allow_only({"critical", "form", "window"});
  }
  DetectPolicy p;
  p.critical = n.number("critical", p.critical);
  if (!(p.critical > 0.0)) n.at("critical").fail("must be positive");
  if (n.has("form")) {
    try {
      p.form = parse_tform(n.at("form").string());
    } catch (const ConfigError& e) {
      n.at("form").fail(e.what());
    }
  }
  if (n.has("window")) {
    const Node w = n.at("window");
    w.allow_only({"begin_ms", "end_ms"});
    if (w.has("begin_ms")) p.window.begin = SimTime{} + Duration::from_ms(w.at("begin_ms").number());
    if (w.has("end_ms")) p.window.end = SimTime{} + Duration::from_ms(w.at("end_ms").number());
    if (!(p.window.begin < p.window.end)) w.fail("window is empty");
  }
  return p;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::size_t ScenarioConfig::device_count() const {
  std::size_t n = 0;
  for (const auto& e : fleet) n += static_cast<std::size_t>(e.count);
  return n;
}

std::string device_id(const FleetEntry& e, int i) {
  return fmt::format("{}-{:02d}", e.id_prefix.empty() ? e.profile.model_name : e.id_prefix, i + 1);
}

void validate_scenario(const ScenarioConfig& cfg) {
  if (cfg.fleet.empty()) throw ConfigError("fleet is empty");
  if (cfg.attaches_per_device < 1) throw ConfigError("attaches_per_device must be at least 1");
  if (cfg.attach_gap < Duration{}) throw ConfigError("attach_gap must be non-negative");
  validate_environment(cfg.environment);
  network_auth_timer(cfg.network);
  std::set<std::string> ids;
  std::set<std::string> prefixes;
  for (const auto& e : cfg.fleet) {
    if (e.count < 1) throw ConfigError("fleet entry '" + e.profile.model_name + "': count must be at least 1");
    validate_profile(e.profile);
    cfg.channels.get(e.profile.channel);
    if (e.environment) validate_environment(*e.environment);
    const std::string prefix = e.id_prefix.empty() ? e.profile.model_name : e.id_prefix;
    if (!prefixes.insert(prefix).second) {
      throw ConfigError("fleet entries share the device id prefix '" + prefix + "'; set id_prefix");
    }
  }
  if (cfg.reauth && cfg.reauth->count < 1) throw ConfigError("reauth.count must be at least 1");
}

ScenarioConfig parse_scenario_config(std::string_view text, const std::filesystem::path& base_dir) {
  const json j = parse_json(text, "scenario");
  const Node root(j, "scenario");
  root.allow_only({"schema", "seed", "attaches_per_device", "fleet", "environment", "network", "channels",
                   "detect", "reauth", "attach_gap_ms", "output", "threads"});
  check_schema(root, kScenarioSchema);

  ScenarioConfig cfg;
  cfg.seed = root.at("seed").unsigned_integer();
  if (root.has("attaches_per_device")) cfg.attaches_per_device = count(root.at("attaches_per_device"), 1);
  if (root.has("environment")) cfg.environment = parse_environment(root.at("environment"));
  if (root.has("network")) cfg.network = parse_network(root.at("network"));
  if (root.has("attach_gap_ms")) {
    const double g = root.at("attach_gap_ms").number();
    if (!(g >= 0.0)) root.at("attach_gap_ms").fail("must be non-negative");
    cfg.attach_gap = Duration::from_ms(g);
  }
  if (root.has("output")) cfg.output_dir = resolve(base_dir, root.at("output").string());
  if (root.has("threads")) cfg.threads = static_cast<unsigned>(count(root.at("threads"), 0));
  if (root.has("detect")) cfg.detect = parse_policy_node(root.at("detect"), false);
  if (root.has("reauth")) {
    const Node r = root.at("reauth");
    r.allow_only({"count", "min_spacing_ms"});
    cfg.reauth = ReauthPolicy{count(r.at("count"), 1), Duration::from_ms(r.number("min_spacing_ms", 0.0))};
  }
  if (root.has("channels")) {
    const Node list = root.at("channels");
    if (!list.raw().is_array()) list.fail("expected an array");
    for (std::size_t i = 0; i < list.raw().size(); ++i) {
      cfg.channels.add(parse_channel(Node(list.raw()[i], fmt::format("{}[{}]", list.where(), i)), cfg.channels,
                                     base_dir));
    }
  }

  const Node fleet = root.at("fleet");
  if (!fleet.raw().is_array() || fleet.raw().empty()) fleet.fail("expected a non-empty array");
  for (std::size_t i = 0; i < fleet.raw().size(); ++i) {
    const Node e(fleet.raw()[i], fmt::format("{}[{}]", fleet.where(), i));
    e.allow_only({"profile", "count", "channel", "rsrp", "id_prefix"});
    FleetEntry entry;
    const Node prof = e.at("profile");
    if (prof.raw().is_string()) {
      entry.profile = builtin_profiles().get(prof.string());
    } else {
      entry.profile = parse_inline_profile(prof);
    }
    entry.count = e.has("count") ? count(e.at("count"), 1) : 1;
    if (e.has("channel")) entry.profile.channel = e.at("channel").string();
    if (!cfg.channels.contains(entry.profile.channel)) {
      e.fail(fmt::format("unknown channel '{}'", entry.profile.channel));
    }
    if (e.has("rsrp")) {
      entry.environment = RadioEnvironment{e.at("rsrp").number()};
      try {
        validate_environment(*entry.environment);
      } catch (const ConfigError& err) {
        e.at("rsrp").fail(err.what());
      }
    }
    if (e.has("id_prefix")) entry.id_prefix = e.at("id_prefix").string();
    cfg.fleet.push_back(std::move(entry));
  }
  validate_scenario(cfg);
  return cfg;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  return parse_scenario_config(read_file(path), path.parent_path());
}

DetectPolicy parse_policy(std::string_view text) {
  const json j = parse_json(text, "policy");
  return parse_policy_node(Node(j, "policy"), true);
}

DetectPolicy load_policy(const std::filesystem::path& path) { return parse_policy(read_file(path)); }

}  // namespace attachsim
