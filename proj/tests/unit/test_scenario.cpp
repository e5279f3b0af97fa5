#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "attachsim/checksum.hpp"
#include "attachsim/errors.hpp"
#include "attachsim/log_io.hpp"
#include "attachsim/scenario.hpp"

using namespace attachsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("attachsim_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string small_config(std::uint64_t seed, const std::string& fleet, int attaches = 5) {
  std::ostringstream os;
  os << R"({"schema":"attachsim-scenario/1","seed":)" << seed << R"(,"attaches_per_device":)" << attaches
     << R"(,"fleet":)" << fleet << "}";
  return os.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, MinimalAndDefaults) {
  const auto cfg = parse_scenario_config(small_config(1, R"([{"profile":"FairPhone5G"}])"));
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_EQ(cfg.fleet.size(), 1u);
  EXPECT_EQ(cfg.fleet[0].count, 1);
  EXPECT_EQ(cfg.network.auth_timer.ms(), 6000.0);
  EXPECT_EQ(cfg.detect.form, TForm::Welch);
  const auto dflt = parse_scenario_config(R"({"schema":"attachsim-scenario/1","seed":3,"fleet":[{"profile":"GalaxyS3"}]})");
  EXPECT_EQ(dflt.attaches_per_device, 50);
}

TEST(Config, FailClosed) {
  const auto bad = [](const std::string& text, const std::string& needle) {
    try {
      parse_scenario_config(text);
      ADD_FAILURE() << "accepted: " << text;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  bad(R"({"schema":"attachsim-scenario/1","seed":1,"fleet":[{"profile":"FairPhone5G"}],"colour":"red"})", "colour");
  bad(R"({"schema":"attachsim-scenario/2","seed":1,"fleet":[{"profile":"FairPhone5G"}]})", "schema");
  bad(R"({"schema":"attachsim-scenario/1","fleet":[{"profile":"FairPhone5G"}]})", "seed");
  bad(R"({"schema":"attachsim-scenario/1","seed":1,"fleet":[{"profile":"Nokia3310"}]})", "Nokia3310");
  bad(R"({"schema":"attachsim-scenario/1","seed":1,"fleet":[{"profile":"FairPhone5G","count":0}]})", "count");
  bad(R"({"schema":"attachsim-scenario/1","seed":1,"fleet":[{"profile":"FairPhone5G","channel":"x"}]})", "channel");
  bad(R"({"schema":"attachsim-scenario/1","seed":1,"fleet":[{"profile":"FairPhone5G","rsrp":0}]})", "rsrp");
  bad(R"({"schema":"attachsim-scenario/1","seed":1,"network":{"auth_timer_ms":0},"fleet":[{"profile":"FairPhone5G"}]})",
      "timer");
  bad(R"({"schema":"attachsim-scenario/1","seed":1,"fleet":[{"profile":"FairPhone5G"},{"profile":"FairPhone5G"}]})",
      "id_prefix");
  bad(R"({"schema":"attachsim-scenario/1","seed":-4,"fleet":[]})", "seed");
  bad("{not json", "JSON");
}

TEST(Config, InlineProfileAndChannel) {
  const auto cfg = parse_scenario_config(R"({
    "schema": "attachsim-scenario/1", "seed": 9,
    "channels": [{"name": "wan", "base": "optimized_remote", "rtt": {"kind": "constant", "ms": 80}}],
    "fleet": [{"profile": {"name": "Relay", "base": "FairPhone5G", "class": "SimboxRemote",
                           "steps": {"EsmInfoRequest": null, "EsmInfoResponse": null}},
               "channel": "wan", "count": 2}]
  })");
  const auto& p = cfg.fleet[0].profile;
  EXPECT_EQ(p.model_name, "Relay");
  EXPECT_EQ(p.channel, "wan");
  EXPECT_FALSE(p.performs(AttachStep::EsmInfoRequest));
  EXPECT_EQ(cfg.channels.get("wan").rtt.median(), 80.0);
  EXPECT_EQ(device_id(cfg.fleet[0], 1), "Relay-02");
}

TEST(Policy, Parse) {
  const auto p = parse_policy(R"({"schema":"attachsim-policy/1","critical":2.33,"form":"scaled"})");
  EXPECT_EQ(p.critical, 2.33);
  EXPECT_EQ(p.form, TForm::Scaled);
  EXPECT_THROW(parse_policy(R"({"schema":"attachsim-policy/1","critical":-1})"), ConfigError);
  EXPECT_THROW(parse_policy(R"({"schema":"attachsim-policy/1","form":"bayes"})"), ConfigError);
  EXPECT_THROW(parse_policy(R"({"schema":"attachsim-policy/1","threshold":2})"), ConfigError);
}

TEST(Scenario, OneDeviceOneAttach) {
  auto cfg = parse_scenario_config(small_config(3, R"([{"profile":"GalaxyA90"}])", 1));
  cfg.output_dir = scratch("one");
  const auto art = run_scenario(cfg);
  const auto msgs = read_messages(art.logs);
  EXPECT_EQ(msgs.size(), 11u);
  EXPECT_EQ(art.record_count, 1u);
  for (const auto& m : msgs) EXPECT_EQ(m.device_id, "GalaxyA90-01");
}

TEST(Scenario, ByteIdenticalAcrossRunsAndThreadCounts) {
  auto cfg = parse_scenario_config(
      small_config(11, R"([{"profile":"SMBHyb_rem","count":3},{"profile":"OnePlusNord","count":4}])"));
  cfg.threads = 1;
  cfg.output_dir = scratch("det_a");
  const auto a = run_scenario(cfg);
  cfg.threads = 4;
  cfg.output_dir = scratch("det_b");
  const auto b = run_scenario(cfg);
  EXPECT_EQ(a.logs_checksum, b.logs_checksum);
  EXPECT_EQ(slurp(a.records), slurp(b.records));
  EXPECT_EQ(slurp(a.table), slurp(b.table));
  cfg.seed = 12;
  cfg.output_dir = scratch("det_c");
  EXPECT_NE(run_scenario(cfg).logs_checksum, a.logs_checksum);
}

TEST(Scenario, RecordsSortedByDevice) {
  const auto cfg = parse_scenario_config(
      small_config(2, R"([{"profile":"SMBPor_rem","count":2},{"profile":"FairPhone5G","count":2}])", 2));
  const auto sim = simulate(cfg);
  ASSERT_EQ(sim.records.size(), 8u);
  for (std::size_t i = 1; i < sim.records.size(); ++i) {
    EXPECT_LE(sim.records[i - 1].device_id, sim.records[i].device_id);
  }
  EXPECT_EQ(sim.models, (std::vector<std::string>{"SMBPor_rem", "FairPhone5G"}));
}

TEST(Scenario, TableShape) {
  auto cfg = parse_scenario_config(small_config(4, R"([{"profile":"GalaxyS3"},{"profile":"FairPhone5G"}])"));
  cfg.output_dir = scratch("table");
  const auto art = run_scenario(cfg);
  std::ifstream in(art.table);
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header, "step,GalaxyS3,FairPhone5G");
  int rows = 0;
  bool saw_slash = false;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("EsmInfoRequest,", 0) == 0) saw_slash = line.find(",/,") != std::string::npos;
  }
  EXPECT_EQ(rows, 12);
  EXPECT_TRUE(saw_slash);
}

TEST(Scenario, ReauthScheduleDrivesAttachTimes) {
  auto cfg = parse_scenario_config(R"({"schema":"attachsim-scenario/1","seed":5,
    "reauth":{"count":6,"min_spacing_ms":3600000},"fleet":[{"profile":"FairPhone5G"}]})");
  const auto sim = simulate(cfg);
  ASSERT_EQ(sim.records.size(), 6u);
  for (std::size_t i = 1; i < 6; ++i) {
    EXPECT_GE((sim.records[i].messages.front().time - sim.records[i - 1].messages.front().time).ms(), 3600000.0);
  }
}

TEST(Detection, EndToEnd) {
  const auto dir = scratch("detect");
  auto base = parse_scenario_config(small_config(21, R"([{"profile":"FairPhone5G","count":4},{"profile":"GalaxyA90","count":4}])", 50));
  base.output_dir = dir / "base";
  const auto b = run_scenario(base);

  auto mixed = parse_scenario_config(small_config(22, R"([{"profile":"SMBHyb_rem","count":2},{"profile":"SMBPor_rem","count":2}])", 20));
  mixed.output_dir = dir / "mixed";
  const auto m = run_scenario(mixed);

  const auto rep = run_detection(m.logs, b.logs, {}, dir / "report.json");
  EXPECT_EQ(rep.flagged(), 4u);
  EXPECT_EQ(rep.exit_code(), 2);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  std::ifstream csv(dir / "report.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "device_id,n,mean,std,median,t,p,decision");

  // A single-model fleet against itself is clean apart from chance flags.
  auto one_model = parse_scenario_config(small_config(23, R"([{"profile":"FairPhone5G","count":8}])", 50));
  one_model.output_dir = dir / "one";
  const auto o = run_scenario(one_model);
  const auto self = run_detection(o.logs, o.logs, {}, dir / "self.json");
  EXPECT_LE(self.flagged(), 1u);
}

TEST(Detection, MalformedLineSeven) {
  const auto dir = scratch("malformed");
  auto cfg = parse_scenario_config(small_config(1, R"([{"profile":"FairPhone5G"}])", 1));
  cfg.output_dir = dir;
  const auto art = run_scenario(cfg);
  std::ifstream in(art.logs);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  lines[6] = "{\"time\": oops}";
  std::ofstream out(dir / "bad.jsonl");
  for (const auto& l : lines) out << l << '\n';
  out.close();
  try {
    run_detection(dir / "bad.jsonl", art.logs, {}, dir / "r.json");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
  }
}

TEST(Distribution, CoupledMassBelow300AndEmpty) {
  const auto cfg = parse_scenario_config(small_config(8, R"([{"profile":"FairPhone5G","count":5}])", 50));
  const auto sim = simulate(cfg);
  const auto pts = distribution(sim.records, AttachStep::AuthenticationResponse);
  std::size_t n = 0;
  double area = 0;
  for (const auto& p : pts) {
    EXPECT_LT(p.hi_ms, 300.0);
    n += p.count;
    area += p.density * (p.hi_ms - p.lo_ms);
  }
  EXPECT_EQ(n, 250u);
  EXPECT_NEAR(area, 1.0, 1e-9);
  EXPECT_THROW(distribution({}, AttachStep::AuthenticationResponse), EmptyWindow);
  // Portech never sends an ESM request.
  const auto por = simulate(parse_scenario_config(small_config(8, R"([{"profile":"SMBPor_rem"}])", 3)));
  EXPECT_THROW(distribution(por.records, AttachStep::EsmInfoRequest), EmptyWindow);
}

TEST(Distribution, DecoupledMassAbove1000) {
  const auto sim = simulate(parse_scenario_config(small_config(8, R"([{"profile":"SMBHyb_rem","count":5}])", 50)));
  for (const auto& p : distribution(sim.records, AttachStep::AuthenticationResponse)) EXPECT_GT(p.lo_ms, 1000.0);
}

TEST(Configs, ShippedConfigsParse) {
  for (auto name : {"full_fleet.json", "coupled_only.json", "baseline.json", "mixed.json"}) {
    EXPECT_NO_THROW(load_scenario_config(fs::path(ATTACHSIM_CONFIG_DIR) / name)) << name;
  }
  EXPECT_NO_THROW(load_policy(fs::path(ATTACHSIM_CONFIG_DIR) / "policy.json"));
}
