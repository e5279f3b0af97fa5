#include <sstream>
#include <vector>

#include <benchmark/benchmark.h>

#include "attachsim/attach_protocol.hpp"
#include "attachsim/edge_monitor.hpp"
#include "attachsim/log_io.hpp"
#include "attachsim/scenario.hpp"
#include "attachsim/scenario_config.hpp"

using namespace attachsim;

namespace {

DeviceModel model(const char* name) {
  const auto& p = builtin_profiles().get(name);
  return DeviceModel(p, builtin_channels().get(p.channel), xor_test_algorithm());
}

void BM_RunAttach(benchmark::State& state, const char* name) {
  const auto m = model(name);
  RngStream rng(1);
  for (auto _ : state) {
    EventClock clock;
    benchmark::DoNotOptimize(run_attach(m, {}, clock, rng, "bench"));
  }
}
BENCHMARK_CAPTURE(BM_RunAttach, phone, "FairPhone5G");
BENCHMARK_CAPTURE(BM_RunAttach, hybertone_remote, "SMBHyb_rem");
BENCHMARK_CAPTURE(BM_RunAttach, portech_remote, "SMBPor_rem");

void BM_WelchT(benchmark::State& state) {
  const LatencyStats a{500, 70.0, 15.0, 69.0, 30.0, 140.0};
  const LatencyStats b{50, 2100.0, 120.0, 2090.0, 1800.0, 2400.0};
  for (auto _ : state) benchmark::DoNotOptimize(welch_t(a, b, 1.65));
}
BENCHMARK(BM_WelchT);

void BM_FullFleet(benchmark::State& state) {
  ScenarioConfig cfg;
  cfg.seed = 42;
  for (const auto& p : builtin_profiles().all()) cfg.fleet.push_back(FleetEntry{p, 10, std::nullopt, p.model_name});
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.device_count()) *
                          cfg.attaches_per_device);
}
BENCHMARK(BM_FullFleet)->Unit(benchmark::kMillisecond);

void BM_ReadLogs(benchmark::State& state) {
  const auto m = model("GalaxyA90");
  RngStream rng(2);
  std::vector<AttachRecord> recs;
  for (int i = 0; i < 1000; ++i) {
    EventClock clock;
    recs.push_back(run_attach(m, {}, clock, rng, "GalaxyA90-01"));
  }
  std::ostringstream out;
  write_records(out, recs);
  const std::string text = out.str();
  for (auto _ : state) {
    std::istringstream in(text);
    benchmark::DoNotOptimize(read_messages(in));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ReadLogs)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
