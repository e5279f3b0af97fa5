#include "attachsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "attachsim/checksum.hpp"
#include "attachsim/errors.hpp"
#include "attachsim/log_io.hpp"

namespace attachsim {

namespace {

constexpr double kDayMs = 86'400'000.0;

struct DeviceJob {
  std::size_t index = 0;  // global, fixes the RNG substream
  std::size_t entry = 0;
  std::string id;
};

std::vector<AttachRecord> run_device(const ScenarioConfig& cfg, const DeviceModel& model, const FleetEntry& entry,
                                     const DeviceJob& job) {
  RngStream rng = RngStream(cfg.seed).substream(job.index);
  const Subscriber sub = Subscriber::matching(SubscriberKey::random(rng));
  NetworkConfig net = cfg.network;
  net.environment = entry.environment.value_or(cfg.environment);

  std::vector<SimTime> starts;
  int attaches = cfg.attaches_per_device;
  if (cfg.reauth) {
    starts = schedule_reauth(*cfg.reauth, TimeWindow{SimTime{}, SimTime{} + Duration::from_ms(kDayMs)}, rng);
    attaches = cfg.reauth->count;
  }

  EventClock clock;
  std::vector<AttachRecord> out;
  out.reserve(static_cast<std::size_t>(attaches));
  for (int i = 0; i < attaches; ++i) {
    if (!starts.empty()) clock.advance_to(starts[static_cast<std::size_t>(i)]);
    out.push_back(run_attach(model, net, clock, rng, job.id, sub, i));
    clock.advance_to(clock.now() + cfg.attach_gap);
  }
  return out;
}

std::string fixed(double v, int prec = 3) { return fmt::format("{:.{}f}", v, prec); }

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

void close_out(std::ofstream& os, const std::filesystem::path& p) {
  os.close();
  if (!os) throw IoError("error writing " + p.string());
}

}  // namespace

const std::string& SimulationResult::model_of(std::string_view device_id) const {
  for (const auto& [id, model] : devices) {
    if (id == device_id) return model;
  }
  throw ConfigError("unknown device '" + std::string(device_id) + "'");
}

SimulationResult simulate(const ScenarioConfig& cfg) {
  validate_scenario(cfg);
  const AlgorithmRegistry registry;

  std::vector<std::unique_ptr<DeviceModel>> models;
  std::vector<DeviceJob> jobs;
  SimulationResult sim;
  for (std::size_t e = 0; e < cfg.fleet.size(); ++e) {
    const auto& entry = cfg.fleet[e];
    models.push_back(std::make_unique<DeviceModel>(entry.profile, cfg.channels.get(entry.profile.channel),
                                                   registry.get(entry.profile.auth_alg)));
    if (std::find(sim.models.begin(), sim.models.end(), entry.profile.model_name) == sim.models.end()) {
      sim.models.push_back(entry.profile.model_name);
    }
    for (int i = 0; i < entry.count; ++i) {
      jobs.push_back(DeviceJob{jobs.size(), e, device_id(entry, i)});
    }
  }

  std::vector<std::vector<AttachRecord>> per_device(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        per_device[j] = run_device(cfg, *models[jobs[j].entry], cfg.fleet[jobs[j].entry], jobs[j]);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  unsigned n_threads = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, jobs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return jobs[a].id < jobs[b].id; });
  for (auto j : order) {
    sim.devices.emplace_back(jobs[j].id, cfg.fleet[jobs[j].entry].profile.model_name);
    for (auto& r : per_device[j]) sim.records.push_back(std::move(r));
  }
  return sim;
}

std::vector<ModelTable> step_table(const SimulationResult& sim) {
  std::map<std::string, std::string, std::less<>> model_of(sim.devices.begin(), sim.devices.end());
  struct Acc {
    std::array<std::vector<double>, kStepCount> steps;
    std::vector<double> total;
  };
  std::map<std::string, Acc, std::less<>> acc;
  for (const auto& r : sim.records) {
    auto& a = acc[model_of.at(r.device_id)];
    for (const auto& s : compute_step_latencies(r)) {
      a.steps[static_cast<std::size_t>(index_of(s.step))].push_back(s.latency.ms());
    }
    if (r.outcome == AttachOutcome::Completed) a.total.push_back(r.span().ms());
  }
  std::vector<ModelTable> out;
  for (const auto& m : sim.models) {
    ModelTable t;
    t.model = m;
    const auto it = acc.find(m);
    if (it != acc.end()) {
      for (std::size_t s = 0; s < kStepCount; ++s) {
        if (!it->second.steps[s].empty()) t.steps[s] = summarize(it->second.steps[s]);
      }
      if (!it->second.total.empty()) t.total = summarize(it->second.total);
    }
    out.push_back(std::move(t));
  }
  return out;
}

ScenarioArtifacts write_artifacts(const SimulationResult& sim, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  ScenarioArtifacts art;
  art.logs = dir / "logs.jsonl";
  art.records = dir / "records.csv";
  art.table = dir / "table.csv";
  art.record_count = sim.records.size();

  {
    auto os = open_out(art.logs);
    write_records(os, sim.records);
    close_out(os, art.logs);
  }
  {
    auto os = open_out(art.records);
    os << "device_id,model,attach_seq,outcome,start_ms,span_ms,auth_ms,auth_transfer_ms,auth_processing_ms\n";
    for (const auto& r : sim.records) {
      const auto auth = r.latency(AttachStep::AuthenticationResponse);
      os << r.device_id << ',' << sim.model_of(r.device_id) << ',' << r.attach_seq << ',' << to_string(r.outcome)
         << ',' << (r.messages.empty() ? std::string() : fixed(r.messages.front().time.ms())) << ','
         << fixed(r.span().ms()) << ',' << (auth ? fixed(auth->ms()) : std::string()) << ','
         << (r.auth_breakdown ? fixed(r.auth_breakdown->transfer_total_ms) : std::string()) << ','
         << (r.auth_breakdown ? fixed(r.auth_breakdown->processing_total_ms) : std::string()) << '\n';
    }
    close_out(os, art.records);
  }
  {
    const auto table = step_table(sim);
    auto os = open_out(art.table);
    os << "step";
    for (const auto& t : table) os << ',' << t.model;
    os << '\n';
    const auto cell = [](const std::optional<LatencyStats>& s) {
      return s ? fmt::format("{:.1f}±{:.1f}", s->mean, s->std) : std::string("/");
    };
    for (std::size_t s = 0; s < kStepCount; ++s) {
      os << to_string(kAllSteps[s]);
      for (const auto& t : table) os << ',' << cell(t.steps[s]);
      os << '\n';
    }
    os << "Total";
    for (const auto& t : table) os << ',' << cell(t.total);
    os << '\n';
    close_out(os, art.table);
  }
  art.logs_checksum = file_checksum(art.logs);
  return art;
}

ScenarioArtifacts run_scenario(const ScenarioConfig& cfg) {
  if (cfg.output_dir.empty()) throw ConfigError("scenario has no output directory");
  return write_artifacts(simulate(cfg), cfg.output_dir);
}

std::size_t DetectionReport::flagged() const {
  return static_cast<std::size_t>(std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) {
    return v.decision == Decision::Flagged;
  }));
}

DetectionReport detect(const std::vector<AttachRecord>& records, const std::vector<AttachRecord>& baseline,
                       const DetectPolicy& policy) {
  std::vector<LatencySample> base;
  for (const auto& r : baseline) {
    auto s = compute_step_latencies(r);
    base.insert(base.end(), s.begin(), s.end());
  }
  DetectionReport rep;
  rep.baseline = aggregate_auth_latency(base, "", policy.window);

  std::map<std::string, std::vector<LatencySample>, std::less<>> by_device;
  for (const auto& r : records) {
    auto s = compute_step_latencies(r);
    auto& v = by_device[r.device_id];
    v.insert(v.end(), s.begin(), s.end());
  }
  for (const auto& [id, samples] : by_device) {
    const auto stats = aggregate_auth_latency(samples, id, policy.window);
    rep.verdicts.push_back(classify(id, stats, rep.baseline, policy));
  }
  return rep;
}

namespace {

nlohmann::ordered_json stats_json(const LatencyStats& s) {
  nlohmann::ordered_json j;
  j["n"] = s.n;
  j["mean_ms"] = s.mean;
  j["std_ms"] = s.std;
  j["median_ms"] = s.median;
  j["min_ms"] = s.min;
  j["max_ms"] = s.max;
  return j;
}

}  // namespace

DetectionReport run_detection(const std::filesystem::path& logs, const std::filesystem::path& baseline_logs,
                              const DetectPolicy& policy, const std::filesystem::path& report) {
  const auto dev = read_messages(logs);
  const auto base = read_messages(baseline_logs);
  const DetectionReport rep = detect(group_records(dev), group_records(base), policy);

  nlohmann::ordered_json j;
  j["schema"] = "attachsim-report/1";
  j["policy"] = {{"critical", policy.critical}, {"form", std::string(to_string(policy.form))}};
  j["baseline"] = stats_json(rep.baseline);
  j["flagged"] = rep.flagged();
  auto& devices = j["devices"] = nlohmann::ordered_json::array();
  for (const auto& v : rep.verdicts) {
    nlohmann::ordered_json d;
    d["device_id"] = v.device_id;
    d["decision"] = std::string(to_string(v.decision));
    d["stats"] = stats_json(v.stats);
    d["t"] = v.test.t;
    d["t_scaled"] = v.test.t_scaled;
    d["t_standard"] = v.test.t_standard;
    d["se"] = v.test.se;
    d["df"] = v.test.df;
    d["critical"] = v.test.critical;
    d["t_ratio"] = v.test.t_ratio;
    d["p_value"] = v.test.p_value;
    d["log10_p"] = v.test.log10_p;
    devices.push_back(std::move(d));
  }
  if (report.has_parent_path()) std::filesystem::create_directories(report.parent_path());
  {
    auto os = open_out(report);
    os << j.dump(2) << '\n';
    close_out(os, report);
  }
  auto csv_path = report;
  csv_path.replace_extension(".csv");
  {
    auto os = open_out(csv_path);
    os << "device_id,n,mean,std,median,t,p,decision\n";
    for (const auto& v : rep.verdicts) {
      os << v.device_id << ',' << v.stats.n << ',' << fixed(v.stats.mean) << ',' << fixed(v.stats.std) << ','
         << fixed(v.stats.median) << ',' << fmt::format("{:.6f}", v.test.t) << ','
         << fmt::format("{:.6e}", v.test.p_value) << ',' << to_string(v.decision) << '\n';
    }
    close_out(os, csv_path);
  }
  return rep;
}

std::vector<DistributionPoint> distribution(const std::vector<AttachRecord>& records, AttachStep step,
                                            std::size_t bins) {
  if (bins == 0) throw ConfigError("histogram needs at least one bin");
  std::vector<double> v;
  for (const auto& r : records) {
    if (auto l = r.latency(step)) v.push_back(l->ms());
  }
  if (v.empty()) throw EmptyWindow(fmt::format("no {} samples", to_string(step)));
  const auto stats = summarize(v);
  double lo = stats.min;
  double hi = stats.max;
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  // Silverman's rule; falls back to the bin width for degenerate spreads.
  double h = 1.06 * stats.std * std::pow(static_cast<double>(v.size()), -0.2);
  if (!(h > 0.0)) h = width;

  std::vector<DistributionPoint> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo_ms = lo + width * static_cast<double>(b);
    out[b].hi_ms = lo + width * static_cast<double>(b + 1);
  }
  for (double x : v) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    out[std::min(b, bins - 1)].count++;
  }
  const double n = static_cast<double>(v.size());
  const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
  for (auto& p : out) {
    p.density = static_cast<double>(p.count) / (n * width);
    const double c = 0.5 * (p.lo_ms + p.hi_ms);
    double k = 0.0;
    for (double x : v) {
      const double z = (c - x) / h;
      k += std::exp(-0.5 * z * z);
    }
    p.kde = k * norm;
  }
  return out;
}

void emit_distribution(const std::filesystem::path& logs, AttachStep step, const std::filesystem::path& out,
                       std::size_t bins) {
  const auto records = group_records(read_messages(logs));
  const auto points = distribution(records, step, bins);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  auto os = open_out(out);
  os << "lo_ms,hi_ms,count,density,kde\n";
  for (const auto& p : points) {
    os << fixed(p.lo_ms) << ',' << fixed(p.hi_ms) << ',' << p.count << ',' << fmt::format("{:.6e}", p.density)
       << ',' << fmt::format("{:.6e}", p.kde) << '\n';
  }
  close_out(os, out);
}

}  // namespace attachsim
