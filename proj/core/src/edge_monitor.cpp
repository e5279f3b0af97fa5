#include "attachsim/edge_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "attachsim/errors.hpp"
#include "attachsim/student_t.hpp"

namespace attachsim {

std::vector<LatencySample> compute_step_latencies(const AttachRecord& record) {
  std::vector<LatencySample> out;
  const auto& m = record.messages;
  if (m.size() < 2) return out;
  out.reserve(m.size() - 1);
  for (std::size_t i = 1; i < m.size(); ++i) {
    if (index_of(m[i].message) <= index_of(m[i - 1].message)) {
      throw MalformedRecord(record.device_id + ": " + std::string(to_string(m[i].message)) + " follows " +
                            std::string(to_string(m[i - 1].message)));
    }
    if (m[i].time < m[i - 1].time) {
      throw MalformedRecord(record.device_id + ": time goes backwards at " +
                            std::string(to_string(m[i].message)));
    }
    out.push_back(LatencySample{record.device_id, m[i].message, m[i].time - m[i - 1].time,
                                record.attach_seq, m[i].time});
  }
  return out;
}

LatencyStats summarize(std::span<const double> values) {
  if (values.empty()) throw EmptyWindow("no samples in window");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  LatencyStats s;
  s.n = v.size();
  s.min = v.front();
  s.max = v.back();
  const std::size_t mid = s.n / 2;
  s.median = s.n % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

LatencyStats aggregate_auth_latency(std::span<const LatencySample> samples, std::string_view device_id,
                                    const TimeWindow& window) {
  std::vector<double> v;
  for (const auto& s : samples) {
    if (s.step != AttachStep::AuthenticationResponse) continue;
    if (!device_id.empty() && s.device_id != device_id) continue;
    if (!window.contains(s.wall_time)) continue;
    v.push_back(s.latency.ms());
  }
  if (v.empty()) throw EmptyWindow("no authentication samples for '" + std::string(device_id) + "'");
  return summarize(v);
}

std::string_view to_string(TForm f) { return f == TForm::Scaled ? "scaled" : "welch"; }

TForm parse_tform(std::string_view s) {
  if (s == "welch") return TForm::Welch;
  if (s == "scaled") return TForm::Scaled;
  throw ConfigError("unknown t form '" + std::string(s) + "' (expected welch or scaled)");
}

TTestResult welch_t(const LatencyStats& a, const LatencyStats& b, double critical, TForm form) {
  if (a.n < 2 || b.n < 2) throw DegenerateInput("t-test needs at least 2 samples per group");
  if (!std::isfinite(a.std) || !std::isfinite(b.std) || !std::isfinite(a.mean) || !std::isfinite(b.mean)) {
    throw DegenerateInput("t-test input is not finite");
  }
  if (!(critical > 0.0)) throw ConfigError("critical value must be positive");
  const double na = static_cast<double>(a.n);
  const double nb = static_cast<double>(b.n);
  const double diff = std::fabs(b.mean - a.mean);

  TTestResult r;
  r.critical = critical;
  r.form = form;
  r.se = std::sqrt(a.std * a.std / na + b.std * b.std / nb);
  if (r.se == 0.0) {
    if (diff != 0.0) throw DegenerateInput("zero variance in both groups with different means");
    r.df = na + nb - 2.0;
    r.p_value = 0.5;
    r.log10_p = std::log10(0.5);
    return r;
  }
  r.t_standard = diff / r.se;
  r.t_scaled = diff / std::sqrt(r.se * r.se * (1.0 / nb + 1.0 / na));
  r.t = form == TForm::Scaled ? r.t_scaled : r.t_standard;
  r.t_ratio = r.t / critical;
  r.df = welch_df(a.std * a.std, na, b.std * b.std, nb);
  const double lp = student_t_log_sf(r.t_standard, r.df);
  r.p_value = std::exp(lp);
  r.log10_p = lp / std::numbers::ln10;
  return r;
}

std::string_view to_string(Decision d) { return d == Decision::Flagged ? "Flagged" : "Clear"; }

Verdict classify(std::string_view device_id, const LatencyStats& device, const LatencyStats& baseline,
                 const DetectPolicy& policy) {
  Verdict v;
  v.device_id = std::string(device_id);
  v.stats = device;
  v.test = welch_t(baseline, device, policy.critical, policy.form);
  const bool slower = device.median > baseline.median;
  v.decision = v.test.t > policy.critical && slower ? Decision::Flagged : Decision::Clear;
  return v;
}

std::vector<SimTime> schedule_reauth(const ReauthPolicy& policy, const TimeWindow& day, RngStream& rng) {
  if (policy.count < 1) throw ConfigError("re-authentication count must be at least 1");
  if (policy.min_spacing < Duration{}) throw ConfigError("re-authentication spacing must be non-negative");
  if (!(day.begin < day.end)) throw ConfigError("re-authentication range is empty");
  // At least 1 us apart so the times are strictly increasing.
  const std::int64_t gap = std::max<std::int64_t>(1, policy.min_spacing.us());
  const std::int64_t span = (day.end - day.begin).us();
  const std::int64_t reserved = gap * (policy.count - 1);
  if (reserved >= span) {
    throw ConfigError("cannot fit " + std::to_string(policy.count) + " re-authentications in the range");
  }
  const std::int64_t slack = span - reserved;
  std::vector<std::int64_t> offs(static_cast<std::size_t>(policy.count));
  for (auto& o : offs) {
    o = std::min(slack - 1, static_cast<std::int64_t>(rng.uniform() * static_cast<double>(slack)));
  }
  std::sort(offs.begin(), offs.end());
  std::vector<SimTime> out;
  out.reserve(offs.size());
  for (std::size_t i = 0; i < offs.size(); ++i) {
    out.push_back(day.begin + Duration::from_us(offs[i] + static_cast<std::int64_t>(i) * gap));
  }
  return out;
}

}  // namespace attachsim
