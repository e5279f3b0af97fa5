#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attachsim/attach_protocol.hpp"
#include "attachsim/rng.hpp"
#include "attachsim/time.hpp"

namespace attachsim {

struct LatencySample {
  std::string device_id;
  AttachStep step = AttachStep::AttachRequest;
  Duration latency;
  int attach_seq = 0;
  SimTime wall_time;  // arrival of the message that closes the gap
};

// One sample per message after the first. Throws MalformedRecord when the
// record is out of order in step or time.
std::vector<LatencySample> compute_step_latencies(const AttachRecord& record);

// Half-open [begin, end). Default covers everything.
struct TimeWindow {
  SimTime begin = SimTime::from_us(std::numeric_limits<std::int64_t>::min());
  SimTime end = SimTime::from_us(std::numeric_limits<std::int64_t>::max());

  bool contains(SimTime t) const { return begin <= t && t < end; }
};

struct LatencyStats {
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;  // n-1 denominator, 0 for n == 1
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

// Throws EmptyWindow on empty input.
LatencyStats summarize(std::span<const double> values_ms);

// Authentication-response samples of `device_id` inside `window`. An empty
// device id takes every device. Throws EmptyWindow.
LatencyStats aggregate_auth_latency(std::span<const LatencySample> samples, std::string_view device_id,
                                    const TimeWindow& window = {});

enum class TForm {
  Welch,  // |Δ| / SE
  Scaled,  // |Δ| / sqrt(SE² (1/n_a + 1/n_b))
};

std::string_view to_string(TForm f);
TForm parse_tform(std::string_view s);

struct TTestResult {
  double se = 0.0;
  double t = 0.0;           // selected form
  double t_scaled = 0.0;
  double t_standard = 0.0;
  double df = 0.0;
  double critical = 1.65;
  double t_ratio = 0.0;     // t / critical
  double p_value = 0.0;     // one-sided in the observed direction, from t_standard and df
  double log10_p = 0.0;     // survives where p_value underflows
  TForm form = TForm::Welch;
};

// Throws DegenerateInput for n < 2, non-finite stds, or zero SE with
// unequal means. Zero SE with equal means gives t = 0.
TTestResult welch_t(const LatencyStats& a, const LatencyStats& b, double critical = 1.65,
                    TForm form = TForm::Welch);

struct DetectPolicy {
  double critical = 1.65;
  TForm form = TForm::Welch;
  TimeWindow window{};
};

enum class Decision { Clear, Flagged };
std::string_view to_string(Decision d);

struct Verdict {
  std::string device_id;
  Decision decision = Decision::Clear;
  TTestResult test;
  LatencyStats stats;
};

// Flags only devices that are both significantly different and slower.
Verdict classify(std::string_view device_id, const LatencyStats& device, const LatencyStats& baseline,
                 const DetectPolicy& policy = {});

struct ReauthPolicy {
  int count = 1;
  Duration min_spacing{};
};

// `count` strictly increasing trigger times in [begin, end), uniformly placed
// subject to the spacing. Throws ConfigError when they cannot fit.
std::vector<SimTime> schedule_reauth(const ReauthPolicy& policy, const TimeWindow& day, RngStream& rng);

}  // namespace attachsim
